#pragma once

// Residuals r(σ) = |1 − σ g(σ)| of classical spectral filters, compared with
// the residual |1 − ησ|^t left by t steps of gradient descent.

#include <cmath>
#include <cstdint>

#include "lrbias/spectral_core.hpp"

namespace lrbias {

enum class FilterKind { CutOff, GD, Tikhonov, IteratedTikhonov };

inline const char* to_string(FilterKind k) noexcept {
  switch (k) {
    case FilterKind::CutOff: return "CutOff";
    case FilterKind::GD: return "GD";
    case FilterKind::Tikhonov: return "Tikhonov";
    case FilterKind::IteratedTikhonov: return "IteratedTikhonov";
  }
  return "Unknown";
}

struct FilterSpec {
  FilterKind kind = FilterKind::Tikhonov;
  double lambda = 0.0;  // CutOff, Tikhonov
  double eta = 0.0;     // GD, IteratedTikhonov
  std::int64_t t = 0;   // GD, IteratedTikhonov

  static FilterSpec cutoff(double lambda) { return {FilterKind::CutOff, lambda, 0.0, 0}; }
  static FilterSpec tikhonov(double lambda) { return {FilterKind::Tikhonov, lambda, 0.0, 0}; }
  static FilterSpec gd(double eta, std::int64_t t) { return {FilterKind::GD, 0.0, eta, t}; }
  static FilterSpec iterated_tikhonov(double eta, std::int64_t t) { return {FilterKind::IteratedTikhonov, 0.0, eta, t}; }
};

inline void validate(const FilterSpec& f) {
  switch (f.kind) {
    case FilterKind::CutOff:
    case FilterKind::Tikhonov:
      require(f.lambda > 0.0, ErrorCode::InvalidArgument, "filter needs lambda > 0");
      break;
    case FilterKind::GD:
    case FilterKind::IteratedTikhonov:
      require(f.eta > 0.0 && f.t >= 0, ErrorCode::InvalidArgument, "filter needs eta > 0 and t >= 0");
      break;
  }
}

/// CutOff: 1 if σ < λ else 0 (the boundary keeps the component).
/// GD: |1 − ησ|^t.  Tikhonov: λ/(σ + λ).  IteratedTikhonov: (1/(1 + ησ))^t.
inline double residual(const FilterSpec& f, double sigma) {
  validate(f);
  switch (f.kind) {
    case FilterKind::CutOff: return sigma < f.lambda ? 1.0 : 0.0;
    case FilterKind::GD: return std::pow(std::abs(1.0 - f.eta * sigma), static_cast<double>(f.t));
    case FilterKind::Tikhonov: return f.lambda / (sigma + f.lambda);
    case FilterKind::IteratedTikhonov: return std::pow(1.0 / (1.0 + f.eta * sigma), static_cast<double>(f.t));
  }
  return 0.0;
}

/// 0-based index of the eigenvalue with the largest residual; ties go to the
/// smaller index.
inline Index residual_argmax(const FilterSpec& f, const Spectrum& s) {
  require(s.dim() >= 1, ErrorCode::InvalidArgument, "empty spectrum");
  Index best = 0;
  double best_value = residual(f, s.values(0));
  for (Index i = 1; i < s.dim(); ++i) {
    const double r = residual(f, s.values(i));
    if (r > best_value) {
      best = i;
      best_value = r;
    }
  }
  return best;
}

}  // namespace lrbias
