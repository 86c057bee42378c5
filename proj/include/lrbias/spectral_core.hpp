#pragma once

// Dense symmetric eigendecomposition (cyclic Jacobi) and spectrum utilities.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lrbias/error.hpp"

namespace lrbias {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Eigenvalues sorted descending, eigenvectors stored column-wise and paired
/// with the eigenvalue of the same index.
struct Spectrum {
  Vector values;
  Matrix vectors;
  /// Two neighbouring eigenvalues agree to 1e-10 relative.
  bool degenerate = false;

  Index dim() const noexcept { return values.size(); }
  double largest() const { return values(0); }
  double smallest() const { return values(values.size() - 1); }
  bool positive() const { return dim() > 0 && smallest() > 0.0; }
};

struct EigOptions {
  /// Reject matrices with an eigenvalue <= 0 (loss operators).
  bool require_positive_definite = false;
  /// Stop once ||offdiag||_F <= tolerance * ||A||_F.
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

namespace detail {

inline double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline bool relatively_close(double a, double b, double rel) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale;
}

}  // namespace detail

inline bool is_degenerate(const Vector& sorted_values, double rel = 1e-10) {
  for (Index i = 0; i + 1 < sorted_values.size(); ++i)
    if (detail::relatively_close(sorted_values(i), sorted_values(i + 1), rel)) return true;
  return false;
}

/// Builds a Spectrum from already-known eigenpairs (used for diagonal
/// operators); sorts descending and applies the sign convention.
Spectrum make_spectrum(Vector values, Matrix vectors);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order. Each eigenvector is signed so
/// that its largest-magnitude entry is positive, which makes the output
/// reproducible bit for bit. Throws NotSymmetric when A deviates from its
/// transpose by more than 1e-12 relative, and NotPositiveDefinite when
/// `opts.require_positive_definite` is set and an eigenvalue is <= 0.
inline Spectrum eig_sym(const Matrix& a, const EigOptions& opts = {}) {
  const Index n = a.rows();
  require(n >= 1 && a.cols() == n, ErrorCode::DimensionMismatch, "eig_sym expects a square non-empty matrix");
  const double amax = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * std::max(amax, std::numeric_limits<double>::min()), ErrorCode::NotSymmetric,
          "matrix is not symmetric within 1e-12 relative");

  Matrix w = 0.5 * (a + a.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double target = opts.tolerance * w.norm();

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (detail::offdiag_norm(w) <= target) break;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = w(k, p);
          const double akq = w(k, q);
          w(k, p) = w(p, k) = c * akp - s * akq;
          w(k, q) = w(q, k) = s * akp + c * akq;
        }
        w(p, p) -= t * apq;
        w(q, q) += t * apq;
        w(p, q) = w(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  Spectrum out = make_spectrum(w.diagonal(), std::move(v));
  if (opts.require_positive_definite)
    require(out.smallest() > 0.0, ErrorCode::NotPositiveDefinite, "operator has a non-positive eigenvalue");
  return out;
}

inline Spectrum make_spectrum(Vector values, Matrix vectors) {
  const Index n = values.size();
  require(vectors.rows() == n && vectors.cols() == n, ErrorCode::DimensionMismatch,
          "eigenvector matrix must be n x n");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return values(i) > values(j); });

  Spectrum out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = values(src);
    Vector col = vectors.col(src);
    Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    out.vectors.col(k) = col;
  }
  out.degenerate = is_degenerate(out.values);
  return out;
}

/// Spectrum of a diagonal operator, eigenvectors = canonical basis.
inline Spectrum diagonal_spectrum(const Vector& diag) {
  return make_spectrum(diag, Matrix::Identity(diag.size(), diag.size()));
}

/// Q diag(sigma) Q^T.
inline Matrix reconstruct(const Spectrum& s) {
  return s.vectors * s.values.asDiagonal() * s.vectors.transpose();
}

/// sigma_1 / sigma_n.
inline double condition_number(const Spectrum& s) {
  require(s.dim() >= 1, ErrorCode::InvalidArgument, "empty spectrum");
  require(s.smallest() > 0.0, ErrorCode::NotPositiveDefinite, "condition number needs a positive spectrum");
  return s.largest() / s.smallest();
}

/// Uniform rescaling of the eigenvalues; eigenvectors untouched.
inline Spectrum scaled(const Spectrum& s, double factor) {
  Spectrum out = s;
  out.values *= factor;
  return out;
}

}  // namespace lrbias
