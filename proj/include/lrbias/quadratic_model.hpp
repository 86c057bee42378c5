#pragma once

// Quadratic train/test objectives  F(θ) = ½‖θ − θ̂*‖²_T̂ + m̂  and  R(θ) = ½‖θ − θ̃*‖²_T̃.

#include <cmath>
#include <string>

#include "lrbias/spectral_core.hpp"

namespace lrbias {

struct QuadraticObjective {
  Spectrum spectrum;
  Vector optimum;
  double min_value = 0.0;

  Index dim() const noexcept { return optimum.size(); }

  /// Coordinates of θ − optimum in the eigenbasis.
  Vector coords(const Vector& theta) const {
    check_dim(theta);
    return spectrum.vectors.transpose() * (theta - optimum);
  }

  /// ½ Σ σ_i μ_i² for eigen-coordinates μ.
  double excess_from_coords(const Vector& mu) const {
    require(mu.size() == dim(), ErrorCode::DimensionMismatch, "coordinate vector has wrong size");
    return 0.5 * (spectrum.values.array() * mu.array().square()).sum();
  }

  double excess(const Vector& theta) const { return excess_from_coords(coords(theta)); }

  double eval(const Vector& theta) const { return excess(theta) + min_value; }

  /// T(θ − optimum), applied through the eigendecomposition.
  Vector grad(const Vector& theta) const {
    const Vector mu = coords(theta);
    return spectrum.vectors * (spectrum.values.array() * mu.array()).matrix();
  }

  /// Dense operator T = Q diag(σ) Qᵀ.
  Matrix operator_matrix() const { return reconstruct(spectrum); }

  void check_dim(const Vector& theta) const {
    require(theta.size() == dim(), ErrorCode::DimensionMismatch,
            "expected a vector of size " + std::to_string(dim()) + ", got " + std::to_string(theta.size()));
  }
};

/// Validated constructor: spectrum and optimum sizes agree, min_value >= 0.
inline QuadraticObjective make_objective(Spectrum spectrum, Vector optimum, double min_value = 0.0) {
  require(spectrum.dim() == optimum.size(), ErrorCode::DimensionMismatch, "spectrum and optimum sizes differ");
  require(min_value >= 0.0, ErrorCode::InvalidArgument, "min_value must be nonnegative");
  return QuadraticObjective{std::move(spectrum), std::move(optimum), min_value};
}

/// Builds an objective from a dense symmetric positive-definite operator.
inline QuadraticObjective make_objective(const Matrix& op, Vector optimum, double min_value = 0.0) {
  EigOptions opts;
  opts.require_positive_definite = true;
  return make_objective(eig_sym(op, opts), std::move(optimum), min_value);
}

struct ProblemPair {
  QuadraticObjective train;
  QuadraticObjective test;

  Index dim() const noexcept { return train.dim(); }
  double kappa_F() const { return condition_number(train.spectrum); }
  double kappa_R() const { return condition_number(test.spectrum); }
  /// R(θ̂*): population loss of the empirical optimum.
  double model_error() const { return test.excess(train.optimum); }
  /// R(θ) − R(θ̃*) for an iterate given by its train eigen-coordinates,
  /// θ = θ̂* + Q_F μ. Avoids forming θ when μ is tiny relative to θ̂*.
  double test_excess_from_train_coords(const Vector& mu) const {
    const Vector delta = train.spectrum.vectors * mu + (train.optimum - test.optimum);
    const Vector nu = test.spectrum.vectors.transpose() * delta;
    return test.excess_from_coords(nu);
  }
};

inline ProblemPair make_pair(QuadraticObjective train, QuadraticObjective test) {
  require(train.dim() == test.dim(), ErrorCode::DimensionMismatch, "train and test dimensions differ");
  require(test.min_value == 0.0, ErrorCode::InvalidArgument, "the test objective has minimum 0");
  return ProblemPair{std::move(train), std::move(test)};
}

/// Rescales both operators so that their top eigenvalue is 1. The train
/// minimum is divided by the same factor as the train spectrum.
inline ProblemPair normalize(const ProblemPair& pair) {
  ProblemPair out = pair;
  const double sf = pair.train.spectrum.largest();
  const double sr = pair.test.spectrum.largest();
  out.train.spectrum = scaled(pair.train.spectrum, 1.0 / sf);
  out.train.min_value = pair.train.min_value / sf;
  out.test.spectrum = scaled(pair.test.spectrum, 1.0 / sr);
  return out;
}

/// Regularized least-squares objective of a kernel problem, in the
/// eigen-coordinates of K/n.
///
/// With K/n = Σ σ_i u_i u_iᵀ and θ-coordinates c_i = √(nσ_i)⟨α, u_i⟩, the loss
/// (1/2n)‖Kα − y‖² + (λ/2)‖θ‖²_H equals ½ Σ (σ_i + λ)(c_i − θ̂*_i)² + m̂ with
///   θ̂*_i = √σ_i ⟨y, u_i⟩ / (√n (σ_i + λ)),   m̂ = (1/2n) Σ ⟨y, u_i⟩² λ/(σ_i + λ).
/// The returned spectrum uses the canonical basis (the coordinates are
/// already eigen-coordinates) and eigenvalues σ_i + λ.
inline QuadraticObjective from_kernel(const Spectrum& kn, const Vector& y, double lambda) {
  const Index n = kn.dim();
  require(y.size() == n, ErrorCode::DimensionMismatch, "label vector size differs from kernel size");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be nonnegative");
  if (lambda == 0.0) {
    require(kn.smallest() >= 1e-12 * kn.largest() * static_cast<double>(n), ErrorCode::SingularKernel,
            "kernel matrix is numerically singular and lambda = 0");
  }
  const double rn = std::sqrt(static_cast<double>(n));
  const Vector proj = kn.vectors.transpose() * y;
  Vector opt(n);
  Vector vals(n);
  double m = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double s = std::max(kn.values(i), 0.0);
    vals(i) = s + lambda;
    require(vals(i) > 0.0, ErrorCode::SingularKernel, "zero eigenvalue with lambda = 0");
    opt(i) = std::sqrt(s) * proj(i) / (rn * vals(i));
    m += proj(i) * proj(i) * lambda / vals(i);
  }
  m /= 2.0 * static_cast<double>(n);
  return make_objective(make_spectrum(vals, Matrix::Identity(n, n)), std::move(opt), m);
}

inline QuadraticObjective from_kernel(const Matrix& K, const Vector& y, double lambda) {
  const double n = static_cast<double>(K.rows());
  return from_kernel(eig_sym(K / n), y, lambda);
}

}  // namespace lrbias
