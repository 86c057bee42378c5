#pragma once

// Gradient descent on a quadratic objective: iterative steps, closed form and
// level-set early stopping.

#include <cmath>
#include <cstdint>
#include <vector>

#include "lrbias/quadratic_model.hpp"

namespace lrbias {

enum class StopStatus { HitLevelSet, MaxStepsExceeded, Diverged };

inline const char* to_string(StopStatus s) noexcept {
  switch (s) {
    case StopStatus::HitLevelSet: return "HitLevelSet";
    case StopStatus::MaxStepsExceeded: return "MaxStepsExceeded";
    case StopStatus::Diverged: return "Diverged";
  }
  return "Unknown";
}

struct GDRun {
  double eta = 0.0;
  std::int64_t steps = 0;
  Vector iota;  // initial coefficients ⟨θ0 − θ̂*, e_i⟩
  Vector mu;    // coefficients after `steps` steps
  Vector theta;
  /// Excess train loss; entry k is the value after k * trace_stride steps
  /// (the last entry is always the final step).
  std::vector<double> loss_trace;
  std::int64_t trace_stride = 1;
  StopStatus stop_status = StopStatus::MaxStepsExceeded;
  /// Level-set target; 0 for plain closed-form runs.
  double alpha = 0.0;
  double final_excess = 0.0;
  /// Excess loss ≥ α/2 at the stopping point.
  bool half_condition_met = false;
};

/// θ − η T(θ − θ̂*).
inline Vector step(const QuadraticObjective& obj, const Vector& theta, double eta) {
  require(eta > 0.0, ErrorCode::InvalidArgument, "step size must be positive");
  return theta - eta * obj.grad(theta);
}

/// μ_i = ⟨θ − θ̂*, e_i⟩.
inline Vector decompose(const QuadraticObjective& obj, const Vector& theta) { return obj.coords(theta); }

/// θ̂* + Σ μ_i e_i.
inline Vector recompose(const QuadraticObjective& obj, const Vector& mu) {
  return obj.optimum + obj.spectrum.vectors * mu;
}

/// (1 − ησ)^t with the sign of the base kept for odd t.
inline double signed_power(double base, std::int64_t t) {
  if (t == 0) return 1.0;
  const double mag = std::pow(std::abs(base), static_cast<double>(t));
  return (base < 0.0 && (t % 2) != 0) ? -mag : mag;
}

namespace detail {

inline std::int64_t default_stride(std::int64_t t_max) {
  constexpr std::int64_t kFull = 1'000'000;
  return t_max > kFull ? (t_max + kFull - 1) / kFull : 1;
}

}  // namespace detail

/// Exact iterate after t steps: μ_i = ι_i (1 − ησ_i)^t. The loss trace is also
/// evaluated in closed form.
inline GDRun closed_form(const QuadraticObjective& obj, const Vector& theta0, double eta, std::int64_t t) {
  require(t >= 0, ErrorCode::InvalidArgument, "step count must be nonnegative");
  GDRun run;
  run.eta = eta;
  run.steps = t;
  run.iota = decompose(obj, theta0);
  run.trace_stride = detail::default_stride(t);
  const Vector base = (1.0 - eta * obj.spectrum.values.array()).matrix();
  auto at = [&](std::int64_t s) {
    Vector mu(base.size());
    for (Index i = 0; i < base.size(); ++i) mu(i) = run.iota(i) * signed_power(base(i), s);
    return mu;
  };
  for (std::int64_t s = 0; s < t; s += run.trace_stride) run.loss_trace.push_back(obj.excess_from_coords(at(s)));
  run.mu = at(t);
  run.final_excess = obj.excess_from_coords(run.mu);
  run.loss_trace.push_back(run.final_excess);
  run.theta = recompose(obj, run.mu);
  run.stop_status = StopStatus::MaxStepsExceeded;
  return run;
}

/// Iterates the eigen-coordinates μ ← (1 − ησ)∘μ. Shared by every consumer
/// that must reproduce a level-set run bit for bit.
class CoordinateIterator {
 public:
  CoordinateIterator(const Vector& sigma, const Vector& iota, double eta)
      : sig_(sigma.array()), base_(1.0 - eta * sigma.array()), mu_(iota.array()) {}

  void advance() { mu_ *= base_; }
  double excess() const { return 0.5 * (sig_ * mu_.square()).sum(); }
  Vector mu() const { return mu_.matrix(); }

 private:
  Eigen::ArrayXd sig_;
  Eigen::ArrayXd base_;
  Eigen::ArrayXd mu_;
};

struct LevelSetOptions {
  /// Multiple of the initial excess loss beyond which the run is declared divergent.
  double divergence_factor = 1e12;
  /// 0 selects the default: every step, or a stride keeping at most 10⁶ entries.
  std::int64_t trace_stride = 0;
};

/// Runs GD until the excess train loss F − m̂ drops to α or below.
///
/// The iteration is carried out on the eigen-coordinates (μ ← (1 − ησ)∘μ), which
/// is algebraically identical to `step` but keeps full relative accuracy for
/// very small excess losses. Throws AlreadyBelowLevelSet if the initial excess
/// loss is already ≤ α.
inline GDRun run_to_level_set(const QuadraticObjective& obj, const Vector& theta0, double eta, double alpha,
                              std::int64_t t_max, const LevelSetOptions& opts = {}) {
  require(alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(eta > 0.0, ErrorCode::InvalidArgument, "step size must be positive");
  require(t_max >= 1, ErrorCode::InvalidArgument, "t_max must be at least 1");
  GDRun run;
  run.eta = eta;
  run.alpha = alpha;
  run.iota = decompose(obj, theta0);
  const double initial = obj.excess_from_coords(run.iota);
  require(initial > alpha, ErrorCode::AlreadyBelowLevelSet, "initial excess loss is already within the level set");
  run.trace_stride = opts.trace_stride > 0 ? opts.trace_stride : detail::default_stride(t_max);

  CoordinateIterator it(obj.spectrum.values, run.iota, eta);
  const double blowup = opts.divergence_factor * initial;
  run.loss_trace.push_back(initial);

  double loss = initial;
  std::int64_t t = 0;
  run.stop_status = StopStatus::MaxStepsExceeded;
  while (t < t_max) {
    it.advance();
    ++t;
    loss = it.excess();
    const bool last = loss <= alpha || loss > blowup || !std::isfinite(loss) || t == t_max;
    if (t % run.trace_stride == 0 || last) run.loss_trace.push_back(loss);
    if (loss <= alpha) {
      run.stop_status = StopStatus::HitLevelSet;
      break;
    }
    if (loss > blowup || !std::isfinite(loss)) {
      run.stop_status = StopStatus::Diverged;
      break;
    }
  }
  run.steps = t;
  run.mu = it.mu();
  run.final_excess = loss;
  run.half_condition_met = run.stop_status == StopStatus::HitLevelSet && loss >= 0.5 * alpha;
  run.theta = recompose(obj, run.mu);
  return run;
}

}  // namespace lrbias
