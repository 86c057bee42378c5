#pragma once

// Closed-form two-dimensional instance: T̂ = diag(σ₁, σ₂), T̃ = I₂, both optima
// at the origin, θ₀ = (ι, ι).

#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>

#include "lrbias/regime_analysis.hpp"

namespace lrbias {

class ToyInstance {
 public:
  ToyInstance(double sigma1, double sigma2, double iota = 1.0) : s1_(sigma1), s2_(sigma2), iota_(iota) {
    require(sigma1 > sigma2 && sigma2 > 0.0, ErrorCode::InvalidArgument, "toy instance needs sigma1 > sigma2 > 0");
    require(iota != 0.0, ErrorCode::ZeroInitialization, "toy instance needs iota != 0");
  }

  double sigma1() const noexcept { return s1_; }
  double sigma2() const noexcept { return s2_; }
  double iota() const noexcept { return iota_; }
  double kappa_F() const noexcept { return s1_ / s2_; }
  static constexpr double kappa_R() noexcept { return 1.0; }

  Spectrum spectrum() const { return diagonal_spectrum(Vector{{s1_, s2_}}); }
  Vector theta0() const { return Vector{{iota_, iota_}}; }

  ProblemPair to_pair() const {
    return make_pair(make_objective(spectrum(), Vector::Zero(2), 0.0),
                     make_objective(diagonal_spectrum(Vector::Ones(2)), Vector::Zero(2), 0.0));
  }

  /// ½(σ₁x² + σ₂y²)
  double train_loss(double x, double y) const { return 0.5 * (s1_ * x * x + s2_ * y * y); }
  /// ½(x² + y²)
  double test_loss(double x, double y) const { return 0.5 * (x * x + y * y); }

 private:
  double s1_;
  double s2_;
  double iota_;
};

/// ((1−ησ₁)^t ι, (1−ησ₂)^t ι)
inline std::pair<double, double> trajectory(const ToyInstance& inst, double eta, std::int64_t t) {
  require(t >= 0, ErrorCode::InvalidArgument, "step count must be nonnegative");
  return {signed_power(1.0 - eta * inst.sigma1(), t) * inst.iota(),
          signed_power(1.0 - eta * inst.sigma2(), t) * inst.iota()};
}

struct ToyThresholds {
  RegimeKind regime = RegimeKind::Small;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  bool feasible = false;  // t2 > t1
};

/// Thresholds of the two-dimensional argument.
///
/// Small: t1 = ½log(2σ₁/σ₂)/log(A₂/A₁) gives ε_s² ≤ σ₂/(2σ₁).
/// Big:   t1 = ½log(1/2)/log(A₂/A₁)   gives ε_b² ≤ 1/2.
/// Window, with (σ, A) = (σ₂, A₂) for Small and (σ₁, A₁) for Big:
///   t2 = ½log(α/(σ|ι|))/log A,  t3 = ½log((4/3)α/(σ|ι|))/log A.
/// Here A_i = |1 − ησ_i|; t1 = 1 when the faster direction is cancelled exactly.
inline ToyThresholds thresholds(const ToyInstance& inst, double eta, double alpha, RegimeKind regime) {
  const RateRegime r = classify_rate(eta, inst.spectrum());
  require(r.usable() && r.kind == regime, ErrorCode::InvalidRegime,
          std::string("step size is not in the requested regime (classified as ") + to_string(r.kind) + ")");
  require(alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
  const double a1 = attenuation(eta, inst.sigma1());
  const double a2 = attenuation(eta, inst.sigma2());
  const double ai = std::abs(inst.iota());
  ToyThresholds th;
  th.regime = regime;
  if (regime == RegimeKind::Small) {
    th.t1 = a1 == 0.0 ? 1.0 : 0.5 * std::log(2.0 * inst.sigma1() / inst.sigma2()) / std::log(a2 / a1);
    const double la = std::log(a2);
    th.t2 = 0.5 * std::log(alpha / (inst.sigma2() * ai)) / la;
    th.t3 = 0.5 * std::log(4.0 / 3.0 * alpha / (inst.sigma2() * ai)) / la;
  } else {
    th.t1 = a2 == 0.0 ? 1.0 : 0.5 * std::log(0.5) / std::log(a2 / a1);
    const double la = std::log(a1);
    th.t2 = 0.5 * std::log(alpha / (inst.sigma1() * ai)) / la;
    th.t3 = 0.5 * std::log(4.0 / 3.0 * alpha / (inst.sigma1() * ai)) / la;
  }
  th.feasible = th.t2 > th.t1;
  return th;
}

struct ToyRatio {
  double ratio = 0.0;             // R(θ_s)/R(θ_b)
  double normalized_ratio = 0.0;  // (R_s/F_s)/(R_b/F_b), removes where each run lands in the level set
  double kappa = 0.0;
  bool passes = false;            // ratio ≥ σ₁/σ₂
  bool nine_eighths = false;      // ratio ≥ (9/8)σ₁/σ₂, reported only
  double R_s = 0.0, R_b = 0.0, F_s = 0.0, F_b = 0.0;
  std::int64_t t_s = 0, t_b = 0;
  double epsilon_s2 = 0.0, epsilon_b2 = 0.0;
  ToyThresholds small, big;
};

/// Runs both rates to the α level set and compares population losses.
/// Throws InfeasibleWindow when either threshold window is ill-posed or a run
/// fails to reach the level set within t_max steps.
inline ToyRatio ratio_check(const ToyInstance& inst, double eta_s, double eta_b, double alpha, std::int64_t t_max) {
  ToyRatio out;
  out.kappa = inst.kappa_F();
  out.small = thresholds(inst, eta_s, alpha, RegimeKind::Small);
  out.big = thresholds(inst, eta_b, alpha, RegimeKind::Big);
  require(out.small.feasible && out.big.feasible, ErrorCode::InfeasibleWindow,
          "alpha is too large for the step windows (t2 <= t1)");
  const ProblemPair pair = inst.to_pair();
  const GDRun rs = run_to_level_set(pair.train, inst.theta0(), eta_s, alpha, t_max);
  const GDRun rb = run_to_level_set(pair.train, inst.theta0(), eta_b, alpha, t_max);
  require(rs.stop_status == StopStatus::HitLevelSet && rb.stop_status == StopStatus::HitLevelSet,
          ErrorCode::InfeasibleWindow, "a run did not reach the level set");
  out.t_s = rs.steps;
  out.t_b = rb.steps;
  out.R_s = inst.test_loss(rs.mu(0), rs.mu(1));
  out.R_b = inst.test_loss(rb.mu(0), rb.mu(1));
  out.F_s = rs.final_excess;
  out.F_b = rb.final_excess;
  out.epsilon_s2 = (rs.mu(0) / rs.mu(1)) * (rs.mu(0) / rs.mu(1));
  out.epsilon_b2 = (rb.mu(1) / rb.mu(0)) * (rb.mu(1) / rb.mu(0));
  out.ratio = out.R_s / out.R_b;
  out.normalized_ratio = (out.R_s / out.F_s) / (out.R_b / out.F_b);
  out.passes = out.ratio >= out.kappa;
  out.nine_eighths = out.ratio >= 9.0 / 8.0 * out.kappa;
  return out;
}

struct ToyAlphaChoice {
  double alpha = 0.0;
  std::int64_t t_s = 0;  // small-rate stopping step; the small run lands exactly on α
};

/// Level set chosen from the small-rate trajectory: α = F(θ_{η_s, T}) at the
/// first T such that, for both rates, ε² ≤ `epsilon2` at the stopping step
/// and the threshold windows are well posed. Stopping the small run exactly
/// on the level set makes the comparison independent of rounding of t_s.
inline ToyAlphaChoice suitable_alpha(const ToyInstance& inst, double eta_s, double eta_b, double epsilon2 = 1e-6,
                                     std::int64_t t_limit = 1'000'000) {
  const Spectrum spec = inst.spectrum();
  const Vector iota = inst.theta0();
  CoordinateIterator small(spec.values, iota, eta_s);
  for (std::int64_t T = 1; T <= t_limit; ++T) {
    small.advance();
    const Vector ms = small.mu();
    const double alpha = small.excess();
    if (!(alpha > 0.0)) break;
    if ((ms(0) / ms(1)) * (ms(0) / ms(1)) > epsilon2) continue;
    const ToyThresholds ts = thresholds(inst, eta_s, alpha, RegimeKind::Small);
    const ToyThresholds tb = thresholds(inst, eta_b, alpha, RegimeKind::Big);
    if (!ts.feasible || !tb.feasible) continue;
    // Big-rate stopping point: first t with F ≤ α, iterated exactly as a level-set run.
    CoordinateIterator big(spec.values, iota, eta_b);
    std::int64_t t = 0;
    while (big.excess() > alpha && t < t_limit) {
      big.advance();
      ++t;
    }
    const Vector mb = big.mu();
    if ((mb(1) / mb(0)) * (mb(1) / mb(0)) > epsilon2) continue;
    return {alpha, T};
  }
  throw Error(ErrorCode::InfeasibleWindow, "no level set satisfies the accuracy requirements");
}

}  // namespace lrbias
