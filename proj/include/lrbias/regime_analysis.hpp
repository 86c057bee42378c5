#pragma once

// Learning-rate regimes, attenuation coefficients, ε ratios, the α₁ bound,
// the step windows of the big/small-rate lemmas and the certificate comparing
// the two early-stopped estimators.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lrbias/gd_engine.hpp"

namespace lrbias {

enum class RegimeKind { Small, Big, Divergent, Boundary };

inline const char* to_string(RegimeKind k) noexcept {
  switch (k) {
    case RegimeKind::Small: return "Small";
    case RegimeKind::Big: return "Big";
    case RegimeKind::Divergent: return "Divergent";
    case RegimeKind::Boundary: return "Boundary";
  }
  return "Unknown";
}

struct RateRegime {
  RegimeKind kind = RegimeKind::Boundary;
  double eta = 0.0;
  double small_threshold = 0.0;  // 2/(σ₁+σₙ)
  double big_threshold = 0.0;    // 2/σ₁

  bool usable() const noexcept { return kind == RegimeKind::Small || kind == RegimeKind::Big; }
};

/// |1 − ησ|
inline double attenuation(double eta, double sigma) { return std::abs(1.0 - eta * sigma); }

inline RateRegime classify_rate(double eta, const Spectrum& s) {
  require(eta > 0.0, ErrorCode::InvalidArgument, "step size must be positive");
  RateRegime r;
  r.eta = eta;
  r.small_threshold = 2.0 / (s.largest() + s.smallest());
  r.big_threshold = 2.0 / s.largest();
  auto near = [&](double th) { return std::abs(eta - th) <= 1e-12 * th; };
  if (near(r.small_threshold) || near(r.big_threshold))
    r.kind = RegimeKind::Boundary;
  else if (eta < r.small_threshold)
    r.kind = RegimeKind::Small;
  else if (eta < r.big_threshold)
    r.kind = RegimeKind::Big;
  else
    r.kind = RegimeKind::Divergent;
  return r;
}

namespace detail {

inline void require_usable(const RateRegime& r, ErrorCode code) {
  require(r.usable(), code, std::string("regime must be Small or Big, got ") + to_string(r.kind));
}

}  // namespace detail

/// Attenuation of the direction that survives longest: σₙ for Small, σ₁ for Big.
inline double leading_attenuation(double eta, const Spectrum& s, const RateRegime& r) {
  detail::require_usable(r, ErrorCode::WrongRegime);
  return r.kind == RegimeKind::Small ? attenuation(eta, s.smallest()) : attenuation(eta, s.largest());
}

/// Largest attenuation among the remaining directions.
///
/// Big: max(|1−ησ₂|, |1−ησₙ|). Small: max over i < n of |1−ησ_i|, which is
/// max(|1−ησ₁|, |1−ησ_{n−1}|); it reduces to |1−ησ_{n−1}| whenever
/// η ≤ 2/(σ₁+σ_{n−1}) and remains a valid bound above that.
inline double second_attenuation(double eta, const Spectrum& s, const RateRegime& r) {
  detail::require_usable(r, ErrorCode::WrongRegime);
  const Index n = s.dim();
  require(n >= 2, ErrorCode::InvalidArgument, "second attenuation needs at least two eigenvalues");
  if (r.kind == RegimeKind::Big) return std::max(attenuation(eta, s.values(1)), attenuation(eta, s.values(n - 1)));
  return std::max(attenuation(eta, s.values(0)), attenuation(eta, s.values(n - 2)));
}

/// Index of the distinguished direction: 0 for Big, n−1 for Small.
inline Index leading_index(const RateRegime& r, Index n) {
  detail::require_usable(r, ErrorCode::InvalidRegime);
  return r.kind == RegimeKind::Big ? 0 : n - 1;
}

/// ε² = Σ_{i≠d} μ_i² / μ_d², d = 1 for Big, n for Small.
inline double epsilon_ratio(const Vector& mu, const RateRegime& r) {
  const Index d = leading_index(r, mu.size());
  require(std::abs(mu(d)) >= 1e-300, ErrorCode::ZeroDenominator, "leading coefficient underflows");
  double s = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    if (i == d) continue;
    const double q = mu(i) / mu(d);
    s += q * q;
  }
  return s;
}

inline double epsilon_ratio(const GDRun& run, const RateRegime& r) { return epsilon_ratio(run.mu, r); }

struct AlphaOne {
  double value = 0.0;
  double log_value = 0.0;  // log α₁, usable when α₁ underflows
  double numerator = 0.0;
  double denominator = 0.0;
  double small_denominator = 0.0;  // log(Aₙ/Ā_s)
  double big_denominator = 0.0;    // log(A₁/Ā_b)
  /// Alternative reading: minimum of the two per-regime bounds in which each
  /// log contains only its own regime's terms.
  double split_value = 0.0;
  double split_log_value = 0.0;
};

/// The upper bound α₁ on the target accuracy,
///   α₁ = ½σₙιₙ² exp(−N/D),
///   N  = log[‖ι‖² max{16nκ_R, 4κ_F} max{1/ι₁², 1/ιₙ²} + 1/(1−η_sσₙ) + 1/(η_bσ₁−1)],
///   D  = min{log(Aₙ/Ā_s), log(A₁/Ā_b)},
/// with all attenuations taken in absolute value.
inline AlphaOne alpha_one(const Spectrum& s, const Vector& iota, double eta_s, double eta_b, double kappa_R) {
  const Index n = s.dim();
  require(iota.size() == n, ErrorCode::DimensionMismatch, "iota size differs from spectrum size");
  require(n >= 2, ErrorCode::InvalidArgument, "alpha_one needs at least two eigenvalues");
  const RateRegime rs = classify_rate(eta_s, s);
  const RateRegime rb = classify_rate(eta_b, s);
  require(rs.kind == RegimeKind::Small && rb.kind == RegimeKind::Big, ErrorCode::InvalidRegime,
          "alpha_one needs a Small eta_s and a Big eta_b");
  const double i1 = iota(0);
  const double in = iota(n - 1);
  require(i1 != 0.0 && in != 0.0, ErrorCode::ZeroInitialization, "iota_1 and iota_n must be nonzero");

  const double s1 = s.largest();
  const double sn = s.smallest();
  const double kF = s1 / sn;
  const double norm2 = iota.squaredNorm();
  const double an = attenuation(eta_s, sn);
  const double abar_s = second_attenuation(eta_s, s, rs);
  const double a1 = attenuation(eta_b, s1);
  const double abar_b = second_attenuation(eta_b, s, rb);
  const double inv_s = 1.0 / (1.0 - eta_s * sn);
  const double inv_b = 1.0 / (eta_b * s1 - 1.0);
  const double nd = static_cast<double>(n);

  AlphaOne out;
  out.small_denominator = std::log(an / abar_s);
  out.big_denominator = std::log(a1 / abar_b);
  out.denominator = std::min(out.small_denominator, out.big_denominator);
  const double kmax = std::max(16.0 * nd * kappa_R, 4.0 * kF);
  out.numerator = std::log(norm2 * kmax * std::max(1.0 / (i1 * i1), 1.0 / (in * in)) + inv_s + inv_b);
  out.log_value = std::log(0.5 * sn * in * in) - out.numerator / out.denominator;
  out.value = std::exp(out.log_value);

  const double big_log = std::log(0.5 * s1 * i1 * i1) -
                         std::log(norm2 / (i1 * i1) * 4.0 * nd * kappa_R + inv_b) / out.big_denominator;
  const double small_log = std::log(0.5 * sn * in * in) -
                           std::log(norm2 / (in * in) * kmax + inv_s) / out.small_denominator;
  out.split_log_value = std::min(big_log, small_log);
  out.split_value = std::exp(out.split_log_value);
  return out;
}

struct StepWindow {
  RegimeKind regime = RegimeKind::Small;
  double t1 = 0.0;  // ε bound holds for t ≥ t1
  double t2 = 0.0;  // ½σ_dμ_d² ≤ α needs t ≥ t2
  double t3 = 0.0;  // excess ≥ α/2 needs t ≤ t3
  bool well_posed = false;  // t2 > t1
  /// Some integer lies in [t2, t3].
  bool feasible = false;
  /// The ε target used for t1 (δ²).
  double epsilon2_target = 0.0;

  bool contains(double t) const { return t >= t1 && t >= t2 && t <= t3; }
};

/// Thresholds of the big/small-rate lemmas.
///
/// Big:   t1 = ½log(‖ι‖²·4nκ_R/ι₁²)/log(A₁/Ā_b),  t2,3 = ½log(c·σ₁ι₁²/α)/log(1/A₁), c = ½, 5/4.
/// Small: t1 = ½log(‖ι‖²·max{16nκ_R,4κ_F}/ιₙ²)/log(Aₙ/Ā_s), t2,3 as above with σₙ, ιₙ, Aₙ.
inline StepWindow step_window(const Spectrum& s, const Vector& iota, double eta, double alpha, double kappa_R,
                              const RateRegime& regime) {
  detail::require_usable(regime, ErrorCode::InvalidRegime);
  require(alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(iota.size() == s.dim(), ErrorCode::DimensionMismatch, "iota size differs from spectrum size");
  const Index n = s.dim();
  const Index d = leading_index(regime, n);
  const double id = iota(d);
  require(id != 0.0, ErrorCode::ZeroInitialization, "iota on the leading direction is zero");
  const double nd = static_cast<double>(n);
  const double sd = s.values(d);
  const double lead = leading_attenuation(eta, s, regime);
  const double second = second_attenuation(eta, s, regime);

  StepWindow w;
  w.regime = regime.kind;
  const double factor = regime.kind == RegimeKind::Big
                            ? 4.0 * nd * kappa_R
                            : std::max(16.0 * nd * kappa_R, 4.0 * condition_number(s));
  w.epsilon2_target = 1.0 / factor;
  w.t1 = 0.5 * std::log(iota.squaredNorm() * factor / (id * id)) / std::log(lead / second);
  const double decay = std::log(1.0 / lead);
  w.t2 = 0.5 * std::log(0.5 * sd * id * id / alpha) / decay;
  w.t3 = 0.5 * std::log(1.25 * sd * id * id / alpha) / decay;
  w.well_posed = w.t2 > w.t1;
  w.feasible = std::ceil(w.t2) <= std::floor(w.t3);
  return w;
}

struct ComplexityBounds {
  double small_denominator = 0.0;  // log(Aₙ/Ā_s)
  double big_denominator = 0.0;    // log(A₁/Ā_b)
};

/// Denominators of the t1 thresholds; the step counts scale like their inverse.
inline ComplexityBounds complexity_bounds(const Spectrum& s, double eta_s, double eta_b) {
  const RateRegime rs = classify_rate(eta_s, s);
  const RateRegime rb = classify_rate(eta_b, s);
  require(rs.kind == RegimeKind::Small && rb.kind == RegimeKind::Big, ErrorCode::InvalidRegime,
          "complexity bounds need a Small eta_s and a Big eta_b");
  return {std::log(attenuation(eta_s, s.smallest()) / second_attenuation(eta_s, s, rs)),
          std::log(attenuation(eta_b, s.largest()) / second_attenuation(eta_b, s, rb))};
}

struct Verdict {
  std::string name;
  bool holds = false;
  std::vector<std::pair<std::string, double>> values;
};

struct AssumptionReport {
  Verdict distinct;      // distinct, positive eigenvalues for both operators
  Verdict rates;         // η_s Small, η_b Big
  Verdict init;          // ι₁ ≠ 0, ιₙ ≠ 0
  Verdict alpha_bound;   // α ≤ α₁
  Verdict model_error;   // (σ₁/ς₁)R(θ̂*)/α ≤ min{1/4, κ_F/(72κ_R)}
  double alpha_1 = 0.0;
  double alpha_1_log = -std::numeric_limits<double>::infinity();

  bool all() const {
    return distinct.holds && rates.holds && init.holds && alpha_bound.holds && model_error.holds;
  }
  std::vector<const Verdict*> list() const { return {&distinct, &rates, &init, &alpha_bound, &model_error}; }
  /// Name of the first failing assumption, empty when all hold.
  std::string first_failure() const {
    for (const Verdict* v : list())
      if (!v->holds) return v->name;
    return {};
  }
};

/// Evaluates every assumption of the main comparison result. Never throws for
/// well-formed inputs; failures are reported as verdicts.
inline AssumptionReport check_assumptions(const ProblemPair& pair, const Vector& theta0, double eta_s, double eta_b,
                                          double alpha) {
  AssumptionReport rep;
  const Spectrum& sf = pair.train.spectrum;
  const Spectrum& sr = pair.test.spectrum;
  const Index n = pair.dim();

  rep.distinct.name = "A1_distinct_eigenvalues";
  rep.distinct.holds = !sf.degenerate && !sr.degenerate && sf.positive() && sr.positive();
  rep.distinct.values = {{"sigma_1", sf.largest()}, {"sigma_n", sf.smallest()},
                         {"varsigma_1", sr.largest()}, {"varsigma_n", sr.smallest()}};

  rep.rates.name = "A2_learning_rates";
  const RateRegime rs = classify_rate(eta_s, sf);
  const RateRegime rb = classify_rate(eta_b, sf);
  rep.rates.holds = rs.kind == RegimeKind::Small && rb.kind == RegimeKind::Big;
  rep.rates.values = {{"eta_s", eta_s}, {"eta_b", eta_b}, {"small_threshold", rs.small_threshold},
                      {"big_threshold", rs.big_threshold}};

  const Vector iota = decompose(pair.train, theta0);
  rep.init.name = "A3_initialization";
  rep.init.holds = iota(0) != 0.0 && iota(n - 1) != 0.0;
  rep.init.values = {{"iota_1", iota(0)}, {"iota_n", iota(n - 1)}};

  const double kF = pair.kappa_F();
  const double kR = pair.kappa_R();
  rep.alpha_bound.name = "A4_alpha_upper_bound";
  if (rep.rates.holds && rep.init.holds && n >= 2) {
    const AlphaOne a1 = alpha_one(sf, iota, eta_s, eta_b, kR);
    rep.alpha_1 = a1.value;
    rep.alpha_1_log = a1.log_value;
    rep.alpha_bound.holds = std::log(alpha) <= a1.log_value;
    rep.alpha_bound.values = {{"alpha", alpha}, {"alpha_1", a1.value}, {"log_alpha_1", a1.log_value}};
  } else {
    rep.alpha_bound.holds = false;
    rep.alpha_bound.values = {{"alpha", alpha}};
  }

  rep.model_error.name = "A4_model_error";
  const double ratio = sf.largest() / sr.largest() * pair.model_error() / alpha;
  const double limit = std::min(0.25, kF / (72.0 * kR));
  rep.model_error.holds = ratio <= limit;
  rep.model_error.values = {{"scaled_model_error_ratio", ratio}, {"limit", limit}, {"R_opt", pair.model_error()}};
  return rep;
}

enum class CertificateFailure { None, ModelErrorTooLarge, BoundViolated };

inline const char* to_string(CertificateFailure f) noexcept {
  switch (f) {
    case CertificateFailure::None: return "None";
    case CertificateFailure::ModelErrorTooLarge: return "ModelErrorTooLarge";
    case CertificateFailure::BoundViolated: return "BoundViolated";
  }
  return "Unknown";
}

struct Certificate {
  double alpha = 0.0;
  double eta_s = 0.0;
  double eta_b = 0.0;
  std::int64_t t_s = 0;
  std::int64_t t_b = 0;
  double epsilon_b2 = 0.0;
  double epsilon_s2 = 0.0;
  double kappa_F = 0.0;
  double kappa_R = 0.0;
  double sigma_1 = 0.0, sigma_n = 0.0, varsigma_1 = 0.0, varsigma_n = 0.0;
  AlphaOne alpha_1;
  double R_opt = 0.0;
  double c_alpha = 0.0;  // +∞ when the denominator is not positive
  StepWindow window_s;
  StepWindow window_b;
  double R_s = 0.0;  // measured R(θ_s)
  double R_b = 0.0;  // measured R(θ_b)
  double R_b_upper = 0.0;  // 5ας₁/σ₁ + 2R(θ̂*)
  double R_s_lower = 0.0;  // (3/10)α(ςₙ/σₙ)(1 − √(18R(θ̂*)σₙ/(ςₙα)))
  double bound_general = 0.0;  // 17(κ_R/κ_F)c_α R(θ_s)
  double bound_rhs = 0.0;      // 34(κ_R/κ_F) R(θ_s)
  double mu_1_energy = 0.0;    // ½σ₁μ₁² of the big-rate run
  double mu_n_energy = 0.0;    // ½σₙμₙ² of the small-rate run

  AssumptionReport assumptions;
  bool big_epsilon_ok = false;     // ε_b² ≤ 1/(4nκ_R)
  bool small_epsilon_ok = false;   // ε_s² ≤ min{1/(16nκ_R), 1/(4κ_F)}
  bool big_energy_ok = false;      // (2/5)α ≤ ½σ₁μ₁² ≤ α
  bool small_energy_ok = false;    // (2/5)α ≤ ½σₙμₙ² ≤ α
  bool runs_in_windows = false;
  bool half_conditions = false;
  bool R_b_upper_ok = false;
  bool R_s_lower_ok = false;
  bool general_bound_holds = false;
  bool final_verdict = false;
  CertificateFailure failure = CertificateFailure::None;

  bool lemma_conclusions() const { return big_epsilon_ok && small_epsilon_ok && big_energy_ok && small_energy_ok; }

  /// Flat key/value record.
  std::vector<std::pair<std::string, double>> flatten() const {
    auto b = [](bool v) { return v ? 1.0 : 0.0; };
    return {{"alpha", alpha},
            {"eta_s", eta_s},
            {"eta_b", eta_b},
            {"t_s", static_cast<double>(t_s)},
            {"t_b", static_cast<double>(t_b)},
            {"epsilon_b2", epsilon_b2},
            {"epsilon_s2", epsilon_s2},
            {"kappa_F", kappa_F},
            {"kappa_R", kappa_R},
            {"alpha_1", alpha_1.value},
            {"log_alpha_1", alpha_1.log_value},
            {"alpha_1_split", alpha_1.split_value},
            {"R_opt", R_opt},
            {"c_alpha", c_alpha},
            {"small_t1", window_s.t1},
            {"small_t2", window_s.t2},
            {"small_t3", window_s.t3},
            {"big_t1", window_b.t1},
            {"big_t2", window_b.t2},
            {"big_t3", window_b.t3},
            {"R_s", R_s},
            {"R_b", R_b},
            {"R_b_upper", R_b_upper},
            {"R_s_lower", R_s_lower},
            {"bound_general", bound_general},
            {"bound_rhs", bound_rhs},
            {"assumptions_hold", b(assumptions.all())},
            {"lemma_conclusions", b(lemma_conclusions())},
            {"runs_in_windows", b(runs_in_windows)},
            {"final_verdict", b(final_verdict)}};
  }
};

/// Compares an early-stopped small-rate run with an early-stopped big-rate run
/// started from the same point, stopped on the same level set α.
///
/// The final verdict is the measured inequality R(θ_b) ≤ 34(κ_R/κ_F)R(θ_s),
/// forced to false when c_α is infinite (model error too large).
inline Certificate certify(const ProblemPair& pair, const GDRun& run_s, const GDRun& run_b, double alpha) {
  const Spectrum& sf = pair.train.spectrum;
  const Spectrum& sr = pair.test.spectrum;
  const Index n = pair.dim();
  require(!sf.degenerate && !sr.degenerate, ErrorCode::DegenerateSpectrum,
          "certificates need distinct eigenvalues");
  const RateRegime rs = classify_rate(run_s.eta, sf);
  const RateRegime rb = classify_rate(run_b.eta, sf);
  require(rs.kind == RegimeKind::Small && rb.kind == RegimeKind::Big, ErrorCode::RegimeMismatch,
          "run_s must use a Small rate and run_b a Big rate");
  require(run_s.stop_status == StopStatus::HitLevelSet && run_b.stop_status == StopStatus::HitLevelSet &&
              run_s.alpha == alpha && run_b.alpha == alpha,
          ErrorCode::LevelSetMismatch, "both runs must have hit the same level set alpha");
  require(run_s.iota.size() == n && run_b.iota.size() == n, ErrorCode::DimensionMismatch, "run dimension mismatch");

  Certificate c;
  c.alpha = alpha;
  c.eta_s = run_s.eta;
  c.eta_b = run_b.eta;
  c.t_s = run_s.steps;
  c.t_b = run_b.steps;
  c.sigma_1 = sf.largest();
  c.sigma_n = sf.smallest();
  c.varsigma_1 = sr.largest();
  c.varsigma_n = sr.smallest();
  c.kappa_F = c.sigma_1 / c.sigma_n;
  c.kappa_R = c.varsigma_1 / c.varsigma_n;
  c.epsilon_b2 = epsilon_ratio(run_b, rb);
  c.epsilon_s2 = epsilon_ratio(run_s, rs);
  c.R_opt = pair.model_error();
  const Vector theta0 = recompose(pair.train, run_s.iota);
  c.assumptions = check_assumptions(pair, theta0, run_s.eta, run_b.eta, alpha);
  c.alpha_1 = alpha_one(sf, run_s.iota, run_s.eta, run_b.eta, c.kappa_R);
  c.window_s = step_window(sf, run_s.iota, run_s.eta, alpha, c.kappa_R, rs);
  c.window_b = step_window(sf, run_b.iota, run_b.eta, alpha, c.kappa_R, rb);

  c.R_s = pair.test_excess_from_train_coords(run_s.mu);
  c.R_b = pair.test_excess_from_train_coords(run_b.mu);

  const double x1 = c.sigma_1 / c.varsigma_1 * c.R_opt / alpha;
  const double xn = c.sigma_n / c.varsigma_n * c.R_opt / alpha;
  const double den = 1.0 - std::sqrt(18.0 * xn);
  c.c_alpha = den > 0.0 ? (1.0 + 2.0 * x1) / den : std::numeric_limits<double>::infinity();
  c.R_b_upper = 5.0 * alpha * c.varsigma_1 / c.sigma_1 + 2.0 * c.R_opt;
  c.R_s_lower = 0.3 * alpha * (c.varsigma_n / c.sigma_n) * den;
  const double kr = c.kappa_R / c.kappa_F;
  c.bound_general = 17.0 * kr * c.c_alpha * c.R_s;
  c.bound_rhs = 34.0 * kr * c.R_s;

  c.mu_1_energy = 0.5 * c.sigma_1 * run_b.mu(0) * run_b.mu(0);
  c.mu_n_energy = 0.5 * c.sigma_n * run_s.mu(n - 1) * run_s.mu(n - 1);
  const double nd = static_cast<double>(n);
  c.big_epsilon_ok = c.epsilon_b2 <= 1.0 / (4.0 * nd * c.kappa_R);
  c.small_epsilon_ok = c.epsilon_s2 <= std::min(1.0 / (16.0 * nd * c.kappa_R), 1.0 / (4.0 * c.kappa_F));
  c.big_energy_ok = 0.4 * alpha <= c.mu_1_energy && c.mu_1_energy <= alpha;
  c.small_energy_ok = 0.4 * alpha <= c.mu_n_energy && c.mu_n_energy <= alpha;
  c.runs_in_windows = c.window_s.contains(static_cast<double>(c.t_s)) && c.window_b.contains(static_cast<double>(c.t_b));
  c.half_conditions = run_s.half_condition_met && run_b.half_condition_met;
  c.R_b_upper_ok = c.R_b <= c.R_b_upper;
  c.R_s_lower_ok = c.R_s >= c.R_s_lower;
  c.general_bound_holds = c.R_b <= c.bound_general;

  if (!std::isfinite(c.c_alpha)) {
    c.final_verdict = false;
    c.failure = CertificateFailure::ModelErrorTooLarge;
  } else if (c.R_b <= c.bound_rhs) {
    c.final_verdict = true;
  } else {
    c.failure = CertificateFailure::BoundViolated;
  }
  return c;
}

}  // namespace lrbias
