#pragma once

// Seeded random streams and randomized problem generators.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "lrbias/regime_analysis.hpp"

namespace lrbias {

/// 64-bit FNV-1a, used to derive a stream seed from a stream name.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A random stream identified by (seed, name): each consumer gets its own
/// stream, so adding a consumer never perturbs the draws of the others.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream) : engine_(splitmix64(seed ^ splitmix64(fnv1a(stream)))) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    // 53 random mantissa bits; avoids implementation-defined distributions.
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(engine_() % span);
  }
  double normal() {
    // Box-Muller, deterministic across standard libraries.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  Vector uniform_vector(Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Orthogonal matrix built as a product of plane rotations over every
/// coordinate pair (two passes), with uniformly random angles.
inline Matrix random_orthogonal(Index n, Rng& rng) {
  Matrix q = Matrix::Identity(n, n);
  for (int pass = 0; pass < 2; ++pass) {
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index r = p + 1; r < n; ++r) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double c = std::cos(a);
        const double s = std::sin(a);
        for (Index k = 0; k < n; ++k) {
          const double x = q(k, p);
          const double y = q(k, r);
          q(k, p) = c * x - s * y;
          q(k, r) = s * x + c * y;
        }
      }
    }
  }
  return q;
}

/// Descending spectrum with top eigenvalue `top`, smallest `top/kappa` and
/// the interior values log-uniform in between.
inline Vector random_spectrum(Index n, double kappa, Rng& rng, double top = 1.0) {
  Vector v(n);
  v(0) = top;
  if (n > 1) v(n - 1) = top / kappa;
  for (Index i = 1; i + 1 < n; ++i) v(i) = top * rng.log_uniform(1.0 / kappa, 1.0);
  std::sort(v.data(), v.data() + n, std::greater<double>());
  return v;
}

/// Descending spectrum with top eigenvalue 1 and the others log-uniform in [lo, 1].
inline Vector random_log_spectrum(Index n, double lo, Rng& rng) {
  Vector v(n);
  v(0) = 1.0;
  for (Index i = 1; i < n; ++i) v(i) = rng.log_uniform(lo, 1.0);
  std::sort(v.data(), v.data() + n, std::greater<double>());
  return v;
}

/// Random quadratic objective with a dense operator Q diag(σ) Qᵀ.
inline QuadraticObjective random_objective(const Vector& sigma, const Vector& optimum, double min_value, Rng& rng) {
  const Matrix q = random_orthogonal(sigma.size(), rng);
  return make_objective(make_spectrum(sigma, q), optimum, min_value);
}

struct CertificateInstanceOptions {
  Index n_min = 2;
  Index n_max = 6;
  double spectrum_floor = 1e-3;
  double max_log10_kappa_R = 1.0;
  double iota_floor = 1e-3;
  double min_alpha_1 = 1e-280;
  double max_steps = 2e6;
  int max_alpha_shrinks = 60;
};

struct CertificateInstance {
  ProblemPair pair;
  Vector theta0;
  double eta_s = 0.0;
  double eta_b = 0.0;
  double alpha = 0.0;
  GDRun run_s;
  GDRun run_b;
  AssumptionReport assumptions;
  int draws = 0;  // candidates drawn before acceptance
};

/// Draws randomized problem pairs until one satisfies every assumption and
/// both level-set runs stop inside their step windows with the half-level
/// condition met. The train optimum is at the origin.
inline CertificateInstance generate_certificate_instance(Rng& rng, const CertificateInstanceOptions& o = {}) {
  CertificateInstance out;
  for (;;) {
    ++out.draws;
    const Index n = rng.integer(o.n_min, o.n_max);
    const Vector sig = random_log_spectrum(n, o.spectrum_floor, rng);
    if (is_degenerate(sig)) continue;
    QuadraticObjective train = random_objective(sig, Vector::Zero(n), 0.0, rng);
    const double kappa_R = std::pow(10.0, rng.uniform(0.0, o.max_log10_kappa_R));
    const Vector iota = rng.uniform_vector(n, -1.0, 1.0);
    if (std::abs(iota(0)) < o.iota_floor || std::abs(iota(n - 1)) < o.iota_floor) continue;
    const double th = 2.0 / (sig(0) + sig(n - 1));
    const double eta_s = th * rng.uniform(0.3, 0.9);
    const double eta_b = th + rng.uniform(0.3, 0.9) * (2.0 / sig(0) - th);
    const double w = rng.uniform(0.2, 1.0);
    const double rho = rng.uniform(0.0, 1.0);
    const Vector test_sig = random_spectrum(n, kappa_R, rng);
    if (is_degenerate(test_sig)) continue;
    const Matrix test_basis = random_orthogonal(n, rng);
    const Vector direction = rng.normal_vector(n);

    const AlphaOne a1 = alpha_one(train.spectrum, iota, eta_s, eta_b, kappa_R);
    if (a1.log_value < std::log(o.min_alpha_1)) continue;
    const RateRegime rs = classify_rate(eta_s, train.spectrum);
    const RateRegime rb = classify_rate(eta_b, train.spectrum);
    double alpha = a1.value * w;
    const Vector theta0 = recompose(train, iota);

    bool accepted = false;
    for (int k = 0; k <= o.max_alpha_shrinks && !accepted; ++k, alpha *= 0.8) {
      const StepWindow ws = step_window(train.spectrum, iota, eta_s, alpha, kappa_R, rs);
      const StepWindow wb = step_window(train.spectrum, iota, eta_b, alpha, kappa_R, rb);
      if (std::max(ws.t3, wb.t3) > o.max_steps) break;
      if (!ws.well_posed || !wb.well_posed || !ws.feasible || !wb.feasible) continue;
      const auto t_max = static_cast<std::int64_t>(std::max(ws.t3, wb.t3)) + 2;
      GDRun run_s = run_to_level_set(train, theta0, eta_s, alpha, t_max);
      GDRun run_b = run_to_level_set(train, theta0, eta_b, alpha, t_max);
      if (!run_s.half_condition_met || !run_b.half_condition_met) continue;
      if (!ws.contains(static_cast<double>(run_s.steps)) || !wb.contains(static_cast<double>(run_b.steps))) continue;
      out.run_s = std::move(run_s);
      out.run_b = std::move(run_b);
      accepted = true;
    }
    if (!accepted) continue;
    alpha = out.run_s.alpha;

    // Test objective: model error a fraction ρ of the admissible maximum.
    const double limit = std::min(0.25, (sig(0) / sig(n - 1)) / (72.0 * kappa_R));
    const double r_opt = rho * alpha * limit * (test_sig(0) / sig(0));
    QuadraticObjective test = make_objective(make_spectrum(test_sig, test_basis), Vector::Zero(n), 0.0);
    const double e = test.excess(direction);
    test.optimum = direction * std::sqrt(r_opt / e);

    out.pair = make_pair(std::move(train), std::move(test));
    out.theta0 = theta0;
    out.eta_s = eta_s;
    out.eta_b = eta_b;
    out.alpha = alpha;
    out.assumptions = check_assumptions(out.pair, theta0, eta_s, eta_b, alpha);
    if (!out.assumptions.all()) continue;
    return out;
  }
}

}  // namespace lrbias
