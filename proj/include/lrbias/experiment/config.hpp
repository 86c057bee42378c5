#pragma once

// Experiment configuration: a single JSON object, validated field by field.
// Unknown keys are rejected so that typos never silently fall back to defaults.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrbias/error.hpp"

namespace lrbias::experiment {

enum class ExperimentKind { Toy2D, QuadraticCertify, EtaSweep, AlphaSweep, ScaleSweep, FilterProfiles };

inline const char* to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::Toy2D: return "toy2d";
    case ExperimentKind::QuadraticCertify: return "quadratic_certify";
    case ExperimentKind::EtaSweep: return "eta_sweep";
    case ExperimentKind::AlphaSweep: return "alpha_sweep";
    case ExperimentKind::ScaleSweep: return "scale_sweep";
    case ExperimentKind::FilterProfiles: return "filter_profiles";
  }
  return "unknown";
}

inline std::optional<ExperimentKind> parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::Toy2D, ExperimentKind::QuadraticCertify, ExperimentKind::EtaSweep,
                 ExperimentKind::AlphaSweep, ExperimentKind::ScaleSweep, ExperimentKind::FilterProfiles})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

/// Every field has a default so that `{"experiment": "toy2d"}` is a complete
/// config. Step-size grids are expressed as fractions τ of 2/σ₁; explicit
/// rates `eta_small` / `eta_big` are absolute.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Toy2D;
  std::uint64_t seed = 0;
  std::optional<std::string> dataset_path;
  std::optional<std::string> test_path;
  std::string output_dir;  // empty: "out/<experiment>"

  // Synthetic two-cluster data and the kernel problem.
  std::int64_t n = 200;
  std::int64_t d = 2;
  std::int64_t n_test = 1000;
  double noise = 0.2;
  double scale = 1.0;
  double lambda = 1e-6;
  double init_scale = 1.0;

  std::vector<double> eta_grid{0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999, 1.0 - 1e-5};
  std::vector<double> alpha_grid{0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002};
  std::vector<double> scale_grid{0.5, 1.0, 2.0, 4.0};
  std::optional<double> eta_small;
  std::optional<double> eta_big;
  std::optional<double> alpha;  // level set; experiment-specific default when absent
  std::int64_t max_steps = 10'000'000;
  std::int64_t threads = 0;  // 0: hardware concurrency

  // toy2d
  std::vector<double> sigma{1.0, 0.2};
  std::vector<double> kappa_grid;
  double epsilon = 1e-6;

  // quadratic_certify
  std::int64_t instances = 100;
  std::vector<double> spectrum{1.0, 0.9, 0.3, 0.2};
  std::vector<double> train_spectrum;
  std::vector<double> test_spectrum;
  std::vector<double> theta0;
  std::vector<double> test_optimum;

  // filter_profiles
  std::int64_t sigma_points = 100;

  bool operator==(const ExperimentConfig&) const = default;

  std::string resolved_output_dir() const {
    return output_dir.empty() ? std::string("out/") + to_string(experiment) : output_dir;
  }
};

namespace detail {

using nlohmann::json;

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "seed",       "dataset_path", "test_path",  "output_dir",     "n",           "d",
      "n_test",     "noise",      "scale",        "lambda",     "init_scale",     "eta_grid",    "alpha_grid",
      "scale_grid", "eta_small",  "eta_big",      "alpha",      "max_steps",      "threads",     "sigma",
      "kappa_grid", "epsilon",    "instances",    "spectrum",   "train_spectrum", "test_spectrum", "theta0",
      "test_optimum", "sigma_points"};
  return keys;
}

[[noreturn]] inline void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ValidationError, field + ": " + why);
}

inline double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) invalid(key, "expected a number");
  return j.get<double>();
}

inline std::int64_t get_integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) invalid(key, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::vector<double> get_array(const json& j, const std::string& key) {
  if (!j.is_array()) invalid(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) invalid(key, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) invalid(key, "expected a string");
  return j.get<std::string>();
}

inline std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Semantic checks; the message starts with the offending field name.
inline void validate(const ExperimentConfig& c) {
  using detail::invalid;
  auto positive = [](const std::vector<double>& v) {
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x)) return false;
    return true;
  };
  if (c.n < 2) invalid("n", "must be at least 2");
  if (c.d < 1) invalid("d", "must be at least 1");
  if (c.n_test < 1) invalid("n_test", "must be at least 1");
  if (!(c.noise > 0.0)) invalid("noise", "must be positive");
  if (!(c.scale > 0.0)) invalid("scale", "must be positive");
  if (!(c.lambda >= 0.0)) invalid("lambda", "must be nonnegative");
  if (!(c.init_scale >= 0.0)) invalid("init_scale", "must be nonnegative");
  if (c.max_steps < 1) invalid("max_steps", "must be positive");
  if (c.threads < 0) invalid("threads", "must be nonnegative");
  if (c.eta_small && !(*c.eta_small > 0.0)) invalid("eta_small", "must be positive");
  if (c.eta_big && !(*c.eta_big > 0.0)) invalid("eta_big", "must be positive");
  if (c.eta_small && c.eta_big && !(*c.eta_small < *c.eta_big)) invalid("eta_big", "must exceed eta_small");
  if (c.alpha && !(*c.alpha > 0.0)) invalid("alpha", "must be positive");
  if (c.test_path && !c.dataset_path) invalid("test_path", "requires dataset_path");
  if (c.dataset_path && !c.test_path &&
      (c.experiment == ExperimentKind::EtaSweep || c.experiment == ExperimentKind::AlphaSweep ||
       c.experiment == ExperimentKind::ScaleSweep))
    invalid("test_path", "a held-out set is required when dataset_path is given");

  switch (c.experiment) {
    case ExperimentKind::EtaSweep:
      if (c.eta_grid.empty()) invalid("eta_grid", "must be nonempty");
      for (double t : c.eta_grid)
        if (!(t > 0.0 && t < 1.0)) invalid("eta_grid", "entries are fractions of 2/sigma_1 in (0, 1)");
      break;
    case ExperimentKind::AlphaSweep:
      if (c.alpha_grid.empty()) invalid("alpha_grid", "must be nonempty");
      if (!positive(c.alpha_grid)) invalid("alpha_grid", "entries must be positive");
      break;
    case ExperimentKind::ScaleSweep:
      if (c.scale_grid.empty()) invalid("scale_grid", "must be nonempty");
      if (!positive(c.scale_grid)) invalid("scale_grid", "entries must be positive");
      if (c.alpha_grid.empty()) invalid("alpha_grid", "must be nonempty");
      if (!positive(c.alpha_grid)) invalid("alpha_grid", "entries must be positive");
      break;
    case ExperimentKind::Toy2D:
      if (c.sigma.size() != 2 || !(c.sigma[0] > c.sigma[1] && c.sigma[1] > 0.0))
        invalid("sigma", "needs two entries with sigma_1 > sigma_2 > 0");
      for (double k : c.kappa_grid)
        if (!(k > 1.0)) invalid("kappa_grid", "entries must exceed 1");
      if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) invalid("epsilon", "must lie in (0, 1)");
      break;
    case ExperimentKind::QuadraticCertify: {
      if (c.instances < 1) invalid("instances", "must be at least 1");
      if (c.spectrum.empty() || !positive(c.spectrum)) invalid("spectrum", "needs positive entries");
      const std::size_t m = c.train_spectrum.size();
      if (m > 0) {
        if (m < 2 || !positive(c.train_spectrum)) invalid("train_spectrum", "needs at least two positive entries");
        if (c.test_spectrum.size() != m || !positive(c.test_spectrum))
          invalid("test_spectrum", "needs one positive entry per train eigenvalue");
        if (c.theta0.size() != m) invalid("theta0", "needs one entry per train eigenvalue");
        if (!c.test_optimum.empty() && c.test_optimum.size() != m)
          invalid("test_optimum", "needs one entry per train eigenvalue");
      } else if (!c.test_spectrum.empty() || !c.theta0.empty() || !c.test_optimum.empty()) {
        invalid("train_spectrum", "required when an explicit instance is described");
      }
      break;
    }
    case ExperimentKind::FilterProfiles:
      if (c.sigma_points < 2) invalid("sigma_points", "must be at least 2");
      break;
  }
}

/// Parses and validates. `source` labels error messages.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorCode::ParseError, source + ": " + detail::position(text, byte) + ": invalid JSON");
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, source + ": line 1, column 1: expected a JSON object");
  for (const auto& item : j.items())
    if (!detail::known_keys().count(item.key())) detail::invalid(item.key(), "unknown key");
  if (!j.contains("experiment")) detail::invalid("experiment", "missing");

  ExperimentConfig c;
  const std::string kind = detail::get_string(j["experiment"], "experiment");
  const auto k = parse_kind(kind);
  if (!k) detail::invalid("experiment", "unknown experiment '" + kind + "'");
  c.experiment = *k;

  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = detail::get_number(j[key], key);
  };
  auto opt_num = [&](const char* key, std::optional<double>& dst) {
    if (j.contains(key)) dst = detail::get_number(j[key], key);
  };
  auto integer = [&](const char* key, std::int64_t& dst) {
    if (j.contains(key)) dst = detail::get_integer(j[key], key);
  };
  auto array = [&](const char* key, std::vector<double>& dst) {
    if (j.contains(key)) dst = detail::get_array(j[key], key);
  };
  auto opt_str = [&](const char* key, std::optional<std::string>& dst) {
    if (j.contains(key)) dst = detail::get_string(j[key], key);
  };

  if (j.contains("seed")) {
    const std::int64_t s = detail::get_integer(j["seed"], "seed");
    if (s < 0) detail::invalid("seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  opt_str("dataset_path", c.dataset_path);
  opt_str("test_path", c.test_path);
  if (j.contains("output_dir")) {
    c.output_dir = detail::get_string(j["output_dir"], "output_dir");
    if (c.output_dir.empty()) detail::invalid("output_dir", "must be nonempty");
  } else {
    c.output_dir = c.resolved_output_dir();
  }
  integer("n", c.n);
  integer("d", c.d);
  integer("n_test", c.n_test);
  num("noise", c.noise);
  num("scale", c.scale);
  num("lambda", c.lambda);
  num("init_scale", c.init_scale);
  array("eta_grid", c.eta_grid);
  array("alpha_grid", c.alpha_grid);
  array("scale_grid", c.scale_grid);
  opt_num("eta_small", c.eta_small);
  opt_num("eta_big", c.eta_big);
  opt_num("alpha", c.alpha);
  integer("max_steps", c.max_steps);
  integer("threads", c.threads);
  array("sigma", c.sigma);
  array("kappa_grid", c.kappa_grid);
  num("epsilon", c.epsilon);
  integer("instances", c.instances);
  array("spectrum", c.spectrum);
  array("train_spectrum", c.train_spectrum);
  array("test_spectrum", c.test_spectrum);
  array("theta0", c.theta0);
  array("test_optimum", c.test_optimum);
  integer("sigma_points", c.sigma_points);

  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Canonical form: every field explicit, keys sorted, unset optionals omitted.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  if (c.dataset_path) j["dataset_path"] = *c.dataset_path;
  if (c.test_path) j["test_path"] = *c.test_path;
  j["output_dir"] = c.resolved_output_dir();
  j["n"] = c.n;
  j["d"] = c.d;
  j["n_test"] = c.n_test;
  j["noise"] = c.noise;
  j["scale"] = c.scale;
  j["lambda"] = c.lambda;
  j["init_scale"] = c.init_scale;
  j["eta_grid"] = c.eta_grid;
  j["alpha_grid"] = c.alpha_grid;
  j["scale_grid"] = c.scale_grid;
  if (c.eta_small) j["eta_small"] = *c.eta_small;
  if (c.eta_big) j["eta_big"] = *c.eta_big;
  if (c.alpha) j["alpha"] = *c.alpha;
  j["max_steps"] = c.max_steps;
  j["threads"] = c.threads;
  j["sigma"] = c.sigma;
  j["kappa_grid"] = c.kappa_grid;
  j["epsilon"] = c.epsilon;
  j["instances"] = c.instances;
  j["spectrum"] = c.spectrum;
  j["train_spectrum"] = c.train_spectrum;
  j["test_spectrum"] = c.test_spectrum;
  j["theta0"] = c.theta0;
  j["test_optimum"] = c.test_optimum;
  j["sigma_points"] = c.sigma_points;
  return j;
}

inline std::string emit_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace lrbias::experiment
