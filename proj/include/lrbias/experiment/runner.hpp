#pragma once

// Experiment driver: turns a validated config into CSV tables, SVG figures
// and a manifest with content hashes. Outputs depend only on the config.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lrbias/experiment/config.hpp"
#include "lrbias/experiment/csv.hpp"
#include "lrbias/experiment/hashing.hpp"
#include "lrbias/experiment/parallel.hpp"
#include "lrbias/experiment/svg.hpp"
#include "lrbias/gd_engine.hpp"
#include "lrbias/instances.hpp"
#include "lrbias/kernel_learning.hpp"
#include "lrbias/regime_analysis.hpp"
#include "lrbias/spectral_filters.hpp"
#include "lrbias/toy2d.hpp"

namespace lrbias::experiment {

struct OutputFile {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

struct Manifest {
  ExperimentKind experiment = ExperimentKind::Toy2D;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<OutputFile> files;
  nlohmann::json summary = nlohmann::json::object();

  const OutputFile* find(const std::string& name) const {
    for (const auto& f : files)
      if (f.name == name) return &f;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["experiment"] = to_string(experiment);
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["files"] = nlohmann::json::array();
    for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    j["summary"] = summary;
    return j;
  }
};

/// Writes files into one directory and records their hashes.
class OutputSink {
 public:
  explicit OutputSink(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    require(!ec, ErrorCode::IoError, "cannot create output directory " + dir_ + ": " + ec.message());
  }

  void text(const std::string& name, const std::string& content) {
    write_text(content, path(name));
    files_.push_back({name, sha256_hex(content), content.size()});
  }
  void csv(const std::string& name, const CsvTable& t) { text(name, format_csv(t)); }
  void svg(const std::string& name, const std::vector<Series>& s, const Axes& a) { text(name, render_svg(s, a)); }

  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }
  const std::vector<OutputFile>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<OutputFile> files_;
};

// ---------------------------------------------------------------------------
// Kernel experiments

struct KernelSetup {
  KernelProblem problem;
  Dataset test;
  Vector alpha0;
  Vector theta0;
  double sigma1 = 0.0;
  double eta_small = 0.0;
  double eta_big = 0.0;
};

inline constexpr double kTau = 1.0 - 1e-5;

inline KernelSetup kernel_setup(const ExperimentConfig& c, double scale) {
  Dataset train = c.dataset_path ? load_dataset_csv(*c.dataset_path)
                                 : synthetic_clusters(c.n, c.d, c.seed, c.noise, "train");
  Dataset test = c.test_path ? load_dataset_csv(*c.test_path)
                             : synthetic_clusters(c.n_test, c.d, c.seed, c.noise, "test");
  require(test.dim() == train.dim(), ErrorCode::ValidationError, "test_path: dimension differs from the training set");
  KernelSetup s;
  s.problem = make_kernel_problem(std::move(train), scale, c.lambda);
  s.test = std::move(test);
  Rng rng(c.seed, "init");
  s.alpha0 = c.init_scale * rng.uniform_vector(s.problem.size(), -1.0, 1.0);
  s.theta0 = to_eigen_coords(s.problem, s.alpha0);
  s.sigma1 = s.problem.objective.spectrum.largest();
  s.eta_small = c.eta_small.value_or(1.0 / s.sigma1);
  s.eta_big = c.eta_big.value_or(kTau * 2.0 / s.sigma1);
  return s;
}

struct KernelRun {
  double eta = 0.0;
  std::int64_t steps = 0;
  std::string status;
  double train_excess = 0.0;
  double e1_projection = 0.0;  // |⟨θ − θ̂*, e₁⟩|
  double hilbert_norm = 0.0;   // ‖θ − θ̂*‖_H
  double test_accuracy = 0.0;
};

/// Gradient descent on the train objective from θ₀ until the excess train
/// loss reaches α (or the step budget runs out).
inline KernelRun kernel_run(const KernelSetup& s, double eta, double alpha, std::int64_t max_steps) {
  const QuadraticObjective& obj = s.problem.objective;
  KernelRun r;
  r.eta = eta;
  Vector mu = decompose(obj, s.theta0);
  if (obj.excess_from_coords(mu) <= alpha) {
    r.status = "AlreadyBelowLevelSet";
  } else {
    LevelSetOptions opts;
    opts.trace_stride = std::max<std::int64_t>(1, max_steps / 1000);
    const GDRun run = run_to_level_set(obj, s.theta0, eta, alpha, max_steps, opts);
    r.steps = run.steps;
    r.status = to_string(run.stop_status);
    mu = run.mu;
  }
  r.train_excess = obj.excess_from_coords(mu);
  r.e1_projection = std::abs(mu(0));
  r.hilbert_norm = mu.norm();
  const Vector alpha_t = dual_closed_form(s.problem, s.alpha0, eta, r.steps);
  r.test_accuracy = 1.0 - binary_error(s.problem, alpha_t, s.test);
  return r;
}

inline double default_level(const ExperimentConfig& c) { return c.alpha.value_or(0.05); }

inline std::size_t worker_count(const ExperimentConfig& c) { return static_cast<std::size_t>(c.threads); }

inline void run_eta_sweep(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  const KernelSetup s = kernel_setup(c, c.scale);
  const double alpha = default_level(c);
  const std::vector<KernelRun> runs = parallel_map<KernelRun>(c.eta_grid.size(), worker_count(c), [&](std::size_t i) {
    return kernel_run(s, c.eta_grid[i] * 2.0 / s.sigma1, alpha, c.max_steps);
  });

  CsvTable t{{"tau", "eta", "regime", "steps", "status", "train_excess", "e1_projection", "hilbert_norm",
              "test_accuracy"},
             {}};
  std::size_t arg_e1 = 0, arg_h = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    t.add({c.eta_grid[i], r.eta, std::string(to_string(classify_rate(r.eta, s.problem.objective.spectrum).kind)),
           r.steps, r.status, r.train_excess, r.e1_projection, r.hilbert_norm, r.test_accuracy});
    if (r.e1_projection > runs[arg_e1].e1_projection) arg_e1 = i;
    if (r.hilbert_norm < runs[arg_h].hilbert_norm) arg_h = i;
  }
  out.csv("eta_sweep.csv", t);

  const KernelRun small = kernel_run(s, s.eta_small, alpha, c.max_steps);
  const KernelRun big = kernel_run(s, s.eta_big, alpha, c.max_steps);
  CsvTable ref{{"rate", "eta", "steps", "status", "train_excess", "e1_projection", "hilbert_norm", "test_accuracy"}, {}};
  for (const auto& [name, r] : {std::pair<std::string, const KernelRun&>{"small", small}, {"big", big}})
    ref.add({name, r.eta, r.steps, r.status, r.train_excess, r.e1_projection, r.hilbert_norm, r.test_accuracy});
  out.csv("eta_sweep_rates.csv", ref);

  double max_e1 = 0.0, max_h = 0.0;
  for (const auto& r : runs) {
    max_e1 = std::max(max_e1, r.e1_projection);
    max_h = std::max(max_h, r.hilbert_norm);
  }
  Series acc{"test accuracy", {}, {}}, e1{"|<theta - opt, e1>| / max", {}, {}}, hn{"Hilbert norm / max", {}, {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    acc.x.push_back(c.eta_grid[i]);
    acc.y.push_back(runs[i].test_accuracy);
    e1.x.push_back(c.eta_grid[i]);
    e1.y.push_back(max_e1 > 0 ? runs[i].e1_projection / max_e1 : 0.0);
    hn.x.push_back(c.eta_grid[i]);
    hn.y.push_back(max_h > 0 ? runs[i].hilbert_norm / max_h : 0.0);
  }
  out.svg("eta_sweep.svg", {acc, e1, hn},
          Axes{"Test accuracy and distances against step size", "eta * sigma_1 / 2", "value", false, false, {}});

  summary["alpha"] = alpha;
  summary["sigma_1"] = s.sigma1;
  summary["kappa_train"] = s.problem.objective.spectrum.largest() / s.problem.objective.spectrum.smallest();
  summary["argmax_e1_tau"] = c.eta_grid[arg_e1];
  summary["argmin_hilbert_tau"] = c.eta_grid[arg_h];
  summary["e1_max_at_largest_eta"] = arg_e1 + 1 == runs.size();
  summary["hilbert_min_at_largest_eta"] = arg_h + 1 == runs.size();
  summary["accuracy_small"] = small.test_accuracy;
  summary["accuracy_big"] = big.test_accuracy;
}

inline void run_alpha_sweep(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  const KernelSetup s = kernel_setup(c, c.scale);
  const double acc_opt = 1.0 - binary_error(s.problem, s.problem.alpha_star, s.test);
  using Pair = std::pair<KernelRun, KernelRun>;
  const auto runs = parallel_map<Pair>(c.alpha_grid.size(), worker_count(c), [&](std::size_t i) {
    return Pair{kernel_run(s, s.eta_small, c.alpha_grid[i], c.max_steps),
                kernel_run(s, s.eta_big, c.alpha_grid[i], c.max_steps)};
  });
  CsvTable t{{"alpha", "steps_small", "steps_big", "status_small", "status_big", "accuracy_small", "accuracy_big",
              "accuracy_optimum", "hilbert_small", "hilbert_big"},
             {}};
  Series ss{"small step", {}, {}}, sb{"big step", {}, {}}, so{"optimum", {}, {}, true};
  std::int64_t big_not_worse = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& [a, b] = runs[i];
    t.add({c.alpha_grid[i], a.steps, b.steps, a.status, b.status, a.test_accuracy, b.test_accuracy, acc_opt,
           a.hilbert_norm, b.hilbert_norm});
    ss.x.push_back(c.alpha_grid[i]);
    ss.y.push_back(a.test_accuracy);
    sb.x.push_back(c.alpha_grid[i]);
    sb.y.push_back(b.test_accuracy);
    so.x.push_back(c.alpha_grid[i]);
    so.y.push_back(acc_opt);
    if (b.test_accuracy >= a.test_accuracy) ++big_not_worse;
  }
  out.csv("alpha_sweep.csv", t);
  out.svg("alpha_sweep.svg", {ss, sb, so},
          Axes{"Test accuracy against level set", "alpha (train excess loss)", "test accuracy", true, false, {}});
  summary["eta_small"] = s.eta_small;
  summary["eta_big"] = s.eta_big;
  summary["accuracy_optimum"] = acc_opt;
  summary["big_not_worse_count"] = big_not_worse;
  summary["levels"] = c.alpha_grid.size();
}

inline void run_scale_sweep(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  struct ScaleResult {
    double sigma1 = 0, sigma_n = 0, kappa_kernel = 0, kappa_train = 0;
    std::vector<std::pair<KernelRun, KernelRun>> runs;
  };
  const auto results = parallel_map<ScaleResult>(c.scale_grid.size(), worker_count(c), [&](std::size_t i) {
    const KernelSetup s = kernel_setup(c, c.scale_grid[i]);
    ScaleResult r;
    r.sigma1 = s.problem.kn.largest();
    r.sigma_n = s.problem.kn.smallest();
    r.kappa_kernel = r.sigma_n > 0 ? r.sigma1 / r.sigma_n : std::numeric_limits<double>::infinity();
    r.kappa_train = s.problem.objective.spectrum.largest() / s.problem.objective.spectrum.smallest();
    for (double a : c.alpha_grid)
      r.runs.emplace_back(kernel_run(s, s.eta_small, a, c.max_steps), kernel_run(s, s.eta_big, a, c.max_steps));
    return r;
  });
  CsvTable spec{{"scale", "sigma_1", "sigma_n", "kappa_kernel", "kappa_train"}, {}};
  CsvTable t{{"scale", "kappa_train", "alpha", "steps_small", "steps_big", "accuracy_small", "accuracy_big",
              "accuracy_gap"},
             {}};
  std::vector<Series> gaps;
  nlohmann::json mean_gaps = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    spec.add({c.scale_grid[i], r.sigma1, r.sigma_n, r.kappa_kernel, r.kappa_train});
    Series g{"s = " + format_double(c.scale_grid[i]), {}, {}};
    double mean = 0.0;
    for (std::size_t k = 0; k < r.runs.size(); ++k) {
      const auto& [a, b] = r.runs[k];
      const double gap = b.test_accuracy - a.test_accuracy;
      t.add({c.scale_grid[i], r.kappa_train, c.alpha_grid[k], a.steps, b.steps, a.test_accuracy, b.test_accuracy, gap});
      g.x.push_back(c.alpha_grid[k]);
      g.y.push_back(gap);
      mean += gap / static_cast<double>(r.runs.size());
    }
    gaps.push_back(std::move(g));
    mean_gaps.push_back(mean);
  }
  out.csv("scale_spectrum.csv", spec);
  out.csv("scale_sweep.csv", t);
  out.svg("scale_sweep.svg", gaps,
          Axes{"Accuracy gain of the big step over the small step", "alpha (train excess loss)",
               "accuracy(big) - accuracy(small)", true, false, {}});
  summary["mean_accuracy_gap"] = mean_gaps;
}

// ---------------------------------------------------------------------------
// Quadratic experiments

struct SuiteEntry {
  CertificateInstance instance;
  Certificate certificate;
};

/// Randomized certificate instances, one named random stream per instance so
/// that the suite can be generated concurrently and reproducibly.
inline std::vector<SuiteEntry> certificate_suite(std::uint64_t seed, std::size_t count, std::size_t threads = 0) {
  return parallel_map<SuiteEntry>(count, threads, [&](std::size_t i) {
    Rng rng(seed, "certificate-suite/" + std::to_string(i));
    SuiteEntry e;
    e.instance = generate_certificate_instance(rng);
    e.certificate = certify(e.instance.pair, e.instance.run_s, e.instance.run_b, e.instance.alpha);
    return e;
  });
}

inline CsvTable attenuation_table(const std::vector<double>& spectrum, std::size_t points = 421) {
  std::vector<double> s = spectrum;
  std::sort(s.begin(), s.end(), std::greater<>());
  CsvTable t;
  t.columns.push_back("eta");
  for (double v : s) t.columns.push_back("sigma_" + format_double(v));
  const double top = 2.1 / s.front();
  for (std::size_t k = 0; k < points; ++k) {
    const double eta = top * static_cast<double>(k) / static_cast<double>(points - 1);
    std::vector<CsvCell> row{eta};
    for (double v : s) row.emplace_back(attenuation(eta, v));
    t.add(std::move(row));
  }
  return t;
}

inline void write_attenuation(const std::vector<double>& spectrum, OutputSink& out) {
  const CsvTable t = attenuation_table(spectrum);
  out.csv("attenuation.csv", t);
  std::vector<Series> series;
  for (std::size_t j = 1; j < t.columns.size(); ++j) {
    Series s{t.columns[j], {}, {}};
    for (const auto& row : t.rows) {
      s.x.push_back(std::get<double>(row[0]));
      s.y.push_back(std::get<double>(row[j]));
    }
    series.push_back(std::move(s));
  }
  const double s1 = *std::max_element(spectrum.begin(), spectrum.end());
  const double sn = *std::min_element(spectrum.begin(), spectrum.end());
  out.svg("attenuation.svg", series,
          Axes{"Attenuation |1 - eta sigma_i|", "eta", "attenuation", false, false,
               {{2.0 / (s1 + sn), "2/(s1+sn)"}, {2.0 / s1, "2/s1"}}});
}

inline CsvTable certificate_table() {
  CsvTable t;
  t.columns = {"instance", "n", "draws"};
  for (const auto& [k, v] : Certificate{}.flatten()) t.columns.push_back(k);
  return t;
}

inline void add_certificate_row(CsvTable& t, std::int64_t index, std::int64_t n, std::int64_t draws,
                                const Certificate& cert) {
  std::vector<CsvCell> row{index, n, draws};
  for (const auto& [k, v] : cert.flatten()) row.emplace_back(v);
  t.add(std::move(row));
}

inline void run_explicit_certificate(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  const Index n = static_cast<Index>(c.train_spectrum.size());
  auto vec = [](const std::vector<double>& v) { return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()))); };
  const QuadraticObjective train = make_objective(diagonal_spectrum(vec(c.train_spectrum)), Vector::Zero(n), 0.0);
  const Vector opt = c.test_optimum.empty() ? Vector::Zero(n) : vec(c.test_optimum);
  const QuadraticObjective test = make_objective(diagonal_spectrum(vec(c.test_spectrum)), opt, 0.0);
  const ProblemPair pair = make_pair(train, test);
  const Vector theta0 = vec(c.theta0);
  const double s1 = train.spectrum.largest();
  const double eta_s = c.eta_small.value_or(1.0 / s1);
  const double eta_b = c.eta_big.value_or(kTau * 2.0 / s1);

  double alpha = 0.0;
  if (c.alpha) {
    alpha = *c.alpha;
  } else {
    try {
      alpha = alpha_one(train.spectrum, decompose(train, theta0), eta_s, eta_b, pair.kappa_R()).value;
    } catch (const Error& e) {
      throw Error(ErrorCode::CertificationFailed, std::string("cannot form the default level set: ") + e.what());
    }
  }
  const AssumptionReport report = check_assumptions(pair, theta0, eta_s, eta_b, alpha);
  CsvTable at{{"assumption", "holds", "quantity", "value"}, {}};
  for (const Verdict* v : report.list())
    for (const auto& [k, x] : v->values) at.add({v->name, std::int64_t{v->holds}, k, x});
  out.csv("assumptions.csv", at);
  if (!report.all())
    throw Error(ErrorCode::CertificationFailed, "assumption " + report.first_failure() + " does not hold");

  const GDRun rs = run_to_level_set(train, theta0, eta_s, alpha, c.max_steps);
  const GDRun rb = run_to_level_set(train, theta0, eta_b, alpha, c.max_steps);
  require(rs.stop_status == StopStatus::HitLevelSet && rb.stop_status == StopStatus::HitLevelSet,
          ErrorCode::ValidationError, "max_steps: a run did not reach the level set within the step budget");
  const Certificate cert = certify(pair, rs, rb, alpha);
  CsvTable t = certificate_table();
  add_certificate_row(t, 0, n, 1, cert);
  out.csv("certificate.csv", t);
  summary["final_verdict"] = cert.final_verdict;
  summary["lemma_conclusions"] = cert.lemma_conclusions();
  summary["runs_in_windows"] = cert.runs_in_windows;
  summary["R_s"] = cert.R_s;
  summary["R_b"] = cert.R_b;
  summary["bound_rhs"] = cert.bound_rhs;
}

inline void run_quadratic_certify(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  write_attenuation(c.spectrum, out);
  if (!c.train_spectrum.empty()) {
    run_explicit_certificate(c, out, summary);
    return;
  }
  const auto suite = certificate_suite(c.seed, static_cast<std::size_t>(c.instances), worker_count(c));
  CsvTable t = certificate_table();
  std::int64_t verdicts = 0, lemmas = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [inst, cert] = suite[i];
    add_certificate_row(t, static_cast<std::int64_t>(i), inst.pair.dim(), inst.draws, cert);
    verdicts += cert.final_verdict;
    lemmas += cert.lemma_conclusions();
    worst = std::max(worst, cert.R_b / ((cert.kappa_R / cert.kappa_F) * cert.R_s));
  }
  out.csv("certificate.csv", t);
  summary["instances"] = suite.size();
  summary["final_verdicts"] = verdicts;
  summary["lemma_conclusions"] = lemmas;
  summary["worst_normalized_ratio"] = worst;
}

inline void run_toy2d(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  const double s1 = c.sigma[0];
  std::vector<double> kappas = c.kappa_grid;
  if (kappas.empty()) kappas.push_back(s1 / c.sigma[1]);
  const double eta_s = c.eta_small.value_or(1.0 / s1);
  const double eta_b = c.eta_big.value_or(kTau * 2.0 / s1);

  struct ToyResult {
    ToyInstance inst{1.0, 0.5};
    double alpha = 0.0;
    ToyRatio ratio;
  };
  const auto results = parallel_map<ToyResult>(kappas.size(), worker_count(c), [&](std::size_t i) {
    ToyResult r;
    r.inst = ToyInstance(s1, s1 / kappas[i]);
    r.alpha = c.alpha ? *c.alpha : suitable_alpha(r.inst, eta_s, eta_b, c.epsilon, c.max_steps).alpha;
    r.ratio = ratio_check(r.inst, eta_s, eta_b, r.alpha, c.max_steps);
    return r;
  });

  CsvTable t{{"sigma_1", "sigma_2", "kappa", "eta_small", "eta_big", "alpha", "t_s", "t_b", "R_s", "R_b", "ratio",
              "ratio_over_kappa", "normalized_ratio", "passes", "nine_eighths", "epsilon_s2", "epsilon_b2", "small_t1",
              "small_t2", "big_t1", "big_t2"},
             {}};
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    const ToyRatio& q = r.ratio;
    t.add({r.inst.sigma1(), r.inst.sigma2(), q.kappa, eta_s, eta_b, r.alpha, q.t_s, q.t_b, q.R_s, q.R_b, q.ratio,
           q.ratio / q.kappa, q.normalized_ratio, std::int64_t{q.passes}, std::int64_t{q.nine_eighths}, q.epsilon_s2,
           q.epsilon_b2, q.small.t1, q.small.t2, q.big.t1, q.big.t2});
    min_margin = std::min(min_margin, q.ratio / q.kappa);
  }
  out.csv("toy2d_ratio.csv", t);

  // Trajectories of the first instance, decimated to at most ~2000 rows.
  const ToyResult& first = results.front();
  const std::int64_t last = std::max(first.ratio.t_s, first.ratio.t_b);
  const std::int64_t stride = std::max<std::int64_t>(1, (last + 1999) / 2000);
  CsvTable tr{{"step", "small_x", "small_y", "big_x", "big_y", "small_test_loss", "big_test_loss"}, {}};
  Series ps{"small step", {}, {}}, pb{"big step", {}, {}}, ls{"small step", {}, {}}, lb{"big step", {}, {}};
  for (std::int64_t k = 0;; k += stride) {
    const std::int64_t step = std::min(k, last);
    const auto [xs, ys] = trajectory(first.inst, eta_s, std::min(step, first.ratio.t_s));
    const auto [xb, yb] = trajectory(first.inst, eta_b, std::min(step, first.ratio.t_b));
    const double rs = first.inst.test_loss(xs, ys), rb = first.inst.test_loss(xb, yb);
    tr.add({step, xs, ys, xb, yb, rs, rb});
    ps.x.push_back(xs);
    ps.y.push_back(ys);
    pb.x.push_back(xb);
    pb.y.push_back(yb);
    ls.x.push_back(static_cast<double>(step));
    ls.y.push_back(rs);
    lb.x.push_back(static_cast<double>(step));
    lb.y.push_back(rb);
    if (step == last) break;
  }
  out.csv("toy2d_trajectory.csv", tr);
  out.svg("toy2d_paths.svg", {ps, pb}, Axes{"Gradient descent paths", "theta_1 (e_1)", "theta_2 (e_2)", false, false, {}});
  out.svg("toy2d_test_loss.svg", {ls, lb}, Axes{"Test loss along the runs", "step", "R(theta_t)", false, true, {}});

  summary["eta_small"] = eta_s;
  summary["eta_big"] = eta_b;
  summary["min_ratio_over_kappa"] = min_margin;
  summary["ratio"] = results.front().ratio.ratio;
  bool all_pass = true;
  for (const auto& r : results) all_pass = all_pass && r.ratio.passes;
  summary["all_pass"] = all_pass;
}

inline void run_filter_profiles(const ExperimentConfig& c, OutputSink& out, nlohmann::json& summary) {
  const std::vector<std::pair<std::string, FilterSpec>> filters{
      {"cutoff", FilterSpec::cutoff(0.25)},
      {"gd_small", FilterSpec::gd(1.0, 4)},
      {"gd_big", FilterSpec::gd(2.0, 4)},
      {"tikhonov", FilterSpec::tikhonov(0.25)},
      {"iterated_tikhonov", FilterSpec::iterated_tikhonov(0.8, 5)}};
  CsvTable t;
  t.columns.push_back("sigma");
  for (const auto& [name, f] : filters) t.columns.push_back(name);
  std::vector<Series> series;
  for (const auto& [name, f] : filters) series.push_back(Series{name, {}, {}});
  for (std::int64_t k = 1; k <= c.sigma_points; ++k) {
    const double sigma = static_cast<double>(k) / static_cast<double>(c.sigma_points);
    std::vector<CsvCell> row{sigma};
    for (std::size_t j = 0; j < filters.size(); ++j) {
      const double r = residual(filters[j].second, sigma);
      row.emplace_back(r);
      series[j].x.push_back(sigma);
      series[j].y.push_back(r);
    }
    t.add(std::move(row));
  }
  out.csv("filter_profiles.csv", t);
  out.svg("filter_profiles.svg", series, Axes{"Residual of spectral filters", "sigma", "residual", false, false, {}});

  std::vector<double> s = c.spectrum;
  std::sort(s.begin(), s.end(), std::greater<>());
  const Spectrum spec = diagonal_spectrum(Eigen::Map<const Vector>(s.data(), static_cast<Index>(s.size())));
  for (const auto& [name, f] : filters) summary["argmax_" + name] = residual_argmax(f, spec);
}

inline Manifest run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Manifest m;
  m.experiment = cfg.experiment;
  m.seed = cfg.seed;
  m.output_dir = cfg.resolved_output_dir();
  OutputSink out(m.output_dir);
  switch (cfg.experiment) {
    case ExperimentKind::Toy2D: run_toy2d(cfg, out, m.summary); break;
    case ExperimentKind::QuadraticCertify: run_quadratic_certify(cfg, out, m.summary); break;
    case ExperimentKind::EtaSweep: run_eta_sweep(cfg, out, m.summary); break;
    case ExperimentKind::AlphaSweep: run_alpha_sweep(cfg, out, m.summary); break;
    case ExperimentKind::ScaleSweep: run_scale_sweep(cfg, out, m.summary); break;
    case ExperimentKind::FilterProfiles: run_filter_profiles(cfg, out, m.summary); break;
  }
  out.text("config.json", emit_config(cfg));
  m.files = out.files();
  write_text(m.to_json().dump(2) + "\n", out.path("manifest.json"));
  return m;
}

}  // namespace lrbias::experiment
