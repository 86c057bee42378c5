#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "lrbias/experiment/runner.hpp"

using namespace lrbias;
using namespace lrbias::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lrbias_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig config_for(const std::string& json_text) { return parse_config(json_text, "test"); }

template <typename F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

template <typename F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

// Column lookup on a parsed CSV.
struct Table {
  std::vector<std::vector<std::string>> rows;
  std::size_t col(const std::string& name) const {
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      if (rows.front()[j] == name) return j;
    ADD_FAILURE() << "missing column " << name;
    return 0;
  }
  double num(std::size_t row, const std::string& name) const { return std::strtod(rows[row + 1][col(name)].c_str(), nullptr); }
  std::size_t size() const { return rows.size() - 1; }
};

Table load_table(const fs::path& p) { return Table{parse_csv(read_text(p.string()))}; }

}  // namespace

// ----------------------------------------------------------------- config

TEST(Config, MinimalFillsDefaults) {
  const auto c = config_for(R"({"experiment": "toy2d"})");
  EXPECT_EQ(c.experiment, ExperimentKind::Toy2D);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.output_dir, "out/toy2d");
  EXPECT_FALSE(c.eta_grid.empty());
  EXPECT_DOUBLE_EQ(c.eta_grid.back(), 1.0 - 1e-5);
}

TEST(Config, EmptyEtaGridNamesField) {
  const auto msg = message_of([] { config_for(R"({"experiment": "eta_sweep", "eta_grid": []})"); });
  EXPECT_NE(msg.find("eta_grid"), std::string::npos) << msg;
  EXPECT_EQ(code_of([] { config_for(R"({"experiment": "eta_sweep", "eta_grid": []})"); }), ErrorCode::ValidationError);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  const auto msg = message_of([] { config_for(R"({"experiment": "toy2d", "learning_rate": 1})"); });
  EXPECT_NE(msg.find("learning_rate"), std::string::npos) << msg;
  EXPECT_EQ(code_of([] { config_for(R"({"experiment": "toy2d", "seed": "zero"})"); }), ErrorCode::ValidationError);
  EXPECT_NE(message_of([] { config_for(R"({"experiment": "toy2d", "seed": "zero"})"); }).find("seed"),
            std::string::npos);
  EXPECT_EQ(code_of([] { config_for(R"({"experiment": "toy2d", "sigma": [0.2, 1]})"); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([] { config_for(R"({"experiment": "nope"})"); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([] { config_for(R"({"experiment": "eta_sweep", "eta_grid": [0.5, 1.0]})"); }),
            ErrorCode::ValidationError);
}

TEST(Config, ParseErrorsReportPosition) {
  const std::string text = "{\n  \"experiment\": \"toy2d\",\n  \"seed\": ,\n}";
  EXPECT_EQ(code_of([&] { config_for(text); }), ErrorCode::ParseError);
  const auto msg = message_of([&] { config_for(text); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
  EXPECT_EQ(code_of([] { config_for("[1, 2]"); }), ErrorCode::ParseError);
}

TEST(Config, EmitReloadRoundTrip) {
  const std::vector<std::string> texts{
      R"({"experiment": "toy2d"})",
      R"({"experiment": "eta_sweep", "seed": 7, "eta_grid": [0.1, 0.3, 0.9], "eta_small": 0.25, "alpha": 0.1,
          "lambda": 1e-3, "output_dir": "somewhere/else"})",
      R"({"experiment": "quadratic_certify", "train_spectrum": [1, 0.5], "test_spectrum": [1, 0.8],
          "theta0": [1, 1], "test_optimum": [0.1, 0.2]})",
      R"({"experiment": "scale_sweep", "scale_grid": [0.3, 3], "threads": 2, "dataset_path": "a.csv",
          "test_path": "b.csv"})"};
  for (const auto& t : texts) {
    const auto c = config_for(t);
    const auto again = config_for(emit_config(c));
    EXPECT_EQ(c, again) << t;
    EXPECT_EQ(emit_config(c), emit_config(again));
  }
}

TEST(Config, LoadMissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_config((scratch("missing") / "none.json").string()); }), ErrorCode::IoError);
}

// -------------------------------------------------------------------- csv

TEST(Csv, EmptyTableIsHeaderOnly) {
  const CsvTable t{{"a", "b"}, {}};
  EXPECT_EQ(format_csv(t), "a,b\n");
}

TEST(Csv, ShortestRoundTripDoubles) {
  CsvTable t{{"x"}, {}};
  t.add({0.1});
  const auto text = format_csv(t);
  EXPECT_EQ(text, "x\n0.1\n");
  EXPECT_EQ(std::strtod(parse_csv(text)[1][0].c_str(), nullptr), 0.1);
}

TEST(Csv, ThousandRowsReloadExactly) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  CsvTable t{{"i", "x", "y", "label"}, {}};
  for (std::int64_t i = 0; i < 1000; ++i) t.add({i, u(gen), std::ldexp(u(gen), -300), std::string(i % 2 ? "a,b" : "q\"z")});
  const auto rows = parse_csv(format_csv(t));
  ASSERT_EQ(rows.size(), 1001u);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(std::stoll(rows[i + 1][0]), std::get<std::int64_t>(t.rows[i][0]));
    EXPECT_EQ(std::strtod(rows[i + 1][1].c_str(), nullptr), std::get<double>(t.rows[i][1]));
    EXPECT_EQ(std::strtod(rows[i + 1][2].c_str(), nullptr), std::get<double>(t.rows[i][2]));
    EXPECT_EQ(rows[i + 1][3], std::get<std::string>(t.rows[i][3]));
  }
}

TEST(Csv, ArityIsChecked) {
  CsvTable t{{"a", "b"}, {}};
  EXPECT_EQ(code_of([&] { t.add({1.0}); }), ErrorCode::DimensionMismatch);
}

// -------------------------------------------------------------------- svg

TEST(Svg, OnePolylinePerSeries) {
  const Series s{"line", {0, 1, 2}, {1, 0, 1}};
  const auto svg = render_svg({s}, Axes{"t", "x", "y", false, false, {}});
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Svg, AttenuationFigureHasFourCurvesAndTwoGuides) {
  const auto out = scratch("svg_att");
  OutputSink sink(out.string());
  write_attenuation({1.0, 0.9, 0.3, 0.2}, sink);
  const auto svg = read_text((out / "attenuation.svg").string());
  EXPECT_EQ(count(svg, "<polyline"), 4u);
  EXPECT_EQ(count(svg, "stroke-dasharray=\"5,4\""), 2u);
  EXPECT_EQ(svg, read_text((out / "attenuation.svg").string()));
  // Re-rendering is byte-identical.
  OutputSink again(out.string());
  write_attenuation({1.0, 0.9, 0.3, 0.2}, again);
  EXPECT_EQ(sink.files()[1].sha256, again.files()[1].sha256);
}

TEST(Svg, DropsUnplottablePointsAndRejectsEmpty) {
  const Series s{"log", {1, 10, 100}, {0.0, 1.0, std::nan("")}};
  const auto svg = render_svg({s}, Axes{"", "", "", true, true, {}});
  EXPECT_EQ(count(svg, "nan"), 0u);
  EXPECT_EQ(count(svg, "inf"), 0u);
  EXPECT_EQ(code_of([] { render_svg({}, Axes{}); }), ErrorCode::InvalidArgument);
}

// ----------------------------------------------------------------- hashing

TEST(Hashing, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// ---------------------------------------------------------------- parallel

TEST(Parallel, ResultsInIndexOrder) {
  for (std::size_t threads : {1u, 3u, 8u}) {
    const auto out = parallel_map<std::size_t>(1000, threads, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i], i * i);
  }
  EXPECT_TRUE((parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty()));
}

TEST(Parallel, LowestFailingIndexWins) {
  const auto msg = message_of([] {
    parallel_map<int>(200, 8, [](std::size_t i) -> int {
      if (i % 50 == 7) throw Error(ErrorCode::InvalidArgument, "index " + std::to_string(i));
      return 0;
    });
  });
  EXPECT_NE(msg.find("index 7"), std::string::npos) << msg;
}

// ------------------------------------------------------------------ runner

TEST(Runner, Toy2dDefaultRatioAtLeastFive) {
  auto c = config_for(R"({"experiment": "toy2d"})");
  c.output_dir = scratch("toy2d").string();
  const auto m = run_experiment(c);
  ASSERT_NE(m.find("toy2d_ratio.csv"), nullptr);
  const auto t = load_table(fs::path(c.output_dir) / "toy2d_ratio.csv");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_GE(t.num(0, "ratio"), 5.0);
  EXPECT_EQ(t.num(0, "passes"), 1.0);
  EXPECT_TRUE(m.summary["all_pass"].get<bool>());
  EXPECT_LE(load_table(fs::path(c.output_dir) / "toy2d_trajectory.csv").size(), 2001u);
}

TEST(Runner, Toy2dKappaGridIsIncreasing) {
  auto c = config_for(R"({"experiment": "toy2d", "kappa_grid": [2, 5, 10]})");
  c.output_dir = scratch("toy2d_kappa").string();
  run_experiment(c);
  const auto t = load_table(fs::path(c.output_dir) / "toy2d_ratio.csv");
  ASSERT_EQ(t.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_GE(t.num(i, "ratio"), t.num(i, "kappa"));
  EXPECT_LT(t.num(0, "ratio"), t.num(1, "ratio"));
  EXPECT_LT(t.num(1, "ratio"), t.num(2, "ratio"));
}

TEST(Runner, Toy2dInfeasibleLevelPropagates) {
  auto c = config_for(R"({"experiment": "toy2d", "alpha": 0.3})");
  c.output_dir = scratch("toy2d_bad").string();
  EXPECT_EQ(code_of([&] { run_experiment(c); }), ErrorCode::InfeasibleWindow);
}

TEST(Runner, FilterProfilesMatchClosedForms) {
  auto c = config_for(R"({"experiment": "filter_profiles"})");
  c.output_dir = scratch("filters").string();
  run_experiment(c);
  const auto t = load_table(fs::path(c.output_dir) / "filter_profiles.csv");
  ASSERT_EQ(t.size(), 100u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = static_cast<double>(i + 1) / 100.0;
    EXPECT_EQ(t.num(i, "sigma"), s);
    EXPECT_NEAR(t.num(i, "cutoff"), s < 0.25 ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(t.num(i, "gd_small"), std::pow(1.0 - s, 4), 1e-12);
    EXPECT_NEAR(t.num(i, "gd_big"), std::pow(1.0 - 2.0 * s, 4), 1e-12);
    EXPECT_NEAR(t.num(i, "tikhonov"), 0.25 / (s + 0.25), 1e-12);
    EXPECT_NEAR(t.num(i, "iterated_tikhonov"), std::pow(1.0 + 0.8 * s, -5), 1e-12);
  }
}

TEST(Runner, ManifestHashesMatchFiles) {
  auto c = config_for(R"({"experiment": "filter_profiles", "sigma_points": 17})");
  c.output_dir = scratch("manifest").string();
  const auto m = run_experiment(c);
  ASSERT_FALSE(m.files.empty());
  for (const auto& f : m.files) {
    const auto text = read_text((fs::path(c.output_dir) / f.name).string());
    EXPECT_EQ(sha256_hex(text), f.sha256) << f.name;
    EXPECT_EQ(text.size(), f.bytes) << f.name;
  }
  const auto manifest = nlohmann::json::parse(read_text((fs::path(c.output_dir) / "manifest.json").string()));
  EXPECT_EQ(manifest, m.to_json());
  EXPECT_EQ(config_for(read_text((fs::path(c.output_dir) / "config.json").string())), c);
}

TEST(Runner, RerunsAreByteIdenticalAcrossThreadCounts) {
  auto c = config_for(R"({"experiment": "eta_sweep", "n": 60, "n_test": 200, "eta_grid": [0.2, 0.6, 0.9, 0.999]})");
  c.output_dir = scratch("det_a").string();
  c.threads = 1;
  const auto a = run_experiment(c);
  c.output_dir = scratch("det_b").string();
  c.threads = 4;
  const auto b = run_experiment(c);
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    if (a.files[i].name == "config.json") continue;  // records output_dir and threads
    EXPECT_EQ(a.files[i].sha256, b.files[i].sha256) << a.files[i].name;
  }
}

TEST(Runner, EtaSweepRowsAndRegimes) {
  auto c = config_for(R"({"experiment": "eta_sweep", "n": 80, "n_test": 200})");
  c.output_dir = scratch("eta").string();
  const auto m = run_experiment(c);
  const auto t = load_table(fs::path(c.output_dir) / "eta_sweep.csv");
  ASSERT_EQ(t.size(), c.eta_grid.size());
  const double s1 = m.summary["sigma_1"].get<double>();
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_DOUBLE_EQ(t.num(i, "eta"), c.eta_grid[i] * 2.0 / s1);
    EXPECT_LE(t.num(i, "train_excess"), 0.05);
    EXPECT_GE(t.num(i, "test_accuracy"), 0.0);
    EXPECT_LE(t.num(i, "test_accuracy"), 1.0);
  }
  const auto ref = load_table(fs::path(c.output_dir) / "eta_sweep_rates.csv");
  ASSERT_EQ(ref.size(), 2u);
  EXPECT_DOUBLE_EQ(ref.num(0, "eta"), 1.0 / s1);
}

TEST(Runner, AlphaAndScaleSweepShapes) {
  auto c = config_for(R"({"experiment": "alpha_sweep", "n": 60, "n_test": 200, "alpha_grid": [0.1, 0.01]})");
  c.output_dir = scratch("alpha").string();
  run_experiment(c);
  const auto a = load_table(fs::path(c.output_dir) / "alpha_sweep.csv");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_GE(a.num(1, "steps_big"), a.num(0, "steps_big"));  // a lower level takes longer

  auto s = config_for(R"({"experiment": "scale_sweep", "n": 60, "n_test": 200, "alpha_grid": [0.1],
                          "scale_grid": [0.5, 1, 2]})");
  s.output_dir = scratch("scale").string();
  run_experiment(s);
  const auto spec = load_table(fs::path(s.output_dir) / "scale_spectrum.csv");
  ASSERT_EQ(spec.size(), 3u);
  // Wider kernels concentrate the spectrum: σ₁ and the train condition number grow.
  EXPECT_LT(spec.num(0, "sigma_1"), spec.num(1, "sigma_1"));
  EXPECT_LT(spec.num(1, "sigma_1"), spec.num(2, "sigma_1"));
  EXPECT_LT(spec.num(0, "kappa_train"), spec.num(2, "kappa_train"));
  EXPECT_EQ(load_table(fs::path(s.output_dir) / "scale_sweep.csv").size(), 3u);
}

TEST(Runner, ExternalDatasetsAreUsed) {
  const auto dir = scratch("dataset");
  fs::create_directories(dir);
  write_dataset_csv(synthetic_clusters(40, 2, 5, 0.2, "train"), (dir / "train.csv").string());
  write_dataset_csv(synthetic_clusters(100, 2, 5, 0.2, "test"), (dir / "test.csv").string());
  auto c = config_for(R"({"experiment": "alpha_sweep", "alpha_grid": [0.05], "seed": 5})");
  c.dataset_path = (dir / "train.csv").string();
  c.test_path = (dir / "test.csv").string();
  c.output_dir = (dir / "out").string();
  run_experiment(c);
  auto d = config_for(R"({"experiment": "alpha_sweep", "alpha_grid": [0.05], "n": 40, "n_test": 100, "seed": 5})");
  d.output_dir = (dir / "synthetic").string();
  run_experiment(d);
  EXPECT_EQ(read_text((dir / "out" / "alpha_sweep.csv").string()),
            read_text((dir / "synthetic" / "alpha_sweep.csv").string()));
  // The training file alone is not enough for a sweep.
  EXPECT_EQ(code_of([] {
              config_for(R"({"experiment": "eta_sweep", "dataset_path": "x.csv"})");
            }),
            ErrorCode::ValidationError);
}

TEST(Runner, GeneratedCertificatesAllHold) {
  auto c = config_for(R"({"experiment": "quadratic_certify", "instances": 12, "seed": 3})");
  c.output_dir = scratch("certify").string();
  const auto m = run_experiment(c);
  EXPECT_EQ(m.summary["final_verdicts"].get<std::int64_t>(), 12);
  EXPECT_EQ(m.summary["lemma_conclusions"].get<std::int64_t>(), 12);
  const auto t = load_table(fs::path(c.output_dir) / "certificate.csv");
  ASSERT_EQ(t.size(), 12u);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(t.num(i, "R_b"), t.num(i, "bound_rhs"));
  EXPECT_EQ(load_table(fs::path(c.output_dir) / "attenuation.csv").size(), 421u);
}

TEST(Runner, ExplicitCertificateInstance) {
  auto c = config_for(R"({"experiment": "quadratic_certify", "train_spectrum": [1, 0.5],
                          "test_spectrum": [1, 0.8], "theta0": [1, 1]})");
  c.output_dir = scratch("certify_explicit").string();
  const auto m = run_experiment(c);
  const auto t = load_table(fs::path(c.output_dir) / "certificate.csv");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_LE(t.num(0, "R_b"), t.num(0, "bound_rhs"));
  EXPECT_TRUE(m.summary["final_verdict"].get<bool>());
}

TEST(Runner, FailedAssumptionIsCertificationFailed) {
  auto c = config_for(R"({"experiment": "quadratic_certify", "train_spectrum": [1, 0.5],
                          "test_spectrum": [1, 0.8], "theta0": [1, 1], "test_optimum": [1, 1], "alpha": 0.01})");
  c.output_dir = scratch("certify_fail").string();
  const auto msg = message_of([&] { run_experiment(c); });
  EXPECT_NE(msg.find("model_error"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { run_experiment(c); }), ErrorCode::CertificationFailed);
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "assumptions.csv"));

  auto zero = config_for(R"({"experiment": "quadratic_certify", "train_spectrum": [1, 0.5],
                             "test_spectrum": [1, 0.8], "theta0": [0, 1]})");
  zero.output_dir = scratch("certify_zero").string();
  EXPECT_EQ(code_of([&] { run_experiment(zero); }), ErrorCode::CertificationFailed);
}

TEST(Runner, UnwritableOutputIsIoError) {
  const auto dir = scratch("io");
  fs::create_directories(dir);
  write_text("x", (dir / "file").string());
  auto c = config_for(R"({"experiment": "filter_profiles"})");
  c.output_dir = (dir / "file" / "sub").string();
  EXPECT_EQ(code_of([&] { run_experiment(c); }), ErrorCode::IoError);
}
