// Command-line driver for the experiment suite.
//
//   lrbias run --config configs/eta_sweep.json [--output-dir DIR] [--seed N]
//   lrbias validate --config configs/toy2d.json
//
// Exit codes: 0 success, 1 invalid input or internal error, 2 certification
// or feasibility failure, 3 I/O failure.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lrbias/experiment/runner.hpp"

namespace {

using namespace lrbias;
using namespace lrbias::experiment;

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::CertificationFailed:
    case ErrorCode::InfeasibleWindow:
    case ErrorCode::LevelSetMismatch: return 2;
    case ErrorCode::IoError: return 3;
    default: return 1;
  }
}

bool use_color(FILE* stream) {
  const char* no = std::getenv("NO_COLOR");
  return (no == nullptr || *no == '\0') && isatty(fileno(stream));
}

std::string paint(const std::string& s, const char* code, FILE* stream) {
  return use_color(stream) ? std::string("\033[") + code + "m" + s + "\033[0m" : s;
}

struct RunArgs {
  std::string config;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dataset;
  std::optional<std::string> test_dataset;
  std::optional<std::int64_t> threads;
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.output_dir) cfg.output_dir = *a.output_dir;
  if (a.seed) cfg.seed = *a.seed;
  if (a.dataset) cfg.dataset_path = *a.dataset;
  if (a.test_dataset) cfg.test_path = *a.test_dataset;
  if (a.threads) cfg.threads = *a.threads;
  validate(cfg);

  const Manifest m = run_experiment(cfg);
  if (!a.quiet) {
    std::cout << paint("done", "32", stdout) << " " << to_string(m.experiment) << " -> " << m.output_dir << "\n";
    for (const auto& f : m.files) std::cout << "  " << f.sha256.substr(0, 12) << "  " << f.name << "\n";
    std::cout << m.summary.dump(2) << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  std::cout << emit_config(load_config(path));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-rate bias experiments: quadratic certificates, toy ratios and kernel sweeps"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run_cmd->add_option("-c,--config", run.config, "Config file")->required();
  run_cmd->add_option("-o,--output-dir", run.output_dir, "Override output_dir");
  run_cmd->add_option("-s,--seed", run.seed, "Override seed");
  run_cmd->add_option("--dataset", run.dataset, "Training set CSV (x1,...,xd,label)");
  run_cmd->add_option("--test-dataset", run.test_dataset, "Held-out set CSV");
  run_cmd->add_option("-j,--threads", run.threads, "Worker threads (0: all cores)");
  run_cmd->add_flag("-q,--quiet", run.quiet, "Print nothing on success");

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a config and print its canonical form");
  val_cmd->add_option("-c,--config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    return cmd_validate(validate_path);
  } catch (const Error& e) {
    std::cerr << paint("error", "31", stderr) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << paint("error", "31", stderr) << ": " << e.what() << "\n";
    return 1;
  }
}
