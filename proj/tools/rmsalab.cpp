// rmsalab: train, baseline, eval and summarize elastic-optical-network RMSA experiments.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rmsa/config.hpp"
#include "rmsa/error.hpp"
#include "rmsa/experiment.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<std::int64_t> epochs;
  std::optional<std::string> checkpoint;
  std::optional<std::int64_t> requests;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "run configuration file (key = value)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "base random seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--mode", o.mode, "ep | flx | spff | kspff");
  cmd->add_option("--epochs", o.epochs, "training epochs (gradient applications)");
  cmd->add_option("--workers", o.workers, "actor-learner count");
  cmd->add_option("--requests", o.requests, "requests served by baseline / eval");
}

rmsa::RunConfig resolve(const Overrides& o) {
  rmsa::RunConfig cfg = o.config.empty() ? rmsa::RunConfig{} : rmsa::load_config_file(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.mode) cfg.mode = rmsa::parse_run_mode(*o.mode);
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.workers) cfg.workers = *o.workers;
  if (o.requests) cfg.requests = *o.requests;
  if (o.checkpoint) cfg.checkpoint = *o.checkpoint;
  rmsa::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic optical network RMSA simulator with actor-critic training"};
  app.require_subcommand(1);

  Overrides o;
  auto* train = app.add_subcommand("train", "train actor-critic agents (mode ep or flx)");
  add_common(train, o, true);
  auto* baseline = app.add_subcommand("baseline", "run SP-FF or KSP-FF (mode spff or kspff)");
  add_common(baseline, o, true);
  auto* eval = app.add_subcommand("eval", "greedy evaluation of a trained checkpoint");
  add_common(eval, o, true);
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint file (default: newest in --out)");

  auto* summ = app.add_subcommand("summarize", "compare final-window blocking across metrics files");
  add_common(summ, o, false);
  std::vector<std::string> inputs;
  std::int64_t window = 10000;
  summ->add_option("inputs", inputs, "metrics CSVs, optionally as label=path")->required();
  summ->add_option("--window", window, "trailing requests per worker");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  rmsa::RunConfig cfg;
  try {
    if (!summ->parsed()) {
      cfg = resolve(o);
      if (train->parsed() && !rmsa::is_learning(cfg.mode))
        throw rmsa::ConfigError("mode", "train needs mode ep or flx");
      if (baseline->parsed() && rmsa::is_learning(cfg.mode))
        throw rmsa::ConfigError("mode", "baseline needs mode spff or kspff");
    }
  } catch (const rmsa::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (train->parsed()) {
      rmsa::run_train(cfg, std::cout);
    } else if (baseline->parsed()) {
      rmsa::run_baseline(cfg, std::cout);
    } else if (eval->parsed()) {
      rmsa::run_eval(cfg, std::cout);
    } else {
      std::vector<rmsa::SummaryInput> runs;
      for (const std::string& in : inputs) {
        const auto eq = in.find('=');
        if (eq != std::string::npos) {
          runs.push_back({in.substr(0, eq), in.substr(eq + 1)});
        } else {
          std::filesystem::path p(in);
          const std::string label = p.has_parent_path() ? p.parent_path().filename().string() : p.stem().string();
          runs.push_back({label.empty() ? in : label, p});
        }
      }
      const std::string table = rmsa::summarize(runs, window);
      std::cout << table;
      if (o.out) {
        std::filesystem::create_directories(*o.out);
        std::ofstream(std::filesystem::path(*o.out) / "summary.txt") << table;
      }
    }
  } catch (const rmsa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
