#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rmsa/config.hpp"
#include "rmsa/trainer.hpp"

namespace rmsa {

// Front-end operations behind the rmsalab subcommands. Each writes its artifacts
// (metrics.csv, checkpoint-<epoch>, summary.txt) under cfg.out and a short
// human-readable report to `log`.

struct RunSummary {
  std::string mode;
  std::int64_t epochs = 0;
  std::int64_t requests = 0;
  std::int64_t blocked = 0;
  double blocking_probability = 0.0;  // whole run
  double trailing_blocking = 0.0;     // last blocking_window requests (pooled over workers)
};

RunSummary run_train(const RunConfig& cfg, std::ostream& log);
RunSummary run_baseline(const RunConfig& cfg, std::ostream& log);
/// Greedy evaluation of a checkpoint. Uses cfg.checkpoint, else the newest
/// checkpoint-<epoch> in cfg.out. Throws Error if none exists.
RunSummary run_eval(const RunConfig& cfg, std::ostream& log);

/// Baseline loop used by run_baseline; exposed for paired-stream comparisons.
PolicyRunResult run_heuristic(RmsaEnv& env, RunMode mode, std::int64_t requests,
                              MetricsLog* metrics = nullptr, int metrics_interval = 1000);

/// Reads a metrics CSV. Throws ParseError naming the offending line.
std::vector<MetricsRow> read_metrics_csv(std::istream& in);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Blocking over each worker's last `window` requests, pooled. Throws Error if `rows` is empty.
double final_window_blocking(const std::vector<MetricsRow>& rows, std::int64_t window);

struct SummaryInput {
  std::string label;
  std::filesystem::path metrics;
};

/// Table of final-window blocking per run, plus the reduction relative to the first
/// run when more than one is given.
std::string summarize(const std::vector<SummaryInput>& inputs, std::int64_t window);

void write_summary_file(const std::filesystem::path& path, const RunConfig& cfg, const RunSummary& s);

}  // namespace rmsa
