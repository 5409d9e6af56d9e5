#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "rmsa/env.hpp"
#include "rmsa/neuralnet.hpp"
#include "rmsa/topology.hpp"
#include "rmsa/trainer.hpp"

namespace rmsa {

enum class RunMode { Episode, Window, ShortestPathFirstFit, KShortestPathFirstFit };

std::string to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);  // ep | flx | spff | kspff
bool is_learning(RunMode m);

/// All experiment knobs. Defaults reproduce the NSFNET evaluation setup.
struct RunConfig {
  std::string topology = "data/nsfnet.topo";
  int slots = 100;

  double arrival_rate = 10.0;
  double mean_duration = 15.0;
  double bandwidth_min = 25.0;
  double bandwidth_max = 100.0;
  std::uint64_t seed = 1;

  int k_paths = 5;
  int j_blocks = 1;
  double reach_16qam = 625.0;
  double reach_8qam = 1250.0;
  double reach_qpsk = 2500.0;
  double c_grid_bpsk = 12.5;

  int hidden_layers = 5;
  int hidden_width = 128;
  double gamma = 0.95;
  double alpha = 0.01;
  int batch = 50;
  double learning_rate = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double grad_norm_cap = 0.0;
  std::string entropy_sign = "bonus";  // bonus | literal
  int workers = 16;

  RunMode mode = RunMode::Window;
  std::int64_t epochs = 1000;
  std::int64_t requests = 100000;  // baseline / eval length
  std::int64_t checkpoint_interval = 0;
  int metrics_interval = 1000;
  std::int64_t blocking_window = 10000;
  std::string out = "out";
  std::string checkpoint;  // eval input; empty = newest checkpoint-* under out

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  ReachTable reach() const { return {reach_16qam, reach_8qam, reach_qpsk}; }
  TrafficConfig traffic() const;
  EnvConfig env() const;
  TrainingConfig training() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, bad values and
/// out-of-range settings throw ConfigError naming the field.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::string& text);
/// Like parse_config; a relative topology path is resolved against the config file's directory
/// when it exists there.
RunConfig load_config_file(const std::filesystem::path& path);

/// Every key, one per line, in a stable order. parse_config(serialize) round-trips exactly.
std::string serialize_config(const RunConfig& cfg);

/// Range checks shared by the parser and callers that build configs in code.
void validate_config(const RunConfig& cfg);

}  // namespace rmsa
