#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "rmsa/env.hpp"
#include "rmsa/features.hpp"
#include "rmsa/neuralnet.hpp"

namespace rmsa {

/// Gamma_i = sum_{j >= i} gamma^(j - i) * r_j over exactly the given rewards.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

/// Sliding-window returns: for each of the first `window` positions i,
/// sum_{j=0}^{window-1} gamma^j * r_{i+j}. Needs at least 2*window - 1 rewards.
std::vector<double> window_returns(std::span<const double> rewards, std::size_t window, double gamma);

/// delta_i = returns_i - values_i.
std::vector<double> advantages(std::span<const double> returns, std::span<const double> values);

/// First index whose cumulative probability reaches `draw`; the last index when
/// rounding leaves the total short of the draw.
int roulette_select(std::span<const double> probs, double draw);
int roulette_select(std::span<const double> probs, std::mt19937_64& rng);

int greedy_select(std::span<const double> probs);

struct ExperienceSample {
  StateVector state;
  int action = 0;
  double value = 0.0;
  double reward = 0.0;
};

struct TrainingConfig {
  double gamma = 0.95;
  double alpha = 0.01;
  int batch = 50;  // N
  AdamConfig adam{};
  EntropySign entropy_sign = EntropySign::Bonus;
  int workers = 16;
  TrainingMode mode = TrainingMode::Window;
  std::int64_t epochs = 0;
  std::uint64_t seed = 1;
  int hidden_layers = 5;
  int hidden_width = 128;
  int metrics_interval = 1000;        // requests per metrics row, per worker
  std::int64_t checkpoint_interval = 0;  // epochs; 0 = final checkpoint only
  std::size_t blocking_window = 10000;   // trailing requests for the final blocking figure
};

/// One metrics CSV row: a worker's last `metrics_interval` requests.
struct MetricsRow {
  std::int64_t epoch = 0;
  int worker = 0;
  std::int64_t requests_total = 0;
  std::int64_t requests_blocked = 0;
  double cum_reward = 0.0;
  double blocking_prob = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,worker,requests_total,requests_blocked,cum_reward_1k,blocking_prob,policy_loss,value_loss,entropy";

void write_metrics_row(std::ostream& out, const MetricsRow& row);

/// Thread-safe, append-only metrics sink. Rows are also kept in memory.
class MetricsLog {
 public:
  MetricsLog() = default;
  /// Writes the header immediately when `csv` is given.
  explicit MetricsLog(std::ostream* csv);

  void append(const MetricsRow& row);
  std::vector<MetricsRow> rows() const;

 private:
  mutable std::mutex mu_;
  std::ostream* csv_ = nullptr;
  std::vector<MetricsRow> rows_;
};

/// The shared parameters of all actor-learners. Reads and writes are whole-set
/// operations under one lock; the epoch counter is the number of applied gradients.
class GlobalParams {
 public:
  GlobalParams(ParamSet init, const AdamConfig& adam, std::int64_t epoch_budget);

  void snapshot(ParamSet& local) const;
  ParamSet copy() const;

  /// Applies one gradient. Returns the new epoch count, or nullopt once the budget is spent.
  std::optional<std::int64_t> apply(const GradientSet& g);

  std::int64_t epoch() const noexcept { return epoch_.load(); }
  bool exhausted() const noexcept { return epoch_.load() >= budget_; }
  /// Stops every worker at its next check.
  void abort() noexcept { aborted_ = true; }
  bool aborted() const noexcept { return aborted_.load(); }

  /// Called with (epoch, snapshot) after every successful apply, outside the lock.
  std::function<void(std::int64_t, const ParamSet&)> on_epoch;
  std::int64_t snapshot_every = 0;

 private:
  mutable std::mutex mu_;
  ParamSet params_;
  AdamConfig adam_;
  std::int64_t budget_;
  std::atomic<std::int64_t> epoch_{0};
  std::atomic<bool> aborted_{false};
};

/// Everything an actor-learner needs that is shared read-only.
struct WorkerContext {
  const Topology* topology = nullptr;
  const PathTable* paths = nullptr;
  EnvConfig env;          // traffic.seed is the base seed; worker w uses base + w
  FeatureConfig features; // mode must match cfg.mode
  TrainingConfig cfg;
  MetricsLog* metrics = nullptr;
};

struct WorkerReport {
  int worker = 0;
  std::int64_t requests = 0;
  std::int64_t blocked = 0;
  std::int64_t updates = 0;
  double trailing_blocking = 0.0;  // over cfg.blocking_window
  std::size_t trailing_requests = 0;
  std::size_t trailing_blocked = 0;
  std::vector<std::size_t> buffer_sizes_at_update;  // FLX: buffer length when each update fired
};

/// Episode-based actor-learner: train on every N consecutive requests, returns
/// truncated at the episode end, state carries the position indicator.
WorkerReport run_actor_learner_ep(int worker_id, GlobalParams& global, const WorkerContext& ctx);

/// Sliding-window actor-learner: train whenever 2N-1 samples are buffered, on the
/// first N, each return spanning exactly N rewards; sync when N-1 remain.
WorkerReport run_actor_learner_flx(int worker_id, GlobalParams& global, const WorkerContext& ctx);

struct TrainingResult {
  std::int64_t epochs = 0;
  ParamSet params;
  std::vector<WorkerReport> workers;
  std::vector<MetricsRow> metrics;

  /// Pooled blocking over every worker's trailing window.
  double trailing_blocking() const;
};

/// Spawns cfg.workers actor-learners (threads when more than one) and runs them
/// until cfg.epochs gradient applications. `on_checkpoint` receives every
/// cfg.checkpoint_interval-th snapshot. A worker failure aborts the run and rethrows.
TrainingResult run_training(const WorkerContext& ctx,
                            std::function<void(std::int64_t, const ParamSet&)> on_checkpoint = {});

/// Feature configuration implied by a topology, environment and training setup.
FeatureConfig make_feature_config(const Topology& topo, const PathTable& paths, const EnvConfig& env,
                                  TrainingMode mode);

struct PolicyRunResult {
  std::int64_t requests = 0;
  std::int64_t blocked = 0;
  double blocking_probability() const {
    return requests ? static_cast<double>(blocked) / static_cast<double>(requests) : 0.0;
  }
};

/// Serves `requests` requests with a fixed policy (no training). Greedy takes the
/// arg-max action, otherwise roulette with `seed`. Episode-mode states cycle the
/// position indicator through 1..episode_length.
PolicyRunResult run_policy(const ParamSet& params, RmsaEnv& env, const FeatureEncoder& encoder,
                           std::int64_t requests, bool greedy, int episode_length = 50,
                           std::uint64_t seed = 1, MetricsLog* metrics = nullptr,
                           int metrics_interval = 1000);

}  // namespace rmsa
