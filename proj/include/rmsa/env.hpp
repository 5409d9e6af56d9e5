#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>

#include "rmsa/spectrum.hpp"
#include "rmsa/topology.hpp"
#include "rmsa/traffic.hpp"

namespace rmsa {

struct ProvisionOutcome {
  bool accepted = false;
  std::optional<int> path_index;
  int start_slot = -1;
  int n_slots = 0;
  double reward = -1.0;  // +1 accepted, -1 blocked
};

/// Blocking counters plus a bounded history of recent outcomes.
class BlockingStats {
 public:
  explicit BlockingStats(std::size_t history = 100000) : capacity_(history) {}

  void record(bool accepted);

  std::int64_t total() const noexcept { return total_; }
  std::int64_t blocked() const noexcept { return blocked_; }

  /// blocked / total over the whole run, or over the trailing `window` requests
  /// (all of them if fewer were seen). Throws ContractError when the window is empty
  /// or longer than the retained history.
  double blocking_probability(std::optional<std::size_t> window = std::nullopt) const;

 private:
  std::size_t capacity_;
  std::int64_t total_ = 0;
  std::int64_t blocked_ = 0;
  std::deque<bool> recent_;  // true = blocked
};

struct EnvConfig {
  TrafficConfig traffic;
  int j_blocks = 1;
  double c_grid_bpsk = 12.5;
  std::size_t history = 100000;
};

/// One request at a time: `next_request` advances the clock and releases expired
/// lightpaths, then exactly one of step / sp_ff / ksp_ff services or blocks it.
class RmsaEnv {
 public:
  /// `topo` and `paths` must outlive the environment.
  RmsaEnv(const Topology& topo, const PathTable& paths, const EnvConfig& cfg);

  const Request& next_request();
  const Request& current() const { return current_; }
  double now() const noexcept { return now_; }

  std::span<const CandidatePath> candidates(const Request& req) const {
    return paths_->paths(req.src, req.dst);
  }
  int action_count() const noexcept { return paths_->k() * cfg_.j_blocks; }

  /// Action a selects path a / J and FS-block a % J among the blocks that fit the
  /// demand. An unusable choice blocks the request; nothing falls back.
  ProvisionOutcome step(const Request& req, int action);

  /// Shortest candidate path, first fit.
  ProvisionOutcome sp_ff(const Request& req);
  /// Candidate paths in ascending length, first fit on each.
  ProvisionOutcome ksp_ff(const Request& req);

  const BlockingStats& stats() const noexcept { return stats_; }
  const NetworkSpectrum& spectrum() const noexcept { return spectrum_; }
  const Topology& topology() const noexcept { return *topo_; }
  const EnvConfig& config() const noexcept { return cfg_; }
  std::size_t pending_departures() const noexcept { return departures_.size(); }

 private:
  ProvisionOutcome try_path(const Request& req, int k, int block);
  ProvisionOutcome finish(ProvisionOutcome out);

  const Topology* topo_;
  const PathTable* paths_;
  EnvConfig cfg_;
  TrafficGenerator traffic_;
  NetworkSpectrum spectrum_;
  EventQueue departures_;
  BlockingStats stats_;
  Request current_;
  double now_ = 0.0;
  bool serviced_ = true;
};

}  // namespace rmsa
