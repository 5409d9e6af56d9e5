#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rmsa/spectrum.hpp"
#include "rmsa/topology.hpp"
#include "rmsa/traffic.hpp"

namespace rmsa {

using StateVector = std::vector<double>;

enum class TrainingMode { Episode, Window };

/// 1-based position of a request within its episode of `length` requests.
struct EpisodePosition {
  int index = 1;
  int length = 1;
};

struct FeatureConfig {
  int nodes = 0;
  int k_paths = 5;
  int j_blocks = 1;
  int slot_count = 100;
  double mean_duration = 15.0;
  double c_grid_bpsk = 12.5;
  double bandwidth_max = 100.0;
  TrainingMode mode = TrainingMode::Window;
};

/// Length of the encoded state: 2|V| + 1 + (2J + 3)K, plus one in episode mode.
std::size_t state_size(const FeatureConfig& cfg);

/// Flattens a request and the spectrum of its candidate paths into a normalized state.
///
/// Layout: one-hot source, one-hot destination, holding time / (2 * mean duration)
/// clipped to [0, 1], then for each of the K paths: (start, size) of each of the
/// first J blocks able to hold the path's slot demand, the slot demand, the mean
/// free-block size and the total free slots. Slot indices, block sizes and totals
/// are divided by the slot count; the demand by ceil(bandwidth_max / c_grid). A
/// missing block is (-1, 0) before scaling; a missing path (fewer than K exist) has
/// sentinel blocks and zeros elsewhere. Episode mode appends (N - i + 1) / N.
class FeatureEncoder {
 public:
  explicit FeatureEncoder(const FeatureConfig& cfg);

  const FeatureConfig& config() const noexcept { return cfg_; }
  std::size_t size() const noexcept { return size_; }

  StateVector encode(const Request& req, const NetworkSpectrum& spec,
                     std::span<const CandidatePath> paths,
                     std::optional<EpisodePosition> position = std::nullopt) const;

 private:
  FeatureConfig cfg_;
  std::size_t size_;
  double max_slots_demand_;
};

}  // namespace rmsa
