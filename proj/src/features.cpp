#include "rmsa/features.hpp"

#include <algorithm>
#include <cmath>

#include "rmsa/error.hpp"

namespace rmsa {

std::size_t state_size(const FeatureConfig& cfg) {
  const auto base = static_cast<std::size_t>(2 * cfg.nodes + 1 + (2 * cfg.j_blocks + 3) * cfg.k_paths);
  return cfg.mode == TrainingMode::Episode ? base + 1 : base;
}

FeatureEncoder::FeatureEncoder(const FeatureConfig& cfg)
    : cfg_(cfg),
      size_(state_size(cfg)),
      max_slots_demand_(std::ceil(cfg.bandwidth_max / cfg.c_grid_bpsk)) {
  if (cfg.nodes < 2 || cfg.k_paths < 1 || cfg.j_blocks < 1 || cfg.slot_count < 1)
    throw ContractError("FeatureEncoder: invalid configuration");
}

StateVector FeatureEncoder::encode(const Request& req, const NetworkSpectrum& spec,
                                   std::span<const CandidatePath> paths,
                                   std::optional<EpisodePosition> position) const {
  if (cfg_.mode == TrainingMode::Episode && !position)
    throw ContractError("encode: episode mode requires an episode position");
  if (req.src < 0 || req.src >= cfg_.nodes || req.dst < 0 || req.dst >= cfg_.nodes)
    throw ContractError("encode: request endpoint out of range");
  if (static_cast<int>(paths.size()) > cfg_.k_paths) throw ContractError("encode: more than K paths");

  StateVector s;
  s.reserve(size_);
  const auto nodes = static_cast<std::size_t>(cfg_.nodes);
  s.assign(2 * nodes, 0.0);
  s[static_cast<std::size_t>(req.src)] = 1.0;
  s[nodes + static_cast<std::size_t>(req.dst)] = 1.0;
  s.push_back(std::clamp(req.duration / (2.0 * cfg_.mean_duration), 0.0, 1.0));

  const double f0 = cfg_.slot_count;
  for (int k = 0; k < cfg_.k_paths; ++k) {
    if (k >= static_cast<int>(paths.size())) {
      for (int j = 0; j < cfg_.j_blocks; ++j) {
        s.push_back(-1.0 / f0);
        s.push_back(0.0);
      }
      s.insert(s.end(), {0.0, 0.0, 0.0});
      continue;
    }
    const CandidatePath& path = paths[static_cast<std::size_t>(k)];
    const int demand = required_slots(req.bandwidth_gbps, path.modulation, cfg_.c_grid_bpsk);
    const auto blocks = available_blocks(spec, path);
    const auto fits = fitting_blocks(blocks, demand);
    for (int j = 0; j < cfg_.j_blocks; ++j) {
      if (j < static_cast<int>(fits.size())) {
        s.push_back(fits[static_cast<std::size_t>(j)].start / f0);
        s.push_back(fits[static_cast<std::size_t>(j)].size / f0);
      } else {
        s.push_back(-1.0 / f0);
        s.push_back(0.0);
      }
    }
    const PathStats st = path_stats(blocks);
    s.push_back(std::min(1.0, demand / max_slots_demand_));
    s.push_back(st.avg_block_size / f0);
    s.push_back(st.total_free_slots / f0);
  }

  if (cfg_.mode == TrainingMode::Episode) {
    const EpisodePosition p = *position;
    if (p.length < 1 || p.index < 1 || p.index > p.length)
      throw ContractError("encode: episode position out of range");
    s.push_back(static_cast<double>(p.length - p.index + 1) / p.length);
  }
  return s;
}

}  // namespace rmsa
