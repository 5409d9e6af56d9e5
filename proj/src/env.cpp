#include "rmsa/env.hpp"

#include "rmsa/error.hpp"

namespace rmsa {

void BlockingStats::record(bool accepted) {
  ++total_;
  if (!accepted) ++blocked_;
  if (capacity_ == 0) return;
  recent_.push_back(!accepted);
  if (recent_.size() > capacity_) recent_.pop_front();
}

double BlockingStats::blocking_probability(std::optional<std::size_t> window) const {
  if (total_ == 0) throw ContractError("blocking probability of an empty run is undefined");
  if (!window) return static_cast<double>(blocked_) / static_cast<double>(total_);
  if (*window == 0) throw ContractError("blocking probability over an empty window is undefined");
  if (*window > capacity_) throw ContractError("window exceeds retained history");
  const std::size_t n = std::min(*window, recent_.size());
  std::size_t blocked = 0;
  for (auto it = recent_.end() - static_cast<std::ptrdiff_t>(n); it != recent_.end(); ++it) blocked += *it;
  return static_cast<double>(blocked) / static_cast<double>(n);
}

RmsaEnv::RmsaEnv(const Topology& topo, const PathTable& paths, const EnvConfig& cfg)
    : topo_(&topo),
      paths_(&paths),
      cfg_(cfg),
      traffic_(cfg.traffic, topo.node_count()),
      spectrum_(topo),
      stats_(cfg.history) {
  if (cfg.j_blocks < 1) throw ContractError("J must be positive");
}

const Request& RmsaEnv::next_request() {
  if (!serviced_) throw ContractError("next_request: previous request was never serviced");
  current_ = traffic_.next(now_);
  now_ = current_.arrival_time;
  for (LightpathId id : departures_.pop_expired(now_)) spectrum_.release(id);
  serviced_ = false;
  return current_;
}

ProvisionOutcome RmsaEnv::finish(ProvisionOutcome out) {
  serviced_ = true;
  stats_.record(out.accepted);
  return out;
}

ProvisionOutcome RmsaEnv::try_path(const Request& req, int k, int block) {
  ProvisionOutcome out;
  out.path_index = k;
  const auto paths = candidates(req);
  if (k >= static_cast<int>(paths.size())) return out;
  const CandidatePath& path = paths[static_cast<std::size_t>(k)];
  const int n = required_slots(req.bandwidth_gbps, path.modulation, cfg_.c_grid_bpsk);
  const auto fits = fitting_blocks(available_blocks(spectrum_, path), n);
  if (block >= static_cast<int>(fits.size())) return out;

  const int start = fits[static_cast<std::size_t>(block)].start;
  const double expiry = req.arrival_time + req.duration;
  spectrum_.allocate(path, start, n, req.id, expiry);
  departures_.push(expiry, req.id);
  out.accepted = true;
  out.start_slot = start;
  out.n_slots = n;
  out.reward = 1.0;
  return out;
}

ProvisionOutcome RmsaEnv::step(const Request& req, int action) {
  if (action < 0 || action >= action_count())
    throw ContractError("step: action " + std::to_string(action) + " outside [0," +
                        std::to_string(action_count()) + ")");
  return finish(try_path(req, action / cfg_.j_blocks, action % cfg_.j_blocks));
}

ProvisionOutcome RmsaEnv::sp_ff(const Request& req) { return finish(try_path(req, 0, 0)); }

ProvisionOutcome RmsaEnv::ksp_ff(const Request& req) {
  const int k = static_cast<int>(candidates(req).size());
  for (int i = 0; i < k; ++i) {
    ProvisionOutcome out = try_path(req, i, 0);
    if (out.accepted) return finish(out);
  }
  return finish(ProvisionOutcome{});
}

}  // namespace rmsa
