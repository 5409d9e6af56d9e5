#include "rmsa/traffic.hpp"

#include "rmsa/error.hpp"

namespace rmsa {

TrafficGenerator::TrafficGenerator(const TrafficConfig& cfg, int node_count)
    : cfg_(cfg),
      nodes_(node_count),
      rng_(cfg.seed),
      interarrival_(cfg.arrival_rate),
      holding_(1.0 / cfg.mean_duration),
      bandwidth_(cfg.bandwidth_min, cfg.bandwidth_max),
      pair_(0, node_count * (node_count - 1) - 1) {
  if (!(cfg.arrival_rate > 0.0)) throw ContractError("arrival_rate must be positive");
  if (!(cfg.mean_duration > 0.0)) throw ContractError("mean_duration must be positive");
  if (!(cfg.bandwidth_min > 0.0) || cfg.bandwidth_max < cfg.bandwidth_min)
    throw ContractError("bandwidth range must satisfy 0 < min <= max");
  if (node_count < 2) throw ContractError("traffic needs at least two nodes");
}

Request TrafficGenerator::next(double now) {
  Request r;
  r.id = next_id_++;
  r.arrival_time = now + interarrival_(rng_);
  // One draw over the n(n-1) ordered pairs with src != dst.
  const int p = pair_(rng_);
  r.src = p / (nodes_ - 1);
  const int d = p % (nodes_ - 1);
  r.dst = d >= r.src ? d + 1 : d;
  r.bandwidth_gbps = bandwidth_(rng_);
  r.duration = holding_(rng_);
  return r;
}

std::vector<LightpathId> EventQueue::pop_expired(double now) {
  std::vector<LightpathId> out;
  while (!heap_.empty() && heap_.top().expiry <= now) {
    out.push_back(heap_.top().id);
    heap_.pop();
  }
  return out;
}

}  // namespace rmsa
