#pragma once

#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "rmsa/spectrum.hpp"
#include "rmsa/topology.hpp"

namespace rmsa {

struct TrafficConfig {
  double arrival_rate = 10.0;   // requests per time unit
  double mean_duration = 15.0;  // time units
  double bandwidth_min = 25.0;  // Gb/s
  double bandwidth_max = 100.0;
  std::uint64_t seed = 1;

  double offered_load_erlang() const { return arrival_rate * mean_duration; }
};

struct Request {
  std::int64_t id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double bandwidth_gbps = 0.0;
  double duration = 0.0;
  double arrival_time = 0.0;
};

/// Poisson arrivals with uniform endpoints and bandwidths and exponential holding times.
/// Each instance owns its random stream.
class TrafficGenerator {
 public:
  TrafficGenerator(const TrafficConfig& cfg, int node_count);

  /// Draws the request arriving after `now`. Ids increase by one per call.
  Request next(double now);

  const TrafficConfig& config() const noexcept { return cfg_; }

 private:
  TrafficConfig cfg_;
  int nodes_;
  std::int64_t next_id_ = 0;
  std::mt19937_64 rng_;
  std::exponential_distribution<double> interarrival_;
  std::exponential_distribution<double> holding_;
  std::uniform_real_distribution<double> bandwidth_;
  std::uniform_int_distribution<int> pair_;
};

/// Pending departures. Pops in (expiry, id) order.
class EventQueue {
 public:
  void push(double expiry, LightpathId id) { heap_.push({expiry, id}); }

  /// Removes and returns every id whose expiry <= now, in (expiry, id) order.
  std::vector<LightpathId> pop_expired(double now);

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

 private:
  struct Entry {
    double expiry;
    LightpathId id;
    bool operator>(const Entry& o) const {
      return expiry != o.expiry ? expiry > o.expiry : id > o.id;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

}  // namespace rmsa
