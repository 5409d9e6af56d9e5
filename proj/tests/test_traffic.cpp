#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "rmsa/traffic.hpp"

using namespace rmsa;

TEST_CASE("offered load") {
  CHECK(TrafficConfig{}.offered_load_erlang() == 150.0);
  CHECK(TrafficConfig{20, 30, 25, 100, 1}.offered_load_erlang() == 600.0);
}

TEST_CASE("request statistics match the configured distributions") {
  const TrafficConfig cfg{10, 15, 25, 100, 3};
  TrafficGenerator gen(cfg, 14);
  const int n = 100000;
  double now = 0, sum_dur = 0, sum_bw = 0;
  double bw_lo = 1e9, bw_hi = -1e9;
  std::map<std::pair<int, int>, int> pairs;
  for (int i = 0; i < n; ++i) {
    const Request r = gen.next(now);
    CHECK(r.id == i);
    CHECK(r.arrival_time > now);
    REQUIRE(r.src != r.dst);
    REQUIRE(r.src >= 0);
    REQUIRE(r.dst < 14);
    now = r.arrival_time;
    sum_dur += r.duration;
    sum_bw += r.bandwidth_gbps;
    bw_lo = std::min(bw_lo, r.bandwidth_gbps);
    bw_hi = std::max(bw_hi, r.bandwidth_gbps);
    ++pairs[{r.src, r.dst}];
  }
  CHECK(std::abs(n / now - 10.0) / 10.0 < 0.02);
  CHECK(std::abs(sum_dur / n - 15.0) / 15.0 < 0.02);
  CHECK(std::abs(sum_bw / n - 62.5) / 62.5 < 0.02);
  CHECK(bw_lo >= 25.0);
  CHECK(bw_hi <= 100.0);
  CHECK(pairs.size() == 14u * 13u);
}

TEST_CASE("ordered node pairs are uniform") {
  // 10^6 draws: each of the 182 cells expects ~5495, so 10% is about 7 sigma
  TrafficGenerator gen({10, 15, 25, 100, 8}, 14);
  std::map<std::pair<int, int>, int> pairs;
  double now = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const Request r = gen.next(now);
    now = r.arrival_time;
    ++pairs[{r.src, r.dst}];
  }
  REQUIRE(pairs.size() == 14u * 13u);
  const double expect = double(n) / (14 * 13);
  for (const auto& [p, c] : pairs) CHECK(std::abs(c - expect) / expect < 0.10);
}

TEST_CASE("same seed, same stream; different seed, different stream") {
  TrafficGenerator a({10, 15, 25, 100, 42}, 11), b({10, 15, 25, 100, 42}, 11), c({10, 15, 25, 100, 43}, 11);
  double ta = 0, tb = 0, tc = 0;
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const Request x = a.next(ta), y = b.next(tb), z = c.next(tc);
    ta = x.arrival_time;
    tb = y.arrival_time;
    tc = z.arrival_time;
    CHECK(x.src == y.src);
    CHECK(x.dst == y.dst);
    CHECK(x.bandwidth_gbps == y.bandwidth_gbps);
    CHECK(x.duration == y.duration);
    CHECK(x.arrival_time == y.arrival_time);
    differs = differs || x.arrival_time != z.arrival_time;
  }
  CHECK(differs);
}

TEST_CASE("EventQueue pops expired departures in order") {
  EventQueue q;
  q.push(5.0, 3);
  q.push(2.0, 9);
  q.push(5.0, 1);
  q.push(7.5, 4);
  CHECK(q.pop_expired(1.0).empty());
  CHECK(q.pop_expired(2.0) == std::vector<LightpathId>{9});
  CHECK(q.pop_expired(6.0) == std::vector<LightpathId>{1, 3});
  CHECK(q.size() == 1);
  CHECK(q.pop_expired(100.0) == std::vector<LightpathId>{4});
  CHECK(q.empty());
}
