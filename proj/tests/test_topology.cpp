#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rmsa/error.hpp"
#include "rmsa/topology.hpp"

using namespace rmsa;

namespace {

// A=0, B=1, C=2
const char* kTriangle =
    "nodes 3\n"
    "link 0 0 1 100\n"
    "link 1 1 2 100\n"
    "link 2 0 2 100\n";

Topology parse(const std::string& text, int slots = 100) {
  std::istringstream in(text);
  return load_topology(in, slots);
}

Topology random_graph(std::mt19937_64& rng, int nodes, double density) {
  std::bernoulli_distribution edge(density);
  std::uniform_int_distribution<int> len(1, 4);  // small range: many equal-length paths
  for (;;) {
    std::vector<Link> links;
    for (int a = 0; a < nodes; ++a)
      for (int b = a + 1; b < nodes; ++b)
        if (edge(rng)) links.push_back({static_cast<LinkId>(links.size()), a, b, 100.0 * len(rng)});
    try {
      return Topology(nodes, links);
    } catch (const ValidationError&) {
      // disconnected draw; try again
    }
  }
}

void check_against_enumeration(const Topology& topo, NodeId s, NodeId d, int k) {
  const auto got = k_shortest_paths(topo, s, d, k);
  const auto all = oracle::all_simple_paths(topo, s, d);
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
  REQUIRE(got.size() == want);
  for (std::size_t i = 0; i < want; ++i) {
    CHECK(got[i].links == all[i].links);
    CHECK(got[i].length_km == doctest::Approx(all[i].length));
  }
}

}  // namespace

TEST_CASE("load_topology builds a triangle") {
  const Topology t = parse(kTriangle);
  CHECK(t.node_count() == 3);
  CHECK(t.link_count() == 3);
  CHECK(t.slot_count() == 100);
  CHECK(t.link(2).a == 0);
  CHECK(t.link(2).b == 2);
  CHECK(t.adjacent(1).size() == 2);
}

TEST_CASE("shipped topologies load") {
  const Topology nsf = load_topology_file(oracle::data_path("data/nsfnet.topo"));
  CHECK(nsf.node_count() == 14);
  CHECK(nsf.link_count() == 21);
  const Topology cost = load_topology_file(oracle::data_path("data/cost239.topo"));
  CHECK(cost.node_count() == 11);
  CHECK(cost.link_count() == 26);
}

TEST_CASE("load_topology rejects bad input") {
  SUBCASE("undeclared node") {
    CHECK_THROWS_AS(parse("nodes 3\nlink 0 0 1 100\nlink 1 1 Z 100\nlink 2 0 2 100\n"), ValidationError);
    CHECK_THROWS_AS(parse("nodes 3\nlink 0 0 3 100\n"), ValidationError);
  }
  SUBCASE("malformed line reports its number") {
    try {
      parse("nodes 3\nlink 0 0 1 100\nlink 1 1 2\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("nodes 3\nlnk 0 0 1 100\n"), ParseError);
    CHECK_THROWS_AS(parse("nodes 3\nlink 0 0 1 abc\n"), ParseError);
    CHECK_THROWS_AS(parse("link 0 0 1 100\n"), ParseError);
  }
  SUBCASE("duplicate link") {
    CHECK_THROWS_AS(parse("nodes 3\nlink 0 0 1 100\nlink 1 1 0 50\nlink 2 1 2 100\n"), ValidationError);
    CHECK_THROWS_AS(parse("nodes 3\nlink 0 0 1 100\nlink 0 1 2 50\n"), ValidationError);
  }
  SUBCASE("disconnected graph") {
    CHECK_THROWS_AS(parse("nodes 4\nlink 0 0 1 100\nlink 1 2 3 100\n"), ValidationError);
  }
  SUBCASE("non-positive length") {
    CHECK_THROWS_AS(parse("nodes 2\nlink 0 0 1 0\n"), ValidationError);
  }
}

TEST_CASE("k_shortest_paths on the triangle") {
  const Topology t = parse(kTriangle);
  const auto two = k_shortest_paths(t, 0, 2, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].links == std::vector<LinkId>{2});
  CHECK(two[0].length_km == 100.0);
  CHECK(two[1].links == std::vector<LinkId>{0, 1});
  CHECK(two[1].nodes == std::vector<NodeId>{0, 1, 2});
  CHECK(two[1].length_km == 200.0);

  CHECK(k_shortest_paths(t, 0, 2, 5).size() == 2);
  CHECK_THROWS_AS(k_shortest_paths(t, 1, 1, 2), ContractError);
}

TEST_CASE("k_shortest_paths matches brute-force enumeration on NSFNET") {
  const Topology nsf = load_topology_file(oracle::data_path("data/nsfnet.topo"));
  for (NodeId s = 0; s < nsf.node_count(); ++s)
    for (NodeId d = 0; d < nsf.node_count(); ++d)
      if (s != d) {
        CAPTURE(s);
        CAPTURE(d);
        check_against_enumeration(nsf, s, d, 5);
      }
}

TEST_CASE("property: k_shortest_paths matches enumeration on random graphs with ties") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + trial % 4;
    const Topology t = random_graph(rng, n, 0.6);
    for (int k : {1, 3, 8}) {
      std::uniform_int_distribution<int> node(0, n - 1);
      NodeId s = node(rng), d = node(rng);
      if (s == d) d = (d + 1) % n;
      CAPTURE(trial);
      check_against_enumeration(t, s, d, k);
    }
  }
}

TEST_CASE("candidate paths are loopless, sorted and carry their modulation") {
  const Topology nsf = load_topology_file(oracle::data_path("data/nsfnet.topo"));
  const PathTable table(nsf, 5);
  const PathTable again(nsf, 5);
  for (NodeId s = 0; s < 14; ++s)
    for (NodeId d = 0; d < 14; ++d) {
      if (s == d) continue;
      const auto& ps = table.paths(s, d);
      REQUIRE(ps.size() == 5);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        auto nodes = ps[i].nodes;
        std::sort(nodes.begin(), nodes.end());
        CHECK(std::adjacent_find(nodes.begin(), nodes.end()) == nodes.end());
        CHECK(ps[i].nodes.front() == s);
        CHECK(ps[i].nodes.back() == d);
        CHECK(ps[i].modulation == modulation_for(ps[i].length_km));
        if (i > 0) CHECK(ps[i - 1].length_km <= ps[i].length_km);
        CHECK(ps[i].links == again.paths(s, d)[i].links);
      }
    }
}

TEST_CASE("modulation_for uses the default reach table") {
  CHECK(modulation_for(400) == 4);
  CHECK(modulation_for(625) == 4);
  CHECK(modulation_for(626) == 3);
  CHECK(modulation_for(1250) == 3);
  CHECK(modulation_for(2000) == 2);
  CHECK(modulation_for(5000) == 1);
  CHECK(modulation_for(1e9) == 1);
  const ReachTable custom{100, 200, 300};
  CHECK(modulation_for(150, custom) == 3);

  int prev = 4;
  for (double d = 1; d < 6000; d += 7.5) {
    const int m = modulation_for(d);
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("required_slots follows the ceiling formula") {
  CHECK(required_slots(100, 4) == 2);
  CHECK(required_slots(25, 1) == 2);
  CHECK(required_slots(100, 1) == 8);
  CHECK(required_slots(62.5, 2) == 3);
  CHECK(required_slots(25, 4) == 1);
  CHECK(required_slots(100, 2, 6.25) == 8);
  CHECK_THROWS_AS(required_slots(50, 5), ContractError);

  for (double b = 25; b <= 100; b += 0.5)
    for (int m = 1; m <= 4; ++m) {
      const int n = required_slots(b, m);
      CHECK(n >= 1);
      if (m < 4) CHECK(required_slots(b, m + 1) <= n);
      if (b + 0.5 <= 100) CHECK(required_slots(b + 0.5, m) >= n);
    }
}
