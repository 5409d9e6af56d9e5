#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace rmsa {

using NodeId = int;
using LinkId = int;

struct Link {
  LinkId id = 0;
  NodeId a = 0;
  NodeId b = 0;
  double length_km = 0.0;
};

/// Distance thresholds (km) for each modulation order. A path may use order m
/// when its length does not exceed reach for m; BPSK (m = 1) has unbounded reach.
struct ReachTable {
  double qam16_km = 625.0;
  double qam8_km = 1250.0;
  double qpsk_km = 2500.0;
};

/// Returns the highest modulation order in {1,2,3,4} usable over `distance_km`.
int modulation_for(double distance_km, const ReachTable& reach = {});

/// Number of contiguous frequency slots a demand needs: ceil(b / (m * c_grid)).
int required_slots(double bandwidth_gbps, int modulation, double c_grid_bpsk_gbps = 12.5);

/// Undirected EON graph. Immutable after construction. Nodes are 0..node_count()-1;
/// links are indexed by their id, which is dense in 0..link_count()-1.
class Topology {
 public:
  /// Validates: ids dense and unique, endpoints declared, no self-loops or parallel links,
  /// positive lengths, connected graph, slot_count > 0. Throws ValidationError.
  Topology(int node_count, std::vector<Link> links, int slot_count = 100);

  int node_count() const noexcept { return node_count_; }
  int link_count() const noexcept { return static_cast<int>(links_.size()); }
  int slot_count() const noexcept { return slot_count_; }

  const Link& link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
  const std::vector<Link>& links() const noexcept { return links_; }

  struct Adjacent {
    NodeId node;
    LinkId link;
  };
  /// Neighbours of `n`, ordered by link id.
  const std::vector<Adjacent>& adjacent(NodeId n) const {
    return adjacency_.at(static_cast<std::size_t>(n));
  }

  bool has_node(NodeId n) const noexcept { return n >= 0 && n < node_count_; }

 private:
  int node_count_;
  int slot_count_;
  std::vector<Link> links_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

/// Parses the line-oriented topology format:
///
///     nodes <count>
///     link <id> <nodeA> <nodeB> <length_km>
///
/// Blank lines and `#` comments are ignored. Node ids are integers in [0, count).
/// Throws ParseError (with line number) or ValidationError.
Topology load_topology(std::istream& in, int slot_count = 100);
Topology load_topology_file(const std::filesystem::path& path, int slot_count = 100);

struct CandidatePath {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<NodeId> nodes;       // src ... dst
  std::vector<LinkId> links;       // traversal order
  double length_km = 0.0;
  int modulation = 1;
};

/// Loopless K shortest paths by physical length (Yen). Ties are ordered by the
/// lexicographic link-id sequence, so results are deterministic. Returns fewer
/// than K paths when fewer simple paths exist. Throws ContractError if src == dst.
std::vector<CandidatePath> k_shortest_paths(const Topology& topo, NodeId src, NodeId dst, int k,
                                            const ReachTable& reach = {});

/// K candidate paths for every ordered node pair, computed once up front.
class PathTable {
 public:
  PathTable(const Topology& topo, int k, const ReachTable& reach = {});

  const std::vector<CandidatePath>& paths(NodeId src, NodeId dst) const;
  int k() const noexcept { return k_; }

 private:
  int nodes_;
  int k_;
  std::vector<std::vector<CandidatePath>> table_;
};

}  // namespace rmsa
