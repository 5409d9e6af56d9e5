#include "rmsa/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "rmsa/error.hpp"

namespace rmsa {

int modulation_for(double distance_km, const ReachTable& reach) {
  if (distance_km <= reach.qam16_km) return 4;
  if (distance_km <= reach.qam8_km) return 3;
  if (distance_km <= reach.qpsk_km) return 2;
  return 1;
}

int required_slots(double bandwidth_gbps, int modulation, double c_grid_bpsk_gbps) {
  if (modulation < 1 || modulation > 4)
    throw ContractError("modulation order must be in [1,4], got " + std::to_string(modulation));
  if (!(bandwidth_gbps > 0.0)) throw ContractError("bandwidth must be positive");
  const double n = std::ceil(bandwidth_gbps / (modulation * c_grid_bpsk_gbps));
  return std::max(1, static_cast<int>(n));
}

Topology::Topology(int node_count, std::vector<Link> links, int slot_count)
    : node_count_(node_count), slot_count_(slot_count) {
  if (node_count_ < 2) throw ValidationError("topology needs at least 2 nodes");
  if (slot_count_ < 1) throw ValidationError("slot count must be positive");

  std::sort(links.begin(), links.end(), [](const Link& x, const Link& y) { return x.id < y.id; });
  std::set<std::pair<NodeId, NodeId>> endpoints;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    if (i > 0 && links[i - 1].id == l.id)
      throw ValidationError("duplicate link id " + std::to_string(l.id));
    if (l.id != static_cast<LinkId>(i))
      throw ValidationError("link ids must be dense from 0; missing id " + std::to_string(i));
    if (!has_node(l.a) || !has_node(l.b))
      throw ValidationError("link " + std::to_string(l.id) + " references an undeclared node");
    if (l.a == l.b) throw ValidationError("link " + std::to_string(l.id) + " is a self-loop");
    if (!(l.length_km > 0.0) || !std::isfinite(l.length_km))
      throw ValidationError("link " + std::to_string(l.id) + " must have a positive length");
    if (!endpoints.emplace(std::min(l.a, l.b), std::max(l.a, l.b)).second)
      throw ValidationError("duplicate link between nodes " + std::to_string(l.a) + " and " +
                            std::to_string(l.b));
  }
  links_ = std::move(links);

  adjacency_.resize(static_cast<std::size_t>(node_count_));
  for (const Link& l : links_) {
    adjacency_[static_cast<std::size_t>(l.a)].push_back({l.b, l.id});
    adjacency_[static_cast<std::size_t>(l.b)].push_back({l.a, l.id});
  }

  std::vector<bool> seen(static_cast<std::size_t>(node_count_), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (const auto& adj : adjacency_[static_cast<std::size_t>(n)]) {
      if (!seen[static_cast<std::size_t>(adj.node)]) {
        seen[static_cast<std::size_t>(adj.node)] = true;
        ++reached;
        stack.push_back(adj.node);
      }
    }
  }
  if (reached != node_count_) throw ValidationError("topology graph is disconnected");
}

namespace {

template <typename T>
std::optional<T> parse_number(const std::string& token) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

}  // namespace

Topology load_topology(std::istream& in, int slot_count) {
  std::optional<int> node_count;
  std::vector<Link> links;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "nodes") {
      if (node_count) throw ParseError(line_no, "repeated 'nodes' line");
      if (tok.size() != 2) throw ParseError(line_no, "expected 'nodes <count>'");
      node_count = parse_number<int>(tok[1]);
      if (!node_count || *node_count < 1) throw ParseError(line_no, "bad node count '" + tok[1] + "'");
    } else if (tok[0] == "link") {
      if (!node_count) throw ParseError(line_no, "'link' before 'nodes'");
      if (tok.size() != 5) throw ParseError(line_no, "expected 'link <id> <nodeA> <nodeB> <length_km>'");
      const auto id = parse_number<int>(tok[1]);
      const auto len = parse_number<double>(tok[4]);
      if (!id || *id < 0) throw ParseError(line_no, "bad link id '" + tok[1] + "'");
      if (!len) throw ParseError(line_no, "bad link length '" + tok[4] + "'");
      Link l{*id, 0, 0, *len};
      for (int e = 0; e < 2; ++e) {
        const std::string& t = tok[2 + static_cast<std::size_t>(e)];
        const auto n = parse_number<int>(t);
        if (!n || *n < 0 || *n >= *node_count)
          throw ValidationError("line " + std::to_string(line_no) + ": link " + tok[1] +
                                " references undeclared node " + t);
        (e == 0 ? l.a : l.b) = *n;
      }
      links.push_back(l);
    } else {
      throw ParseError(line_no, "unknown directive '" + tok[0] + "'");
    }
  }
  if (!node_count) throw ParseError(line_no, "missing 'nodes' line");
  return Topology(*node_count, std::move(links), slot_count);
}

Topology load_topology_file(const std::filesystem::path& path, int slot_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open topology file " + path.string());
  return load_topology(in, slot_count);
}

namespace {

struct RawPath {
  double length = 0.0;
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
};

bool path_less(const RawPath& x, const RawPath& y) {
  if (x.length != y.length) return x.length < y.length;
  return x.links < y.links;
}

double sum_length(const Topology& topo, const std::vector<LinkId>& links) {
  double s = 0.0;
  for (LinkId l : links) s += topo.link(l).length_km;
  return s;
}

// Dijkstra over (length, link sequence) labels. Appending the same link to two
// distinct simple paths preserves their order, so label-setting stays exact.
std::optional<RawPath> best_path(const Topology& topo, NodeId src, NodeId dst,
                                 const std::vector<bool>& node_blocked,
                                 const std::vector<bool>& link_blocked) {
  const auto n = static_cast<std::size_t>(topo.node_count());
  std::vector<std::optional<RawPath>> label(n);
  std::vector<bool> done(n, false);
  label[static_cast<std::size_t>(src)] = RawPath{0.0, {src}, {}};

  for (;;) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || !label[i]) continue;
      if (u == n || path_less(*label[i], *label[u])) u = i;
    }
    if (u == n) return std::nullopt;
    if (static_cast<NodeId>(u) == dst) return label[u];
    done[u] = true;
    for (const auto& adj : topo.adjacent(static_cast<NodeId>(u))) {
      const auto v = static_cast<std::size_t>(adj.node);
      if (done[v] || node_blocked[v] || link_blocked[static_cast<std::size_t>(adj.link)]) continue;
      RawPath cand = *label[u];
      cand.length += topo.link(adj.link).length_km;
      cand.nodes.push_back(adj.node);
      cand.links.push_back(adj.link);
      if (!label[v] || path_less(cand, *label[v])) label[v] = std::move(cand);
    }
  }
}

}  // namespace

std::vector<CandidatePath> k_shortest_paths(const Topology& topo, NodeId src, NodeId dst, int k,
                                            const ReachTable& reach) {
  if (!topo.has_node(src) || !topo.has_node(dst))
    throw ContractError("k_shortest_paths: unknown node");
  if (src == dst) throw ContractError("k_shortest_paths: source equals destination");
  if (k < 1) throw ContractError("k_shortest_paths: K must be positive");

  const auto n = static_cast<std::size_t>(topo.node_count());
  const auto m = static_cast<std::size_t>(topo.link_count());
  std::vector<RawPath> accepted;
  auto cmp = [](const RawPath& x, const RawPath& y) { return path_less(x, y); };
  std::set<RawPath, decltype(cmp)> candidates(cmp);

  {
    auto first = best_path(topo, src, dst, std::vector<bool>(n, false), std::vector<bool>(m, false));
    if (!first) return {};
    first->length = sum_length(topo, first->links);
    accepted.push_back(std::move(*first));
  }

  while (static_cast<int>(accepted.size()) < k) {
    const RawPath prev = accepted.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const NodeId spur = prev.nodes[i];
      std::vector<bool> node_blocked(n, false);
      std::vector<bool> link_blocked(m, false);
      for (std::size_t r = 0; r < i; ++r) node_blocked[static_cast<std::size_t>(prev.nodes[r])] = true;
      for (const RawPath& p : accepted) {
        if (p.links.size() > i && std::equal(prev.links.begin(), prev.links.begin() + static_cast<std::ptrdiff_t>(i),
                                             p.links.begin()))
          link_blocked[static_cast<std::size_t>(p.links[i])] = true;
      }
      auto spur_path = best_path(topo, spur, dst, node_blocked, link_blocked);
      if (!spur_path) continue;

      RawPath total;
      total.nodes.assign(prev.nodes.begin(), prev.nodes.begin() + static_cast<std::ptrdiff_t>(i));
      total.nodes.insert(total.nodes.end(), spur_path->nodes.begin(), spur_path->nodes.end());
      total.links.assign(prev.links.begin(), prev.links.begin() + static_cast<std::ptrdiff_t>(i));
      total.links.insert(total.links.end(), spur_path->links.begin(), spur_path->links.end());
      total.length = sum_length(topo, total.links);
      const bool known = std::any_of(accepted.begin(), accepted.end(),
                                     [&](const RawPath& p) { return p.links == total.links; });
      if (!known) candidates.insert(std::move(total));
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }

  std::vector<CandidatePath> out;
  out.reserve(accepted.size());
  for (RawPath& p : accepted) {
    CandidatePath c;
    c.src = src;
    c.dst = dst;
    c.nodes = std::move(p.nodes);
    c.links = std::move(p.links);
    c.length_km = p.length;
    c.modulation = modulation_for(c.length_km, reach);
    out.push_back(std::move(c));
  }
  return out;
}

PathTable::PathTable(const Topology& topo, int k, const ReachTable& reach)
    : nodes_(topo.node_count()), k_(k) {
  table_.resize(static_cast<std::size_t>(nodes_ * nodes_));
  for (NodeId s = 0; s < nodes_; ++s)
    for (NodeId d = 0; d < nodes_; ++d)
      if (s != d) table_[static_cast<std::size_t>(s * nodes_ + d)] = k_shortest_paths(topo, s, d, k, reach);
}

const std::vector<CandidatePath>& PathTable::paths(NodeId src, NodeId dst) const {
  if (src < 0 || dst < 0 || src >= nodes_ || dst >= nodes_ || src == dst)
    throw ContractError("PathTable: invalid node pair");
  return table_[static_cast<std::size_t>(src * nodes_ + dst)];
}

}  // namespace rmsa
