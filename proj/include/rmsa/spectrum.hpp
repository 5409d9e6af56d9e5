#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rmsa/topology.hpp"

namespace rmsa {

using LightpathId = std::int64_t;

/// A maximal run of slots that is free on every link of a path. start is 0-based.
struct FreeBlock {
  int start = 0;
  int size = 0;
  friend bool operator==(const FreeBlock&, const FreeBlock&) = default;
};

struct Lightpath {
  std::vector<LinkId> links;
  int start = 0;
  int slots = 0;
  double expiry = 0.0;
};

struct PathStats {
  double avg_block_size = 0.0;
  int total_free_slots = 0;
};

/// Per-link slot occupancy plus the records of active lightpaths. Allocation keeps
/// the same slot range on every link of a path; there is no spectrum conversion.
class NetworkSpectrum {
 public:
  NetworkSpectrum(int link_count, int slot_count);
  explicit NetworkSpectrum(const Topology& topo)
      : NetworkSpectrum(topo.link_count(), topo.slot_count()) {}

  int link_count() const noexcept { return links_; }
  int slot_count() const noexcept { return slots_; }

  bool occupied(LinkId link, int slot) const;
  /// Occupancy row for one link, 1 = occupied.
  std::span<const std::uint8_t> row(LinkId link) const;

  /// Marks [start, start+n) occupied on every link. Throws ContractError on overlap,
  /// out-of-range slots or a reused id; the spectrum is unchanged in that case.
  void allocate(std::span<const LinkId> links, int start, int n, LightpathId id, double expiry);
  void allocate(const CandidatePath& path, int start, int n, LightpathId id, double expiry) {
    allocate(path.links, start, n, id, expiry);
  }

  /// Frees every slot held by `id`. Throws ContractError for an unknown id.
  void release(LightpathId id);

  const std::map<LightpathId, Lightpath>& active() const noexcept { return active_; }
  int occupied_count() const noexcept { return occupied_; }

  /// One line of 0/1 characters per link, link 0 first.
  void dump(std::ostream& out) const;

  friend bool operator==(const NetworkSpectrum& x, const NetworkSpectrum& y) {
    return x.links_ == y.links_ && x.slots_ == y.slots_ && x.grid_ == y.grid_;
  }

 private:
  int links_;
  int slots_;
  int occupied_ = 0;
  std::vector<std::uint8_t> grid_;  // links_ x slots_
  std::map<LightpathId, Lightpath> active_;
};

/// All maximal free blocks on the slot-wise intersection of the path's links,
/// ascending by start.
std::vector<FreeBlock> available_blocks(const NetworkSpectrum& spec, std::span<const LinkId> links);
inline std::vector<FreeBlock> available_blocks(const NetworkSpectrum& spec, const CandidatePath& path) {
  return available_blocks(spec, path.links);
}

/// Start of the lowest-indexed block with size >= n.
std::optional<int> first_fit(std::span<const FreeBlock> blocks, int n);

/// The blocks able to hold n slots, in order. Block j of this list is what the agent
/// selects with FS-block index j; index 0 coincides with first_fit.
std::vector<FreeBlock> fitting_blocks(std::span<const FreeBlock> blocks, int n);

/// Mean free-block size (0 with no blocks) and total free slots.
PathStats path_stats(std::span<const FreeBlock> blocks);
inline PathStats path_stats(const NetworkSpectrum& spec, const CandidatePath& path) {
  return path_stats(available_blocks(spec, path));
}

}  // namespace rmsa
