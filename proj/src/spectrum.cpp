#include "rmsa/spectrum.hpp"

#include <algorithm>
#include <string>

#include "rmsa/error.hpp"
#include "rmsa/kernels.hpp"

namespace rmsa {

NetworkSpectrum::NetworkSpectrum(int link_count, int slot_count)
    : links_(link_count), slots_(slot_count) {
  if (link_count < 1 || slot_count < 1) throw ContractError("spectrum needs links and slots");
  grid_.assign(static_cast<std::size_t>(links_) * static_cast<std::size_t>(slots_), 0);
}

bool NetworkSpectrum::occupied(LinkId link, int slot) const {
  if (link < 0 || link >= links_ || slot < 0 || slot >= slots_)
    throw ContractError("slot query out of range");
  return grid_[static_cast<std::size_t>(link) * static_cast<std::size_t>(slots_) +
               static_cast<std::size_t>(slot)] != 0;
}

std::span<const std::uint8_t> NetworkSpectrum::row(LinkId link) const {
  if (link < 0 || link >= links_) throw ContractError("unknown link " + std::to_string(link));
  return {grid_.data() + static_cast<std::size_t>(link) * static_cast<std::size_t>(slots_),
          static_cast<std::size_t>(slots_)};
}

void NetworkSpectrum::allocate(std::span<const LinkId> links, int start, int n, LightpathId id,
                               double expiry) {
  if (links.empty()) throw ContractError("allocate: empty path");
  if (n < 1 || start < 0 || start + n > slots_)
    throw ContractError("allocate: slot range [" + std::to_string(start) + "," +
                        std::to_string(start + n) + ") out of bounds");
  if (active_.contains(id)) throw ContractError("allocate: lightpath " + std::to_string(id) + " already active");
  for (LinkId l : links) {
    const auto r = row(l);
    if (std::any_of(r.begin() + start, r.begin() + start + n, [](std::uint8_t s) { return s != 0; }))
      throw ContractError("allocate: lightpath " + std::to_string(id) + " overlaps an allocation on link " +
                          std::to_string(l));
  }
  for (LinkId l : links) {
    auto* base = grid_.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(slots_);
    std::fill(base + start, base + start + n, std::uint8_t{1});
  }
  occupied_ += n * static_cast<int>(links.size());
  active_.emplace(id, Lightpath{{links.begin(), links.end()}, start, n, expiry});
}

void NetworkSpectrum::release(LightpathId id) {
  auto it = active_.find(id);
  if (it == active_.end()) throw ContractError("release: unknown lightpath " + std::to_string(id));
  const Lightpath& lp = it->second;
  for (LinkId l : lp.links) {
    auto* base = grid_.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(slots_);
    std::fill(base + lp.start, base + lp.start + lp.slots, std::uint8_t{0});
  }
  occupied_ -= lp.slots * static_cast<int>(lp.links.size());
  active_.erase(it);
}

void NetworkSpectrum::dump(std::ostream& out) const {
  for (LinkId l = 0; l < links_; ++l) {
    for (std::uint8_t s : row(l)) out << (s ? '1' : '0');
    out << '\n';
  }
}

std::vector<FreeBlock> available_blocks(const NetworkSpectrum& spec, std::span<const LinkId> links) {
  const auto slots = static_cast<std::size_t>(spec.slot_count());
  std::vector<std::uint8_t> used(slots, 0);
  const auto& k = kernels::active();
  for (LinkId l : links) k.or_bytes(spec.row(l).data(), used.data(), slots);

  std::vector<FreeBlock> blocks;
  std::size_t i = 0;
  while (i < slots) {
    if (used[i]) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < slots && !used[i]) ++i;
    blocks.push_back({static_cast<int>(begin), static_cast<int>(i - begin)});
  }
  return blocks;
}

std::optional<int> first_fit(std::span<const FreeBlock> blocks, int n) {
  for (const FreeBlock& b : blocks)
    if (b.size >= n) return b.start;
  return std::nullopt;
}

std::vector<FreeBlock> fitting_blocks(std::span<const FreeBlock> blocks, int n) {
  std::vector<FreeBlock> out;
  std::copy_if(blocks.begin(), blocks.end(), std::back_inserter(out),
               [n](const FreeBlock& b) { return b.size >= n; });
  return out;
}

PathStats path_stats(std::span<const FreeBlock> blocks) {
  PathStats s;
  for (const FreeBlock& b : blocks) s.total_free_slots += b.size;
  if (!blocks.empty()) s.avg_block_size = static_cast<double>(s.total_free_slots) / static_cast<double>(blocks.size());
  return s;
}

}  // namespace rmsa
