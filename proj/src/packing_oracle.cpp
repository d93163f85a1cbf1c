// Exhaustive reference for pack_max_volume. Shares no search code with the branch and bound.

#include "clptac/packing.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>

namespace clptac {

namespace {

std::vector<Length> subset_sums(const std::vector<Box>& boxes, size_t axis, Length limit) {
  std::set<Length> sums;
  const size_t n = boxes.size();
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    Length total = 0;
    for (size_t i = 0; i < n; ++i) {
      if (s & (1u << i)) total += boxes[i].lengths[axis];
    }
    if (total <= limit) sums.insert(total);
  }
  return {sums.begin(), sums.end()};
}

bool disjoint(const Dims& ao, const Dims& al, const Dims& bo, const Dims& bl) {
  for (size_t a = 0; a < 3; ++a) {
    if (ao[a] + al[a] <= bo[a] || bo[a] + bl[a] <= ao[a]) return true;
  }
  return false;
}

// Assigns a coordinate to every box of the subset in turn. Since a packing is a set of
// positions, trying every coordinate for every box covers every placement order.
bool assign(const std::vector<Box>& subset, const std::array<std::vector<Length>, 3>& coords,
            const Container& c, std::vector<Dims>& origins, size_t k) {
  if (k == subset.size()) return true;
  const auto& len = subset[k].lengths;
  for (Length x : coords[0]) {
    if (x + len[0] > c.dims[0]) continue;
    for (Length y : coords[1]) {
      if (y + len[1] > c.dims[1]) continue;
      for (Length z : coords[2]) {
        if (z + len[2] > c.dims[2]) continue;
        Dims o{x, y, z};
        bool ok = true;
        for (size_t j = 0; j < k && ok; ++j) ok = disjoint(o, len, origins[j], subset[j].lengths);
        if (!ok) continue;
        origins[k] = o;
        if (assign(subset, coords, c, origins, k + 1)) return true;
      }
    }
  }
  return false;
}

}  // namespace

PackingSolution brute_force_pack(std::span<const Box> boxes, const Container& container) {
  if (boxes.size() > kBruteForceLimit) throw std::length_error("oracle size exceeded");
  const auto start = std::chrono::steady_clock::now();
  const size_t n = boxes.size();

  std::vector<std::uint32_t> subsets;
  for (std::uint32_t s = 0; s < (1u << n); ++s) subsets.push_back(s);
  auto subset_volume = [&](std::uint32_t s) {
    Volume v = 0;
    for (size_t i = 0; i < n; ++i) {
      if (s & (1u << i)) v += boxes[i].volume();
    }
    return v;
  };
  std::stable_sort(subsets.begin(), subsets.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return subset_volume(a) > subset_volume(b); });

  PackingSolution best;
  best.proven_optimal = true;
  for (std::uint32_t s : subsets) {
    const Volume v = subset_volume(s);
    if (v > container.capacity()) continue;
    std::vector<Box> subset;
    for (size_t i = 0; i < n; ++i) {
      if (s & (1u << i)) subset.push_back(boxes[i]);
    }
    std::array<std::vector<Length>, 3> coords;
    for (size_t a = 0; a < 3; ++a) coords[a] = subset_sums(subset, a, container.dims[a]);
    std::vector<Dims> origins(subset.size());
    if (!assign(subset, coords, container, origins, 0)) continue;
    for (size_t i = 0; i < subset.size(); ++i) best.placements.push_back({subset[i].id, origins[i]});
    best.loaded_volume = v;
    break;
  }
  best.unloaded_volume = total_volume(boxes) - best.loaded_volume;
  best.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  return best;
}

}  // namespace clptac
