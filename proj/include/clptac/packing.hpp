#pragma once

#include "clptac/model.hpp"

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

namespace clptac {

/// Minimum corner of a placed box. Boxes keep their given axis order.
struct Placement {
  int box_id = 0;
  Dims origin{};

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct PackingSolution {
  std::vector<Placement> placements;
  Volume loaded_volume = 0;    // E(X)
  Volume unloaded_volume = 0;  // input volume minus loaded volume
  bool proven_optimal = false;
  std::chrono::nanoseconds elapsed{0};
  std::uint64_t nodes = 0;

  double occupancy(const Container& c) const {
    return static_cast<double>(loaded_volume) / static_cast<double>(c.capacity());
  }
};

struct PackConfig {
  std::chrono::duration<double> time_budget{5.0};
  /// Inputs with at most this many boxes are always searched to completion.
  int exact_threshold = 0;
  /// Rotation is not supported; setting this makes pack_max_volume throw.
  bool allow_rotation = false;
  /// Deterministic work cap in search nodes; 0 means no cap.
  std::uint64_t node_limit = 0;
};

/// True iff every placement lies inside the container and no two placed boxes overlap.
/// Throws std::invalid_argument("dangling placement reference") for unknown box ids.
bool check_feasible(std::span<const Placement> placements, std::span<const Box> boxes, const Container& container);

/// Maximum loadable volume by depth-first branch and bound with a greedy root incumbent.
///
/// Boxes are branched on in decreasing volume order (ties by id). Each box is either placed
/// at a normal-pattern coordinate, in lexicographic (x, y, z) order, or skipped; the skip
/// branch comes last. Identical boxes are placed as a prefix at increasing positions.
/// A node is pruned when loaded + min(remaining volume, free volume) cannot beat the incumbent.
/// On budget expiry the incumbent is returned with proven_optimal = false.
PackingSolution pack_max_volume(std::span<const Box> boxes, const Container& container, const PackConfig& config);

/// Exhaustive oracle for at most kBruteForceLimit boxes. Throws std::length_error above it.
inline constexpr std::size_t kBruteForceLimit = 6;
PackingSolution brute_force_pack(std::span<const Box> boxes, const Container& container);

/// Decreasing-volume first fit over extreme points, taking the lexicographically smallest
/// feasible point for each box.
PackingSolution greedy_pack(std::span<const Box> boxes, const Container& container);

/// Sorted coordinates reachable as sums of box lengths along `axis`, up to `limit`.
std::vector<Length> normal_patterns(std::span<const Box> boxes, int axis, Length limit);

}  // namespace clptac
