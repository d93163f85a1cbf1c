#include "clptac/packing.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace clptac {

namespace {

using Clock = std::chrono::steady_clock;

bool overlaps(const Dims& a_origin, const Dims& a_len, const Dims& b_origin, const Dims& b_len) {
  for (size_t axis = 0; axis < 3; ++axis) {
    if (a_origin[axis] + a_len[axis] <= b_origin[axis] || b_origin[axis] + b_len[axis] <= a_origin[axis]) {
      return false;
    }
  }
  return true;
}

bool fits_in(const Dims& origin, const Dims& len, const Container& c) {
  for (size_t axis = 0; axis < 3; ++axis) {
    if (origin[axis] < 0 || origin[axis] + len[axis] > c.dims[axis]) return false;
  }
  return true;
}

bool fits_empty(const Box& b, const Container& c) {
  return b.lengths[0] <= c.dims[0] && b.lengths[1] <= c.dims[1] && b.lengths[2] <= c.dims[2];
}

std::vector<Box> search_order(std::span<const Box> boxes, const Container& c) {
  std::vector<Box> out;
  for (const auto& b : boxes) {
    if (fits_empty(b, c)) out.push_back(b);
  }
  std::stable_sort(out.begin(), out.end(), [](const Box& a, const Box& b) {
    if (a.volume() != b.volume()) return a.volume() > b.volume();
    return a.id < b.id;
  });
  return out;
}

PackingSolution finish(std::vector<Placement> placements, Volume loaded, std::span<const Box> boxes, bool optimal,
                       Clock::time_point start, std::uint64_t nodes) {
  PackingSolution s;
  std::sort(placements.begin(), placements.end(),
            [](const Placement& a, const Placement& b) { return a.box_id < b.box_id; });
  s.placements = std::move(placements);
  s.loaded_volume = loaded;
  s.unloaded_volume = total_volume(boxes) - loaded;
  s.proven_optimal = optimal;
  s.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  s.nodes = nodes;
  return s;
}

class BranchAndBound {
 public:
  BranchAndBound(std::vector<Box> order, const Container& container, const PackConfig& config, Clock::time_point start)
      : order_(std::move(order)), container_(container), start_(start) {
    const size_t n = order_.size();
    suffix_volume_.assign(n + 1, 0);
    for (size_t k = n; k-- > 0;) suffix_volume_[k] = suffix_volume_[k + 1] + order_[k].volume();
    upper_bound_ = std::min(container_.capacity(), suffix_volume_[0]);

    prev_identical_.assign(n, -1);
    for (size_t k = 0; k < n; ++k) {
      for (size_t j = k; j-- > 0;) {
        if (order_[j].lengths == order_[k].lengths) {
          prev_identical_[k] = static_cast<int>(j);
          break;
        }
      }
    }

    for (int axis = 0; axis < 3; ++axis) {
      patterns_[static_cast<size_t>(axis)] =
          normal_patterns(order_, axis, container_.dims[static_cast<size_t>(axis)]);
    }

    const bool bounded = static_cast<int>(n) > config.exact_threshold;
    if (bounded) {
      deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(config.time_budget);
      node_limit_ = config.node_limit;
    }
    has_deadline_ = bounded;

    position_.assign(n, Dims{});
    placed_.assign(n, false);
  }

  void seed_incumbent(const PackingSolution& s) {
    best_volume_ = s.loaded_volume;
    best_ = s.placements;
  }

  /// Returns true if the search completed (incumbent is optimal).
  bool run() {
    if (best_volume_ >= upper_bound_) return true;
    expand(0, 0);
    return !aborted_;
  }

  Volume best_volume() const { return best_volume_; }
  const std::vector<Placement>& best() const { return best_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  bool out_of_budget() {
    if (!has_deadline_) return false;
    if (node_limit_ != 0 && nodes_ >= node_limit_) return true;
    if ((nodes_ & 0xff) == 0 && Clock::now() >= deadline_) return true;
    return false;
  }

  bool collides(size_t k, const Dims& origin) const {
    for (size_t j : stack_) {
      if (overlaps(origin, order_[k].lengths, position_[j], order_[j].lengths)) return true;
    }
    return false;
  }

  void record(Volume loaded) {
    best_volume_ = loaded;
    best_.clear();
    for (size_t j : stack_) best_.push_back({order_[j].id, position_[j]});
  }

  // Returns true when the search should stop entirely.
  bool expand(size_t k, Volume loaded) {
    ++nodes_;
    if (aborted_ || out_of_budget()) {
      aborted_ = true;
      return true;
    }
    if (loaded > best_volume_) {
      record(loaded);
      if (best_volume_ >= upper_bound_) return true;
    }
    if (k == order_.size()) return false;
    const Volume free_volume = container_.capacity() - loaded;
    if (loaded + std::min(suffix_volume_[k], free_volume) <= best_volume_) return false;

    const Box& box = order_[k];
    const int prev = prev_identical_[k];
    const bool must_skip = prev >= 0 && !placed_[static_cast<size_t>(prev)];

    if (!must_skip && box.volume() <= free_volume) {
      const Dims* lower = prev >= 0 ? &position_[static_cast<size_t>(prev)] : nullptr;
      const auto& px = patterns_[0];
      const auto& py = patterns_[1];
      const auto& pz = patterns_[2];
      for (Length x : px) {
        if (x + box.lengths[0] > container_.dims[0]) break;
        if (lower && x < (*lower)[0]) continue;
        for (Length y : py) {
          if (y + box.lengths[1] > container_.dims[1]) break;
          if (lower && x == (*lower)[0] && y < (*lower)[1]) continue;
          for (Length z : pz) {
            if (z + box.lengths[2] > container_.dims[2]) break;
            const Dims origin{x, y, z};
            if (lower && origin <= *lower) continue;
            if (collides(k, origin)) continue;
            position_[k] = origin;
            placed_[k] = true;
            stack_.push_back(k);
            const bool stop = expand(k + 1, loaded + box.volume());
            stack_.pop_back();
            placed_[k] = false;
            if (stop) return true;
            // the bound may have tightened after an improvement deeper down
            if (loaded + std::min(suffix_volume_[k], free_volume) <= best_volume_) return false;
          }
        }
      }
    }
    return expand(k + 1, loaded);
  }

  std::vector<Box> order_;
  Container container_;
  Clock::time_point start_;
  Clock::time_point deadline_{};
  bool has_deadline_ = false;
  std::uint64_t node_limit_ = 0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;

  std::vector<Volume> suffix_volume_;
  Volume upper_bound_ = 0;
  std::vector<int> prev_identical_;
  std::array<std::vector<Length>, 3> patterns_;

  std::vector<Dims> position_;
  std::vector<bool> placed_;
  std::vector<size_t> stack_;

  Volume best_volume_ = 0;
  std::vector<Placement> best_;
};

}  // namespace

std::vector<Length> normal_patterns(std::span<const Box> boxes, int axis, Length limit) {
  if (limit < 0) return {};
  std::vector<char> reachable(static_cast<size_t>(limit) + 1, 0);
  reachable[0] = 1;
  for (const auto& b : boxes) {
    const Length l = b.lengths[static_cast<size_t>(axis)];
    if (l <= 0 || l > limit) continue;
    for (Length p = limit - l; p >= 0; --p) {
      if (reachable[static_cast<size_t>(p)]) reachable[static_cast<size_t>(p + l)] = 1;
    }
  }
  std::vector<Length> out;
  for (Length p = 0; p <= limit; ++p) {
    if (reachable[static_cast<size_t>(p)]) out.push_back(p);
  }
  return out;
}

bool check_feasible(std::span<const Placement> placements, std::span<const Box> boxes, const Container& container) {
  std::unordered_map<int, const Box*> by_id;
  for (const auto& b : boxes) by_id.emplace(b.id, &b);
  std::vector<const Box*> placed;
  placed.reserve(placements.size());
  for (const auto& p : placements) {
    auto it = by_id.find(p.box_id);
    if (it == by_id.end()) throw std::invalid_argument("dangling placement reference");
    placed.push_back(it->second);
  }
  for (size_t i = 0; i < placements.size(); ++i) {
    if (!fits_in(placements[i].origin, placed[i]->lengths, container)) return false;
    for (size_t j = 0; j < i; ++j) {
      if (placements[i].box_id == placements[j].box_id) return false;
      if (overlaps(placements[i].origin, placed[i]->lengths, placements[j].origin, placed[j]->lengths)) return false;
    }
  }
  return true;
}

PackingSolution greedy_pack(std::span<const Box> boxes, const Container& container) {
  const auto start = Clock::now();
  const auto order = search_order(boxes, container);
  std::vector<Dims> points{Dims{0, 0, 0}};
  std::vector<std::pair<Dims, Dims>> placed;  // origin, lengths
  std::vector<Placement> placements;
  Volume loaded = 0;

  for (const auto& box : order) {
    std::sort(points.begin(), points.end());
    for (auto it = points.begin(); it != points.end(); ++it) {
      const Dims origin = *it;
      if (!fits_in(origin, box.lengths, container)) continue;
      const bool clash = std::any_of(placed.begin(), placed.end(), [&](const auto& q) {
        return overlaps(origin, box.lengths, q.first, q.second);
      });
      if (clash) continue;
      placed.emplace_back(origin, box.lengths);
      placements.push_back({box.id, origin});
      loaded += box.volume();
      points.erase(it);
      for (size_t axis = 0; axis < 3; ++axis) {
        Dims p = origin;
        p[axis] += box.lengths[axis];
        if (p[axis] < container.dims[axis] && std::find(points.begin(), points.end(), p) == points.end()) {
          points.push_back(p);
        }
      }
      break;
    }
  }
  const bool all_placed = placements.size() == boxes.size();
  const bool at_bound = loaded == std::min(container.capacity(), total_volume(boxes));
  return finish(std::move(placements), loaded, boxes, all_placed || at_bound, start, 0);
}

PackingSolution pack_max_volume(std::span<const Box> boxes, const Container& container, const PackConfig& config) {
  if (config.allow_rotation) throw std::invalid_argument("unsupported: box rotation");
  if (config.time_budget.count() <= 0) throw std::invalid_argument("time budget must be positive");
  const auto start = Clock::now();
  if (boxes.empty()) return finish({}, 0, boxes, true, start, 0);

  const auto root = greedy_pack(boxes, container);
  if (root.proven_optimal) {
    auto s = root;
    s.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    return s;
  }

  BranchAndBound search(search_order(boxes, container), container, config, start);
  search.seed_incumbent(root);
  const bool complete = search.run();
  return finish(search.best(), search.best_volume(), boxes, complete, start, search.nodes());
}

}  // namespace clptac
