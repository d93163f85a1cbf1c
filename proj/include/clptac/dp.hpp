#pragma once

#include "clptac/arrival.hpp"
#include "clptac/model.hpp"
#include "clptac/packing.hpp"
#include "clptac/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace clptac {

/// Coded as in the stopping formulation: 0 loads, 1 waits. Terminal marks the last period.
enum class Decision : int { Load = 0, Wait = 1, Terminal = 2 };

const char* to_string(Decision d);

struct StateEntry {
  int period = 0;
  ShipmentMask mask = 0;
  Rational value;
  Decision decision = Decision::Wait;
  ShipmentMask packing_key = 0;  // identity of the box set: mask restricted to nonempty shipments
  bool has_boxes = false;
  bool exact = true;             // packing proven optimal (true for box-free states)
  Volume loaded_volume = 0;
  Volume unloaded_volume = 0;
};

/// Cost-to-go and decision for every state reachable with nonzero probability.
class ValueTable {
 public:
  void insert(StateEntry entry);
  const StateEntry* find(int period, ShipmentMask mask) const;
  const StateEntry& at(int period, ShipmentMask mask) const;

  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const ValueTable& a, const ValueTable& b);

 private:
  std::map<std::pair<int, ShipmentMask>, StateEntry> entries_;
};

/// Packing results keyed by box-set identity. Safe for concurrent use.
class PackingCache {
 public:
  struct Entry {
    PackingSolution solution;
    bool terminal_budget = false;
  };

  /// Returns the cached entry if it is good enough for the requested budget class, otherwise
  /// computes and stores it. Terminal requests accept any proven-optimal entry.
  Entry get_or_compute(ShipmentMask key, bool terminal, const Instance& instance, const PackConfig& config);

  std::optional<Entry> find(ShipmentMask key) const;
  std::size_t size() const;

 private:
  static bool usable(const Entry& e, bool terminal) {
    return !terminal || e.terminal_budget || e.solution.proven_optimal;
  }

  mutable std::mutex mutex_;
  std::map<ShipmentMask, Entry> entries_;
};

struct SolveConfig {
  PackConfig state_pack{std::chrono::duration<double>(5.0)};
  PackConfig terminal_pack{std::chrono::duration<double>(3600.0)};
  std::size_t max_states = std::size_t{1} << 22;
};

struct PolicyResult {
  Rational expected_cost;
  ValueTable value_table;
  double exact_state_fraction = 1.0;
  int num_periods = 0;
};

/// LOAD at an interior period: 1/|T| + mu * (1 - E / capacity).
/// Throws std::invalid_argument("infeasible packing volume") when E exceeds capacity.
Rational cost_load(Volume loaded_volume, const Container& container, const Rational& mu, const TimeHorizon& horizon);

/// WAIT at an interior period with boxes on the dock.
Rational cost_wait(const TimeHorizon& horizon);

/// Reaching the last period: 1/|T| + capacity * ceil(unloaded / capacity).
Rational cost_terminal(Volume unloaded_volume, const Container& container, const TimeHorizon& horizon);

/// No boxes on the dock costs nothing whatever the decision.
inline Rational cost_empty_state() { return Rational(0); }

/// Masks reachable with nonzero probability, per period (index 0 is period 1), ascending.
std::vector<std::vector<ShipmentMask>> reachable_states(const ReliabilityModel& model);

/// Backward induction over all reachable states. State evaluations inside a period and the
/// packing subproblems run in parallel with OpenMP; results do not depend on the schedule
/// as long as packing completes or is cut by node_limit rather than wall time.
/// Throws std::length_error when the reachable state count exceeds config.max_states.
PolicyResult solve_value_functions(const Instance& instance, const ReliabilityModel& model, const SolveConfig& config,
                                   PackingCache* cache = nullptr);

/// Single-threaded reference implementation of solve_value_functions.
PolicyResult solve_value_functions_serial(const Instance& instance, const ReliabilityModel& model,
                                          const SolveConfig& config, PackingCache* cache = nullptr);

/// Expected total cost of the optimal policy from the start of the horizon.
inline const Rational& expected_objective(const PolicyResult& result) { return result.expected_cost; }

/// WAIT branch value of an interior state recomputed from the stored successor values.
Rational wait_value(const ValueTable& table, const ReliabilityModel& model, const StateEntry& entry);

nlohmann::json to_json(const PolicyResult& result);

/// Rebuilds a PolicyResult from to_json output (values are read from their exact form).
PolicyResult policy_from_json(const nlohmann::json& doc);

}  // namespace clptac
