#include "clptac/dp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clptac {

const char* to_string(Decision d) {
  switch (d) {
    case Decision::Load:
      return "LOAD";
    case Decision::Wait:
      return "WAIT";
    case Decision::Terminal:
      return "TERMINAL";
  }
  return "?";
}

void ValueTable::insert(StateEntry entry) {
  auto key = std::make_pair(entry.period, entry.mask);
  entries_.insert_or_assign(key, std::move(entry));
}

const StateEntry* ValueTable::find(int period, ShipmentMask mask) const {
  auto it = entries_.find({period, mask});
  return it == entries_.end() ? nullptr : &it->second;
}

const StateEntry& ValueTable::at(int period, ShipmentMask mask) const {
  if (auto* e = find(period, mask)) return *e;
  throw std::out_of_range("uncovered state");
}

bool operator==(const ValueTable& a, const ValueTable& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib) {
    const auto& x = ia->second;
    const auto& y = ib->second;
    if (ia->first != ib->first || x.value != y.value || x.decision != y.decision || x.packing_key != y.packing_key ||
        x.has_boxes != y.has_boxes || x.exact != y.exact || x.loaded_volume != y.loaded_volume ||
        x.unloaded_volume != y.unloaded_volume) {
      return false;
    }
  }
  return true;
}

PackingCache::Entry PackingCache::get_or_compute(ShipmentMask key, bool terminal, const Instance& instance,
                                                 const PackConfig& config) {
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end() && usable(it->second, terminal)) return it->second;
  }
  const auto boxes = instance.boxes_in(key);
  Entry fresh{pack_max_volume(boxes, instance.container, config), terminal};
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(key, fresh);
  if (!inserted && !usable(it->second, terminal)) it->second = fresh;
  return it->second;
}

std::optional<PackingCache::Entry> PackingCache::find(ShipmentMask key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t PackingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

Rational cost_wait(const TimeHorizon& horizon) { return Rational(1, horizon.num_periods); }

Rational cost_load(Volume loaded_volume, const Container& container, const Rational& mu, const TimeHorizon& horizon) {
  const Volume capacity = container.capacity();
  if (loaded_volume < 0 || loaded_volume > capacity) throw std::invalid_argument("infeasible packing volume");
  Rational empty_fraction(capacity - loaded_volume, capacity);
  empty_fraction.canonicalize();
  return cost_wait(horizon) + mu * empty_fraction;
}

Rational cost_terminal(Volume unloaded_volume, const Container& container, const TimeHorizon& horizon) {
  const Volume capacity = container.capacity();
  const Volume trucks = (unloaded_volume + capacity - 1) / capacity;
  return cost_wait(horizon) + Rational(mpz_class(std::to_string(capacity * trucks)));
}

std::vector<std::vector<ShipmentMask>> reachable_states(const ReliabilityModel& model) {
  const int periods = model.horizon().num_periods;
  std::vector<std::vector<ShipmentMask>> out(static_cast<size_t>(periods));
  for (const auto& tr : initial_distribution(model)) out[0].push_back(tr.next.arrived);
  for (int t = 1; t < periods; ++t) {
    std::vector<ShipmentMask> next;
    for (ShipmentMask m : out[static_cast<size_t>(t - 1)]) {
      for (const auto& tr : transition_distribution(model, {m, t})) next.push_back(tr.next.arrived);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    out[static_cast<size_t>(t)] = std::move(next);
  }
  return out;
}

Rational wait_value(const ValueTable& table, const ReliabilityModel& model, const StateEntry& entry) {
  Rational sum = entry.has_boxes ? cost_wait(model.horizon()) : cost_empty_state();
  for (const auto& tr : transition_distribution(model, {entry.mask, entry.period})) {
    sum += tr.probability * table.at(tr.next.period, tr.next.arrived).value;
  }
  return sum;
}

namespace {

void check_inputs(const Instance& instance, const ReliabilityModel& model) {
  if (model.horizon() != instance.horizon) throw std::invalid_argument("reliability model horizon differs from instance");
  if (auto report = validate(instance); !report.ok()) throw std::invalid_argument("invalid instance: " + report.to_string());
}

std::size_t count_states(const std::vector<std::vector<ShipmentMask>>& reach) {
  std::size_t n = 0;
  for (const auto& r : reach) n += r.size();
  return n;
}

void enforce_cap(std::size_t states, const SolveConfig& config) {
  if (states > config.max_states) {
    throw std::length_error("state space exceeds limit: " + std::to_string(states) + " states required, cap " +
                            std::to_string(config.max_states));
  }
}

// Value of one state given the table of period + 1 (already filled) and its packing.
StateEntry evaluate_state(const Instance& instance, const ReliabilityModel& model, const ValueTable& table, int period,
                          ShipmentMask mask, const PackingSolution* packing) {
  StateEntry e;
  e.period = period;
  e.mask = mask;
  e.packing_key = mask & instance.nonempty_mask();
  e.has_boxes = e.packing_key != 0;
  if (packing) {
    e.exact = packing->proven_optimal;
    e.loaded_volume = packing->loaded_volume;
    e.unloaded_volume = packing->unloaded_volume;
  }
  const auto& horizon = instance.horizon;
  if (horizon.is_terminal(period)) {
    e.decision = Decision::Terminal;
    e.value = e.has_boxes ? cost_terminal(e.unloaded_volume, instance.container, horizon) : cost_empty_state();
    return e;
  }
  Rational wait = wait_value(table, model, e);
  if (!e.has_boxes) {
    e.decision = Decision::Wait;
    e.value = std::move(wait);
    return e;
  }
  Rational load = cost_load(e.loaded_volume, instance.container, instance.mu, horizon);
  if (load <= wait) {
    e.decision = Decision::Load;
    e.value = std::move(load);
  } else {
    e.decision = Decision::Wait;
    e.value = std::move(wait);
  }
  return e;
}

void finalize(PolicyResult& result, const ReliabilityModel& model) {
  result.expected_cost = 0;
  for (const auto& tr : initial_distribution(model)) {
    result.expected_cost += tr.probability * result.value_table.at(1, tr.next.arrived).value;
  }
  std::size_t with_boxes = 0;
  std::size_t exact = 0;
  for (const auto& [key, e] : result.value_table) {
    if (!e.has_boxes) continue;
    ++with_boxes;
    if (e.exact) ++exact;
  }
  result.exact_state_fraction = with_boxes == 0 ? 1.0 : static_cast<double>(exact) / static_cast<double>(with_boxes);
}

}  // namespace

PolicyResult solve_value_functions_serial(const Instance& instance, const ReliabilityModel& model,
                                          const SolveConfig& config, PackingCache* cache) {
  check_inputs(instance, model);
  const auto reach = reachable_states(model);
  enforce_cap(count_states(reach), config);

  PackingCache local;
  PackingCache& packings = cache ? *cache : local;
  const int periods = instance.horizon.num_periods;
  const ShipmentMask nonempty = instance.nonempty_mask();

  PolicyResult result;
  result.num_periods = periods;
  for (int t = periods; t >= 1; --t) {
    const bool terminal = instance.horizon.is_terminal(t);
    for (ShipmentMask mask : reach[static_cast<size_t>(t - 1)]) {
      const ShipmentMask key = mask & nonempty;
      std::optional<PackingSolution> packing;
      if (key != 0) {
        packing = packings.get_or_compute(key, terminal, instance, terminal ? config.terminal_pack : config.state_pack)
                      .solution;
      }
      result.value_table.insert(
          evaluate_state(instance, model, result.value_table, t, mask, packing ? &*packing : nullptr));
    }
  }
  finalize(result, model);
  return result;
}

PolicyResult solve_value_functions(const Instance& instance, const ReliabilityModel& model, const SolveConfig& config,
                                   PackingCache* cache) {
  check_inputs(instance, model);
  const auto reach = reachable_states(model);
  enforce_cap(count_states(reach), config);

  PackingCache local;
  PackingCache& packings = cache ? *cache : local;
  const int periods = instance.horizon.num_periods;
  const ShipmentMask nonempty = instance.nonempty_mask();

  // Terminal box sets first so that interior states reuse the longer-budget solutions.
  std::vector<ShipmentMask> terminal_keys;
  std::vector<ShipmentMask> interior_keys;
  for (int t = 1; t <= periods; ++t) {
    auto& keys = instance.horizon.is_terminal(t) ? terminal_keys : interior_keys;
    for (ShipmentMask mask : reach[static_cast<size_t>(t - 1)]) {
      if ((mask & nonempty) != 0) keys.push_back(mask & nonempty);
    }
  }
  for (auto* keys : {&terminal_keys, &interior_keys}) {
    std::sort(keys->begin(), keys->end());
    keys->erase(std::unique(keys->begin(), keys->end()), keys->end());
  }

  const auto n_terminal = static_cast<std::int64_t>(terminal_keys.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n_terminal; ++i) {
    packings.get_or_compute(terminal_keys[static_cast<size_t>(i)], true, instance, config.terminal_pack);
  }
  const auto n_interior = static_cast<std::int64_t>(interior_keys.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n_interior; ++i) {
    packings.get_or_compute(interior_keys[static_cast<size_t>(i)], false, instance, config.state_pack);
  }

  PolicyResult result;
  result.num_periods = periods;
  for (int t = periods; t >= 1; --t) {
    const bool terminal = instance.horizon.is_terminal(t);
    const auto& masks = reach[static_cast<size_t>(t - 1)];
    std::vector<StateEntry> layer(masks.size());
    const auto n = static_cast<std::int64_t>(masks.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        const ShipmentMask mask = masks[static_cast<size_t>(i)];
        const ShipmentMask key = mask & nonempty;
        std::optional<PackingSolution> packing;
        if (key != 0) {
          packing = packings
                        .get_or_compute(key, terminal, instance, terminal ? config.terminal_pack : config.state_pack)
                        .solution;
        }
        layer[static_cast<size_t>(i)] =
            evaluate_state(instance, model, result.value_table, t, mask, packing ? &*packing : nullptr);
      } catch (...) {
#pragma omp critical(clptac_dp_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (auto& e : layer) result.value_table.insert(std::move(e));
  }
  finalize(result, model);
  return result;
}

nlohmann::json to_json(const PolicyResult& result) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& [key, e] : result.value_table) {
    states.push_back({
        {"period", e.period},
        {"state", mask_to_string(e.mask, result.num_periods)},
        {"value", to_double(e.value)},
        {"value_exact", to_string(e.value)},
        {"decision", to_string(e.decision)},
        {"packing", mask_to_string(e.packing_key, result.num_periods)},
        {"exact", e.exact},
        {"loaded_volume", e.loaded_volume},
        {"unloaded_volume", e.unloaded_volume},
    });
  }
  return {
      {"horizon", result.num_periods},
      {"expected_cost", to_double(result.expected_cost)},
      {"expected_cost_exact", to_string(result.expected_cost)},
      {"exact_state_fraction", result.exact_state_fraction},
      {"states", std::move(states)},
  };
}

PolicyResult policy_from_json(const nlohmann::json& doc) {
  PolicyResult r;
  r.num_periods = doc.at("horizon").get<int>();
  r.expected_cost = parse_rational(doc.at("expected_cost_exact").get<std::string>());
  r.exact_state_fraction = doc.at("exact_state_fraction").get<double>();
  for (const auto& s : doc.at("states")) {
    StateEntry e;
    e.period = s.at("period").get<int>();
    e.mask = mask_from_string(s.at("state").get<std::string>(), r.num_periods);
    e.value = parse_rational(s.at("value_exact").get<std::string>());
    const auto d = s.at("decision").get<std::string>();
    if (d == "LOAD") {
      e.decision = Decision::Load;
    } else if (d == "WAIT") {
      e.decision = Decision::Wait;
    } else if (d == "TERMINAL") {
      e.decision = Decision::Terminal;
    } else {
      throw std::invalid_argument("unknown decision '" + d + "'");
    }
    e.packing_key = mask_from_string(s.at("packing").get<std::string>(), r.num_periods);
    e.has_boxes = e.packing_key != 0;
    e.exact = s.at("exact").get<bool>();
    e.loaded_volume = s.at("loaded_volume").get<Volume>();
    e.unloaded_volume = s.at("unloaded_volume").get<Volume>();
    r.value_table.insert(std::move(e));
  }
  return r;
}

}  // namespace clptac
