#pragma once

#include "clptac/arrival.hpp"
#include "clptac/dp.hpp"
#include "clptac/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace clptac {

struct EpisodeOutcome {
  int stop_period = 0;          // period of the LOAD decision, or |T| when the horizon ran out
  bool loaded_early = false;    // stopped by a LOAD decision before the last period
  Rational ready_time_cost;     // stop_period / |T|
  Rational realized_cost;       // period charges on nonempty states plus the stopping cost
  double occupancy = 0.0;       // loaded volume of the stopping state over capacity
  Volume overflow_trucks = 0;   // extra trucks charged at the last period
  std::vector<std::optional<int>> realized_arrivals;
};

struct AggregateStats {
  std::size_t replications = 0;
  double mean_ready_time = 0.0;
  double sd_ready_time = 0.0;
  double mean_occupancy = 0.0;
  double sd_occupancy = 0.0;
  double mean_overflow_trucks = 0.0;
  double mean_realized_cost = 0.0;
  double sd_realized_cost = 0.0;

  double stderr_realized_cost() const;
  friend bool operator==(const AggregateStats&, const AggregateStats&) = default;
};

/// Seed of replication `index`: splitmix64(splitmix64(base_seed) + index).
std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t index);

/// Replays one sampled arrival realization against the stored decisions.
/// Throws std::logic_error("uncovered state") if the walk leaves the table.
EpisodeOutcome simulate_episode(const Instance& instance, const ReliabilityModel& model, const ValueTable& table,
                                std::uint64_t rng_seed);

/// Replications run in parallel; aggregation is in replication order, so results are
/// bit-identical to run_monte_carlo_serial for any thread count.
AggregateStats run_monte_carlo(const Instance& instance, const ReliabilityModel& model, const ValueTable& table,
                               std::size_t replications, std::uint64_t base_seed);

AggregateStats run_monte_carlo_serial(const Instance& instance, const ReliabilityModel& model, const ValueTable& table,
                                      std::size_t replications, std::uint64_t base_seed);

/// Every episode of a Monte Carlo run, for per-replication output.
std::vector<EpisodeOutcome> simulate_episodes(const Instance& instance, const ReliabilityModel& model,
                                              const ValueTable& table, std::size_t replications,
                                              std::uint64_t base_seed);

}  // namespace clptac
