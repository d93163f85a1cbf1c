#include "clptac/sim.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

namespace clptac {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct EpisodeSummary {
  double ready_time = 0.0;
  double occupancy = 0.0;
  double overflow = 0.0;
  double cost = 0.0;
};

EpisodeSummary summarize(const EpisodeOutcome& e) {
  return {to_double(e.ready_time_cost), e.occupancy, static_cast<double>(e.overflow_trucks), to_double(e.realized_cost)};
}

// Two-pass mean and sample standard deviation in index order, shifted by the first sample so
// that constant data gives exactly its value and a zero deviation.
std::pair<double, double> mean_sd(const std::vector<EpisodeSummary>& xs, double EpisodeSummary::*field) {
  const auto n = static_cast<double>(xs.size());
  const double shift = xs.front().*field;
  double sum = 0.0;
  for (const auto& x : xs) sum += x.*field - shift;
  const double mean_shifted = sum / n;
  if (xs.size() < 2) return {shift + mean_shifted, 0.0};
  double ss = 0.0;
  for (const auto& x : xs) {
    const double d = (x.*field - shift) - mean_shifted;
    ss += d * d;
  }
  return {shift + mean_shifted, std::sqrt(ss / (n - 1.0))};
}

AggregateStats aggregate(const std::vector<EpisodeSummary>& xs) {
  AggregateStats s;
  s.replications = xs.size();
  std::tie(s.mean_ready_time, s.sd_ready_time) = mean_sd(xs, &EpisodeSummary::ready_time);
  std::tie(s.mean_occupancy, s.sd_occupancy) = mean_sd(xs, &EpisodeSummary::occupancy);
  s.mean_overflow_trucks = mean_sd(xs, &EpisodeSummary::overflow).first;
  std::tie(s.mean_realized_cost, s.sd_realized_cost) = mean_sd(xs, &EpisodeSummary::cost);
  return s;
}

}  // namespace

double AggregateStats::stderr_realized_cost() const {
  return replications == 0 ? 0.0 : sd_realized_cost / std::sqrt(static_cast<double>(replications));
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) + index);
}

EpisodeOutcome simulate_episode(const Instance& instance, const ReliabilityModel& model, const ValueTable& table,
                                std::uint64_t rng_seed) {
  const auto& horizon = instance.horizon;
  const Volume capacity = instance.container.capacity();
  EpisodeOutcome out;
  out.realized_arrivals = sample_arrival_times(model, horizon, rng_seed);
  out.realized_cost = 0;

  for (int t = 1; t <= horizon.num_periods; ++t) {
    const ShipmentMask mask = arrived_by(out.realized_arrivals, t);
    const StateEntry* e = table.find(t, mask);
    if (!e) throw std::logic_error("uncovered state");
    if (e->has_boxes) out.realized_cost += cost_wait(horizon);

    if (e->decision == Decision::Load || e->decision == Decision::Terminal) {
      out.stop_period = t;
      out.loaded_early = e->decision == Decision::Load;
      out.occupancy = static_cast<double>(e->loaded_volume) / static_cast<double>(capacity);
      if (e->has_boxes) {
        if (out.loaded_early) {
          out.realized_cost += cost_load(e->loaded_volume, instance.container, instance.mu, horizon) - cost_wait(horizon);
        } else {
          out.overflow_trucks = (e->unloaded_volume + capacity - 1) / capacity;
          out.realized_cost += cost_terminal(e->unloaded_volume, instance.container, horizon) - cost_wait(horizon);
        }
      }
      break;
    }
  }
  out.ready_time_cost = Rational(out.stop_period, horizon.num_periods);
  out.ready_time_cost.canonicalize();
  return out;
}

std::vector<EpisodeOutcome> simulate_episodes(const Instance& instance, const ReliabilityModel& model,
                                              const ValueTable& table, std::size_t replications,
                                              std::uint64_t base_seed) {
  std::vector<EpisodeOutcome> out;
  out.reserve(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    out.push_back(simulate_episode(instance, model, table, replication_seed(base_seed, r)));
  }
  return out;
}

AggregateStats run_monte_carlo_serial(const Instance& instance, const ReliabilityModel& model, const ValueTable& table,
                                      std::size_t replications, std::uint64_t base_seed) {
  if (replications == 0) throw std::invalid_argument("replications must be at least 1");
  std::vector<EpisodeSummary> xs;
  xs.reserve(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    xs.push_back(summarize(simulate_episode(instance, model, table, replication_seed(base_seed, r))));
  }
  return aggregate(xs);
}

AggregateStats run_monte_carlo(const Instance& instance, const ReliabilityModel& model, const ValueTable& table,
                               std::size_t replications, std::uint64_t base_seed) {
  if (replications == 0) throw std::invalid_argument("replications must be at least 1");
  std::vector<EpisodeSummary> xs(replications);
  const auto n = static_cast<std::int64_t>(replications);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    try {
      const auto idx = static_cast<std::uint64_t>(r);
      xs[static_cast<size_t>(r)] = summarize(simulate_episode(instance, model, table, replication_seed(base_seed, idx)));
    } catch (...) {
#pragma omp critical(clptac_sim_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(xs);
}

}  // namespace clptac
