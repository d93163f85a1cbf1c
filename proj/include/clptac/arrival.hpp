#pragma once

#include "clptac/model.hpp"
#include "clptac/rational.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace clptac {

/// Per-period conditional arrival probabilities alpha(i, t) in (0, 1]: the chance that a
/// still-pending shipment with nominal period t shows up in period i >= t.
class ReliabilityModel {
 public:
  /// Full matrix, row i - 1 and column t - 1. Entries with i < t are ignored.
  ReliabilityModel(TimeHorizon horizon, std::vector<std::vector<Rational>> alpha);

  static ReliabilityModel constant(TimeHorizon horizon, const Rational& alpha);

  const TimeHorizon& horizon() const { return horizon_; }
  const Rational& alpha(int observed, int nominal) const;
  double alpha_d(int observed, int nominal) const;

  /// True when every used entry equals 1 (arrivals happen exactly at nominal periods).
  bool deterministic() const;

 private:
  TimeHorizon horizon_;
  std::vector<std::vector<Rational>> alpha_;
  std::vector<std::vector<double>> alpha_d_;
};

/// State of the arrival process at the end of `period`. Period 0 is the pre-start state.
struct ArrivalState {
  ShipmentMask arrived = 0;
  int period = 0;

  friend bool operator==(const ArrivalState&, const ArrivalState&) = default;
};

struct Transition {
  ArrivalState next;
  Rational probability;
};

/// alpha(i,t) * (1 - alpha(i,t))^(i - t) for i >= t, 0 otherwise.
Rational marginal_arrival_prob(const ReliabilityModel& model, int nominal, int observed);

/// Probability that shipment `nominal` has not arrived by the end of the horizon.
Rational never_arrives_prob(const ReliabilityModel& model, int nominal);

/// Successor states at period + 1 with nonzero probability, in ascending mask order.
/// Every pending shipment due by period + 1 arrives independently with hazard alpha(period + 1, t).
/// Throws std::out_of_range("no successor periods") at the final period.
std::vector<Transition> transition_distribution(const ReliabilityModel& model, const ArrivalState& state);

/// Distribution of the state at period 1.
std::vector<Transition> initial_distribution(const ReliabilityModel& model);

/// Realized arrival period per shipment (index t - 1), or nullopt if it never arrives within
/// the horizon. Deterministic given the seed.
std::vector<std::optional<int>> sample_arrival_times(const ReliabilityModel& model, const TimeHorizon& horizon,
                                                     std::uint64_t rng_seed);

/// Mask of shipments that have arrived by `period` under a realization.
ShipmentMask arrived_by(const std::vector<std::optional<int>>& arrivals, int period);

}  // namespace clptac
