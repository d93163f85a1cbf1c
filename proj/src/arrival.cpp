#include "clptac/arrival.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace clptac {

ReliabilityModel::ReliabilityModel(TimeHorizon horizon, std::vector<std::vector<Rational>> alpha)
    : horizon_(horizon), alpha_(std::move(alpha)) {
  const auto n = static_cast<size_t>(horizon_.num_periods);
  if (horizon_.num_periods < 1 || alpha_.size() != n) throw std::invalid_argument("alpha matrix must be |T| x |T|");
  alpha_d_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (alpha_[i].size() != n) throw std::invalid_argument("alpha matrix must be |T| x |T|");
    alpha_d_[i].resize(n);
    for (size_t t = 0; t <= i; ++t) {
      const auto& a = alpha_[i][t];
      if (sgn(a) <= 0 || a > 1) throw std::invalid_argument("alpha entries must lie in (0, 1]");
      alpha_d_[i][t] = to_double(a);
    }
  }
}

ReliabilityModel ReliabilityModel::constant(TimeHorizon horizon, const Rational& alpha) {
  const auto n = static_cast<size_t>(std::max(horizon.num_periods, 0));
  return ReliabilityModel(horizon, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n, alpha)));
}

const Rational& ReliabilityModel::alpha(int observed, int nominal) const {
  return alpha_.at(static_cast<size_t>(observed - 1)).at(static_cast<size_t>(nominal - 1));
}

double ReliabilityModel::alpha_d(int observed, int nominal) const {
  return alpha_d_.at(static_cast<size_t>(observed - 1)).at(static_cast<size_t>(nominal - 1));
}

bool ReliabilityModel::deterministic() const {
  for (int i = 1; i <= horizon_.num_periods; ++i) {
    for (int t = 1; t <= i; ++t) {
      if (alpha(i, t) != 1) return false;
    }
  }
  return true;
}

Rational marginal_arrival_prob(const ReliabilityModel& model, int nominal, int observed) {
  if (observed < nominal) return Rational(0);
  const Rational& a = model.alpha(observed, nominal);
  Rational miss = 1 - a;
  Rational p = a;
  for (int k = 0; k < observed - nominal; ++k) p *= miss;
  return p;
}

Rational never_arrives_prob(const ReliabilityModel& model, int nominal) {
  Rational p(1);
  for (int i = nominal; i <= model.horizon().num_periods; ++i) p *= 1 - model.alpha(i, nominal);
  return p;
}

std::vector<Transition> transition_distribution(const ReliabilityModel& model, const ArrivalState& state) {
  const int next = state.period + 1;
  if (next > model.horizon().num_periods) throw std::out_of_range("no successor periods");

  std::vector<int> pending;
  for (int t = 1; t <= next; ++t) {
    if ((state.arrived & shipment_bit(t)) == 0) pending.push_back(t);
  }

  std::vector<Transition> out;
  const std::uint32_t combos = 1u << pending.size();
  for (std::uint32_t c = 0; c < combos; ++c) {
    Rational p(1);
    ShipmentMask mask = state.arrived;
    for (size_t k = 0; k < pending.size(); ++k) {
      const Rational& a = model.alpha(next, pending[k]);
      if (c & (1u << k)) {
        p *= a;
        mask |= shipment_bit(pending[k]);
      } else {
        p *= 1 - a;
      }
    }
    if (sgn(p) != 0) out.push_back({{mask, next}, std::move(p)});
  }
  std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) { return a.next.arrived < b.next.arrived; });
  return out;
}

std::vector<Transition> initial_distribution(const ReliabilityModel& model) {
  return transition_distribution(model, ArrivalState{0, 0});
}

std::vector<std::optional<int>> sample_arrival_times(const ReliabilityModel& model, const TimeHorizon& horizon,
                                                     std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<std::optional<int>> out(static_cast<size_t>(horizon.num_periods));
  for (int t = 1; t <= horizon.num_periods; ++t) {
    for (int i = t; i <= horizon.num_periods; ++i) {
      if (uniform() < model.alpha_d(i, t)) {
        out[static_cast<size_t>(t - 1)] = i;
        break;
      }
    }
  }
  return out;
}

ShipmentMask arrived_by(const std::vector<std::optional<int>>& arrivals, int period) {
  ShipmentMask m = 0;
  for (size_t k = 0; k < arrivals.size(); ++k) {
    if (arrivals[k] && *arrivals[k] <= period) m |= shipment_bit(static_cast<int>(k) + 1);
  }
  return m;
}

}  // namespace clptac
