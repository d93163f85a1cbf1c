// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "cli.hpp"
#include "oracles.hpp"

#include "clptac/arrival.hpp"
#include "clptac/dp.hpp"
#include "clptac/io.hpp"
#include "clptac/packing.hpp"
#include "clptac/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace clptac;
using namespace clptac::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

SolveConfig exact_config() {
  SolveConfig c;
  c.state_pack.time_budget = std::chrono::duration<double>(600.0);
  c.terminal_pack = c.state_pack;
  return c;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. branch and bound against exhaustive placement
Verdict packing_matches_oracle() {
  Verdict v;
  std::mt19937_64 rng(101);
  const auto t0 = Clock::now();
  PackConfig cfg;
  cfg.time_budget = std::chrono::duration<double>(60.0);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, {1, 5, 1, 12, 4, 1.0});
    const auto boxes = inst.all_boxes();
    const auto bb = pack_max_volume(boxes, inst.container, cfg);
    const auto oracle = brute_force_pack(boxes, inst.container);
    if (!bb.proven_optimal) v.fail("instance " + std::to_string(i) + " not proven optimal");
    if (bb.loaded_volume != oracle.loaded_volume) {
      v.fail("instance " + std::to_string(i) + ": " + std::to_string(bb.loaded_volume) + " vs oracle " +
             std::to_string(oracle.loaded_volume));
    }
    if (!check_feasible(bb.placements, boxes, inst.container)) v.fail("infeasible placement on instance " + std::to_string(i));
  }
  const double s = seconds_since(t0);
  if (s >= 60.0) v.fail("took " + fmt(s) + " s");
  if (v.pass) v.detail = "50 instances, " + fmt(s) + " s";
  return v;
}

// 2. chained transitions reproduce the geometric marginals and the exact tail
Verdict arrival_chain() {
  Verdict v;
  int checked = 0;
  for (int periods : {3, 5}) {
    for (const char* a : {"0.3", "0.5", "0.9"}) {
      const Rational alpha = parse_rational(a);
      const double ad = alpha.get_d();
      const TimeHorizon h{periods};
      const auto model = ReliabilityModel::constant(h, alpha);
      std::map<ShipmentMask, Rational> dist{{0, Rational(1)}};
      for (int p = 0; p < periods; ++p) {
        std::map<ShipmentMask, Rational> next;
        for (const auto& [mask, prob] : dist) {
          const auto succ = transition_distribution(model, ArrivalState{mask, p});
          double mass = 0.0;
          for (const auto& tr : succ) {
            mass += tr.probability.get_d();
            next[tr.next.arrived] += prob * tr.probability;
          }
          if (std::abs(mass - 1.0) > 1e-12) v.fail("transition mass " + fmt(mass));
        }
        dist = std::move(next);
        const int period = p + 1;
        for (int t = 1; t <= period; ++t) {
          double chained = 0.0;
          for (const auto& [mask, prob] : dist) {
            if (mask & shipment_bit(t)) chained += prob.get_d();
          }
          double closed = 0.0;
          for (int k = t; k <= period; ++k) closed += ad * std::pow(1.0 - ad, k - t);
          if (std::abs(chained - closed) > 1e-9) v.fail("marginal mismatch at t=" + std::to_string(t));
          ++checked;
        }
      }
      for (int t = 1; t <= periods; ++t) {
        Rational missing(0), tail(1);
        for (const auto& [mask, prob] : dist) {
          if (!(mask & shipment_bit(t))) missing += prob;
        }
        for (int k = t; k <= periods; ++k) tail *= 1 - alpha;
        if (missing != tail) v.fail("tail mass mismatch at t=" + std::to_string(t));
      }
    }
  }
  if (v.pass) v.detail = std::to_string(checked) + " marginals";
  return v;
}

// 3. DP against scenario-tree enumeration of measurable stopping rules
Verdict dp_matches_enumeration() {
  Verdict v;
  std::mt19937_64 rng(303);
  const double alphas[] = {0.3, 0.5, 0.7, 0.9};
  const double mus[] = {0.5, 1.0, 2.0};
  const auto t0 = Clock::now();
  int literal = 0;
  for (int i = 0; i < 30; ++i) {
    const int periods = 2 + i % 3;
    const auto inst = random_instance(rng, {periods, 5, 1, 12, 4, mus[i % 3]});
    const double a = alphas[i % 4];
    const auto model = ReliabilityModel::constant(inst.horizon, parse_rational(std::to_string(a)));
    const auto r = solve_value_functions(inst, model, exact_config());
    const ScenarioOracle oracle(inst, model.alpha_d(1, 1));
    const double got = to_double(expected_objective(r));
    if (std::abs(got - oracle.optimal_value()) > 1e-9) {
      v.fail("instance " + std::to_string(i) + ": " + fmt(got) + " vs " + fmt(oracle.optimal_value()));
    }
    if (oracle.decision_nodes() <= 16) {
      ++literal;
      if (std::abs(got - oracle.optimal_value_by_rule_enumeration()) > 1e-9) {
        v.fail("rule enumeration differs on instance " + std::to_string(i));
      }
    }
  }
  const double s = seconds_since(t0);
  if (s >= 300.0) v.fail("took " + fmt(s) + " s");
  if (v.pass) v.detail = "30 instances (" + std::to_string(literal) + " by literal rule enumeration), " + fmt(s) + " s";
  return v;
}

// exact stopping-period enumeration for on-time arrivals
Rational best_stopping_cost(const Instance& inst) {
  const int periods = inst.horizon.num_periods;
  const Volume cap = inst.container.capacity();
  std::optional<Rational> best;
  for (int s = 1; s <= periods; ++s) {
    Rational cost(0);
    ShipmentMask m = 0;
    for (int t = 1; t < s; ++t) {
      m |= shipment_bit(t);
      if (!inst.boxes_in(m).empty()) cost += Rational(1, periods);
    }
    m |= shipment_bit(s);
    const auto boxes = inst.boxes_in(m);
    if (s < periods && boxes.empty()) continue;
    if (!boxes.empty()) {
      const Volume loaded = brute_force_pack(boxes, inst.container).loaded_volume;
      cost += Rational(1, periods);
      if (s < periods) {
        cost += inst.mu * Rational(cap - loaded, cap);
      } else {
        const Volume rest = total_volume(boxes) - loaded;
        cost += Rational(cap * ((rest + cap - 1) / cap));
      }
    }
    cost.canonicalize();
    if (!best || cost < *best) best = cost;
  }
  return *best;
}

// 4. alpha = 1 collapses to a deterministic stopping problem
Verdict deterministic_limit() {
  Verdict v;
  std::mt19937_64 rng(404);
  for (int i = 0; i < 20; ++i) {
    const auto inst = random_instance(rng, {2 + i % 4, 5, 1, 12, 4, i % 2 ? 2.0 : 1.0});
    const auto model = ReliabilityModel::constant(inst.horizon, Rational(1));
    const auto r = solve_value_functions(inst, model, exact_config());
    if (expected_objective(r) != best_stopping_cost(inst)) {
      v.fail("instance " + std::to_string(i) + ": " + to_string(expected_objective(r)) + " vs " +
             to_string(best_stopping_cost(inst)));
    }
    const auto first = simulate_episode(inst, model, r.value_table, 1);
    for (std::uint64_t seed : {2ULL, 99ULL, 123456789ULL}) {
      const auto e = simulate_episode(inst, model, r.value_table, seed);
      if (e.stop_period != first.stop_period || e.realized_cost != first.realized_cost || e.occupancy != first.occupancy) {
        v.fail("episode depends on the seed (instance " + std::to_string(i) + ")");
      }
    }
    if (first.realized_cost != expected_objective(r)) v.fail("episode cost differs from the objective");
    const auto stats = run_monte_carlo(inst, model, r.value_table, 200, 7);
    if (stats.sd_ready_time != 0.0 || stats.sd_occupancy != 0.0 || stats.sd_realized_cost != 0.0) {
      v.fail("nonzero variance at alpha = 1 (instance " + std::to_string(i) + ")");
    }
  }
  if (v.pass) v.detail = "20 instances";
  return v;
}

// 5. Monte Carlo mean against the DP objective
Verdict monte_carlo_consistency() {
  Verdict v;
  std::mt19937_64 rng(505);
  const char* alphas[] = {"0.3", "0.5", "0.6", "0.8", "0.9"};
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto inst = random_instance(rng, {3 + i % 2, 5, 2, 12, 4, 1.0 + i % 3});
    const auto model = ReliabilityModel::constant(inst.horizon, parse_rational(alphas[i]));
    const auto r = solve_value_functions(inst, model, exact_config());
    const auto stats = run_monte_carlo(inst, model, r.value_table, 100000, 500 + static_cast<std::uint64_t>(i));
    const double se = stats.stderr_realized_cost();
    const double gap = std::abs(stats.mean_realized_cost - to_double(expected_objective(r)));
    const double z = se > 0 ? gap / se : (gap == 0 ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    if (z > 3.0) v.fail("instance " + std::to_string(i) + " off by " + fmt(z) + " SE");
  }
  if (v.pass) v.detail = "5 instances, worst gap " + fmt(worst) + " SE";
  return v;
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("clptac_accept_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// A few box types cut from the container so that the whole set overfills it by a varying margin.
Instance generated_instance(std::mt19937_64& rng, int index) {
  auto pick = [&rng](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  PeriodFreeInstance raw;
  raw.container = Container{{pick(20, 40), pick(20, 40), pick(20, 40)}};
  // total volume target between 0.8 and 1.5 container loads, at most 10 boxes
  const Volume target = raw.container.capacity() * pick(80, 150) / 100;
  const int types = static_cast<int>(pick(2, 4));
  std::vector<Dims> kinds;
  for (int k = 0; k < types; ++k) {
    Dims l;
    for (size_t a = 0; a < 3; ++a) l[a] = pick(raw.container.dims[a] / 4, raw.container.dims[a] * 2 / 3);
    kinds.push_back(l);
  }
  Volume total = 0;
  for (int id = 1; id <= 10 && total < target; ++id) {
    const Dims& l = kinds[static_cast<size_t>(pick(0, types - 1))];
    raw.boxes.push_back({id, l, 0});
    total += l[0] * l[1] * l[2];
  }
  return assign_random_availability(raw, TimeHorizon{6}, 600 + static_cast<std::uint64_t>(index));
}

const std::vector<std::string> kAlphas{"0.5", "0.6", "0.7", "0.8", "0.9"};
const std::vector<std::string> kMus{"1", "2", "4"};
constexpr std::uint64_t kNodeLimit = 200000;
constexpr std::size_t kReplications = 5000;

std::vector<std::string> sweep_args(const std::vector<std::string>& files, const std::string& out) {
  std::vector<std::string> args{"sweep"};
  args.insert(args.end(), files.begin(), files.end());
  for (const auto& a : std::vector<std::string>{"--alpha", "0.5,0.6,0.7,0.8,0.9", "--mu", "1,2,4", "--replications",
                                                std::to_string(kReplications), "--seed", "2024", "--node-limit",
                                                std::to_string(kNodeLimit), "--budget-state", "3600",
                                                "--budget-terminal", "3600", "--out", out}) {
    args.push_back(a);
  }
  return args;
}

struct SweepRun {
  int status = 0;
  std::string csv;
  std::string err;
  double seconds = 0.0;
};

SweepRun run_sweep(const std::vector<std::string>& files, const std::filesystem::path& out) {
  std::ostringstream o, e;
  const auto t0 = Clock::now();
  SweepRun r;
  r.status = cli::run(sweep_args(files, out.string()), o, e);
  r.seconds = seconds_since(t0);
  r.err = e.str();
  if (std::filesystem::exists(out)) r.csv = read_text_file(out);
  return r;
}

// 6. trends in alpha, per mu, over the across-instance means
Verdict alpha_trends(const std::vector<ResultsRow>& rows, double seconds, std::string& table) {
  Verdict v;
  if (rows.size() != 10 * kAlphas.size() * kMus.size()) {
    v.fail("expected 150 rows, got " + std::to_string(rows.size()));
    return v;
  }
  std::ostringstream t;
  for (const auto& mu_text : kMus) {
    const Rational mu = parse_rational(mu_text);
    struct Point {
      double ready, ready_se, occ, occ_se;
    };
    std::vector<Point> curve;
    for (const auto& a_text : kAlphas) {
      const Rational alpha = parse_rational(a_text);
      double rs = 0, rv = 0, os = 0, ov = 0;
      double n = 0;
      for (const auto& row : rows) {
        if (row.alpha != alpha || row.mu != mu) continue;
        const double reps = static_cast<double>(row.replications);
        rs += row.mean_ready_time;
        rv += row.sd_ready_time * row.sd_ready_time / reps;
        os += row.mean_occupancy;
        ov += row.sd_occupancy * row.sd_occupancy / reps;
        ++n;
      }
      curve.push_back({rs / n, std::sqrt(rv) / n, os / n, std::sqrt(ov) / n});
      t << "    mu=" << mu_text << " alpha=" << a_text << " ready=" << fmt(curve.back().ready) << " (se "
        << fmt(curve.back().ready_se) << ") occupancy=" << fmt(curve.back().occ) << " (se " << fmt(curve.back().occ_se)
        << ")\n";
    }
    auto check = [&](const char* name, double Point::*mean, double Point::*se) {
      int violations = 0;
      for (size_t k = 0; k + 1 < curve.size(); ++k) {
        const double drop = curve[k].*mean - curve[k + 1].*mean;
        if (drop <= 0) continue;
        ++violations;
        const double pair_se = std::hypot(curve[k].*se, curve[k + 1].*se);
        if (drop > pair_se) {
          v.fail(std::string(name) + " falls by " + fmt(drop) + " (> 1 SE = " + fmt(pair_se) + ") between alpha " +
                 kAlphas[k] + " and " + kAlphas[k + 1] + " at mu " + mu_text);
        }
      }
      if (violations > 1) v.fail(std::string(name) + " has " + std::to_string(violations) + " decreasing steps at mu " + mu_text);
    };
    check("mean ready time", &Point::ready, &Point::ready_se);
    check("mean occupancy", &Point::occ, &Point::occ_se);
  }
  table = t.str();
  if (seconds >= 1800.0) v.fail("sweep took " + fmt(seconds) + " s");
  if (v.pass) v.detail = "10 instances x 15 cells, " + fmt(seconds) + " s";
  return v;
}

// 7. the optimal objective never decreases in mu
Verdict mu_monotone(const std::vector<Instance>& instances) {
  Verdict v;
  SolveConfig cfg;
  cfg.state_pack.time_budget = std::chrono::duration<double>(3600.0);
  cfg.state_pack.node_limit = kNodeLimit;
  cfg.terminal_pack = cfg.state_pack;
  int pairs = 0;
  for (size_t i = 0; i < instances.size(); ++i) {
    PackingCache cache;
    for (const auto& a : kAlphas) {
      const auto model = ReliabilityModel::constant(instances[i].horizon, parse_rational(a));
      std::optional<Rational> previous;
      for (const auto& m : kMus) {
        Instance cell = instances[i];
        cell.mu = parse_rational(m);
        const Rational value = expected_objective(solve_value_functions(cell, model, cfg, &cache));
        if (previous) {
          ++pairs;
          if (value < *previous) v.fail("instance " + std::to_string(i) + " alpha " + a + ": objective falls at mu " + m);
        }
        previous = value;
      }
    }
  }
  if (v.pass) v.detail = std::to_string(pairs) + " adjacent mu pairs";
  return v;
}

void report(int number, const char* title, const Verdict& v, int& failures) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << number << ": " << title;
  if (!v.detail.empty()) std::cout << " [" << v.detail << "]";
  std::cout << std::endl;
  if (!v.pass) ++failures;
}

template <typename F>
Verdict guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    Verdict v;
    v.fail(std::string("exception: ") + e.what());
    return v;
  }
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "branch and bound equals exhaustive packing", guarded(packing_matches_oracle), failures);
  report(2, "arrival transitions chain to the closed-form marginals", guarded(arrival_chain), failures);
  report(3, "value functions equal the optimum over measurable stopping rules", guarded(dp_matches_enumeration), failures);
  report(4, "alpha = 1 reduces to the best deterministic stopping period", guarded(deterministic_limit), failures);
  report(5, "Monte Carlo mean within 3 standard errors of the objective", guarded(monte_carlo_consistency), failures);

  TempDir dir;
  std::mt19937_64 rng(606);
  std::vector<Instance> instances;
  std::vector<std::string> files;
  for (int i = 0; i < 10; ++i) {
    instances.push_back(generated_instance(rng, i));
    const auto path = dir.path() / ("gen" + std::to_string(i) + ".txt");
    std::ofstream(path) << format_instance(instances.back());
    files.push_back(path.string());
  }

  const auto first = run_sweep(files, dir.path() / "first.csv");
  std::string table;
  report(6, "occupancy and ready time do not decrease with alpha", guarded([&] {
           if (first.status != 0) {
             Verdict v;
             v.fail("sweep exited " + std::to_string(first.status) + ": " + first.err);
             return v;
           }
           return alpha_trends(read_results(first.csv), first.seconds, table);
         }),
         failures);
  std::cout << table;
  report(7, "objective is monotone in mu", guarded([&] { return mu_monotone(instances); }), failures);

  const auto second = run_sweep(files, dir.path() / "second.csv");
  Verdict same;
  if (first.status != 0 || second.status != 0) same.fail("sweep failed");
  if (first.csv.empty() || first.csv != second.csv) same.fail("CSV bytes differ between runs");
  if (same.pass) same.detail = std::to_string(first.csv.size()) + " bytes";
  report(8, "repeated sweep reproduces the CSV byte for byte", same, failures);

  std::cout << (failures == 0 ? "acceptance: all criteria passed" : "acceptance: " + std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
