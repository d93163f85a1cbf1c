#include "cli.hpp"

#include "clptac/dp.hpp"
#include "clptac/io.hpp"
#include "clptac/packing.hpp"
#include "clptac/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clptac::cli {

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> instances;
  std::vector<std::string> alphas;
  std::vector<std::string> mus;
  std::size_t replications = 5000;
  std::uint64_t seed = 1;
  double budget_state = 5.0;
  double budget_terminal = 3600.0;
  int horizon = 10;
  std::size_t max_states = std::size_t{1} << 22;
  std::uint64_t node_limit = 0;
  std::string out;
  std::string episodes;
  std::string preset = "paper";
  int workers = 0;
};

struct Preset {
  double budget_state;
  double budget_terminal;
  int horizon;
};

Preset preset_values(const std::string& name) {
  if (name == "desk") return {0.5, 10.0, 6};
  return {5.0, 3600.0, 10};
}

void apply_preset(CLI::App& cmd, RunConfig& cfg) {
  const Preset p = preset_values(cfg.preset);
  if (cmd.count("--budget-state") == 0) cfg.budget_state = p.budget_state;
  if (cmd.count("--budget-terminal") == 0) cfg.budget_terminal = p.budget_terminal;
  if (cmd.count("--horizon") == 0) cfg.horizon = p.horizon;
  if (cfg.budget_state <= 0 || cfg.budget_terminal <= 0) throw UsageError("budgets must be positive");
  if (cfg.replications < 1) throw UsageError("replications must be at least 1");
#ifdef _OPENMP
  if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
}

std::vector<Rational> parse_alphas(const std::vector<std::string>& texts) {
  std::vector<Rational> out;
  for (const auto& t : texts) {
    Rational a;
    try {
      a = parse_rational(t);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--alpha: ") + e.what());
    }
    if (sgn(a) <= 0 || a > 1) throw UsageError("--alpha values must lie in (0, 1], got " + t);
    out.push_back(a);
  }
  return out;
}

std::vector<Rational> parse_mus(const std::vector<std::string>& texts) {
  std::vector<Rational> out;
  for (const auto& t : texts) {
    Rational m;
    try {
      m = parse_rational(t);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--mu: ") + e.what());
    }
    if (sgn(m) < 0) throw UsageError("--mu values must be nonnegative, got " + t);
    out.push_back(m);
  }
  return out;
}

Instance load_instance(const std::string& path, CLI::App& cmd, const RunConfig& cfg) {
  const std::string text = read_text_file(path);
  Instance inst;
  if (has_period_column(text)) {
    inst = parse_instance(text);
    if (cmd.count("--horizon") != 0 && inst.horizon.num_periods != cfg.horizon) {
      throw UsageError("--horizon conflicts with the horizon stored in " + path);
    }
  } else {
    inst = assign_random_availability(parse_period_free(text), TimeHorizon{cfg.horizon}, cfg.seed);
  }
  if (cfg.preset == "desk" && inst.horizon.num_periods > preset_values("desk").horizon) {
    throw UsageError("--preset desk supports at most " + std::to_string(preset_values("desk").horizon) + " periods");
  }
  return inst;
}

SolveConfig solve_config(const RunConfig& cfg) {
  SolveConfig s;
  s.state_pack.time_budget = std::chrono::duration<double>(cfg.budget_state);
  s.state_pack.node_limit = cfg.node_limit;
  s.terminal_pack.time_budget = std::chrono::duration<double>(cfg.budget_terminal);
  s.terminal_pack.node_limit = cfg.node_limit;
  s.max_states = cfg.max_states;
  return s;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

PolicyResult solve_policy(const Instance& inst, const Rational& alpha, const Rational& mu, const RunConfig& cfg,
                          PackingCache* cache) {
  Instance with_mu = inst;
  with_mu.mu = mu;
  auto model = ReliabilityModel::constant(inst.horizon, alpha);
  try {
    return solve_value_functions(with_mu, model, solve_config(cfg), cache);
  } catch (const std::length_error& e) {
    throw std::runtime_error(std::string(e.what()) + "; use a smaller horizon or raise --max-states");
  }
}

ResultsRow make_row(const std::string& id, const Rational& alpha, const Rational& mu, const PolicyResult& policy,
                    const AggregateStats& stats, const RunConfig& cfg) {
  ResultsRow row;
  row.instance = id;
  row.alpha = alpha;
  row.mu = mu;
  row.mean_ready_time = stats.mean_ready_time;
  row.sd_ready_time = stats.sd_ready_time;
  row.mean_occupancy = stats.mean_occupancy;
  row.sd_occupancy = stats.sd_occupancy;
  row.mean_overflow_trucks = stats.mean_overflow_trucks;
  row.mean_realized_cost = stats.mean_realized_cost;
  row.expected_cost = to_double(policy.expected_cost);
  row.replications = stats.replications;
  row.seed = cfg.seed;
  row.exact_state_fraction = policy.exact_state_fraction;
  return row;
}

int cmd_pack(CLI::App& cmd, RunConfig& cfg, std::ostream& out) {
  apply_preset(cmd, cfg);
  const Instance inst = load_instance(cfg.instances.at(0), cmd, cfg);
  PackConfig pc;
  pc.time_budget = std::chrono::duration<double>(cfg.budget_terminal);
  pc.node_limit = cfg.node_limit;
  const auto boxes = inst.all_boxes();
  const auto sol = pack_max_volume(boxes, inst.container, pc);
  out << "boxes=" << boxes.size() << " placed=" << sol.placements.size() << " loaded_volume=" << sol.loaded_volume
      << " unloaded_volume=" << sol.unloaded_volume << " capacity=" << inst.container.capacity()
      << " occupancy=" << fixed6(sol.occupancy(inst.container)) << " optimal=" << (sol.proven_optimal ? "true" : "false")
      << " elapsed_ms=" << fixed6(std::chrono::duration<double, std::milli>(sol.elapsed).count()) << '\n';
  if (!cfg.out.empty()) {
    nlohmann::json placements = nlohmann::json::array();
    for (const auto& p : sol.placements) placements.push_back({{"box", p.box_id}, {"origin", p.origin}});
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot write '" + cfg.out + "'");
    f << nlohmann::json{{"loaded_volume", sol.loaded_volume},
                        {"unloaded_volume", sol.unloaded_volume},
                        {"proven_optimal", sol.proven_optimal},
                        {"placements", placements}}
             .dump(2)
      << '\n';
  }
  return 0;
}

int cmd_policy(CLI::App& cmd, RunConfig& cfg, std::ostream& out) {
  apply_preset(cmd, cfg);
  const auto alphas = parse_alphas(cfg.alphas);
  const auto mus = parse_mus(cfg.mus);
  if (alphas.size() != 1 || mus.size() > 1) throw UsageError("policy needs exactly one --alpha and at most one --mu");
  const Instance inst = load_instance(cfg.instances.at(0), cmd, cfg);
  const Rational mu = mus.empty() ? inst.mu : mus.front();
  const auto policy = solve_policy(inst, alphas.front(), mu, cfg, nullptr);
  const std::string doc = to_json(policy).dump(2);
  if (cfg.out.empty()) {
    out << doc << '\n';
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot write '" + cfg.out + "'");
    f << doc << '\n';
    out << "expected_cost=" << fixed6(to_double(policy.expected_cost)) << " expected_cost_exact=" << to_string(policy.expected_cost)
        << " states=" << policy.value_table.size() << " exact_state_fraction=" << fixed6(policy.exact_state_fraction)
        << '\n';
  }
  return 0;
}

int cmd_simulate(CLI::App& cmd, RunConfig& cfg, std::ostream& out) {
  apply_preset(cmd, cfg);
  const auto alphas = parse_alphas(cfg.alphas);
  const auto mus = parse_mus(cfg.mus);
  if (alphas.size() != 1 || mus.size() > 1) throw UsageError("simulate needs exactly one --alpha and at most one --mu");
  Instance inst = load_instance(cfg.instances.at(0), cmd, cfg);
  if (!mus.empty()) inst.mu = mus.front();
  const auto policy = solve_policy(inst, alphas.front(), inst.mu, cfg, nullptr);
  const auto model = ReliabilityModel::constant(inst.horizon, alphas.front());
  const auto stats = run_monte_carlo(inst, model, policy.value_table, cfg.replications, cfg.seed);
  out << "expected_cost=" << fixed6(to_double(policy.expected_cost)) << " mean_realized_cost=" << fixed6(stats.mean_realized_cost)
      << " stderr=" << fixed6(stats.stderr_realized_cost()) << " mean_ready_time=" << fixed6(stats.mean_ready_time)
      << " mean_occupancy=" << fixed6(stats.mean_occupancy) << " mean_overflow_trucks=" << fixed6(stats.mean_overflow_trucks)
      << " replications=" << stats.replications << '\n';
  if (!cfg.out.empty()) {
    write_results({make_row(stem(cfg.instances.at(0)), alphas.front(), inst.mu, policy, stats, cfg)}, cfg.out);
  }
  if (!cfg.episodes.empty()) {
    std::ofstream f(cfg.episodes);
    if (!f) throw std::runtime_error("cannot write '" + cfg.episodes + "'");
    write_episodes(simulate_episodes(inst, model, policy.value_table, cfg.replications, cfg.seed), cfg.seed, f);
  }
  return 0;
}

int cmd_sweep(CLI::App& cmd, RunConfig& cfg, std::ostream& out, std::ostream& err) {
  apply_preset(cmd, cfg);
  if (cfg.alphas.empty()) cfg.alphas = {"0.5", "0.6", "0.7", "0.8", "0.9"};
  if (cfg.mus.empty()) cfg.mus = {"1", "2", "4"};
  const auto alphas = parse_alphas(cfg.alphas);
  const auto mus = parse_mus(cfg.mus);

  std::vector<ResultsRow> rows;
  int status = 0;
  try {
    for (const auto& path : cfg.instances) {
      const Instance inst = load_instance(path, cmd, cfg);
      PackingCache cache;
      for (const auto& alpha : alphas) {
        const auto model = ReliabilityModel::constant(inst.horizon, alpha);
        for (const auto& mu : mus) {
          Instance cell = inst;
          cell.mu = mu;
          const auto policy = solve_policy(cell, alpha, mu, cfg, &cache);
          const auto stats = run_monte_carlo(cell, model, policy.value_table, cfg.replications, cfg.seed);
          rows.push_back(make_row(stem(path), alpha, mu, policy, stats, cfg));
        }
      }
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    err << "sweep failed: " << e.what() << '\n';
    status = 1;
  }
  if (rows.empty()) return status == 0 ? 1 : status;
  if (cfg.out.empty()) {
    write_results(rows, out);
  } else {
    write_results(rows, std::filesystem::path(cfg.out));
    out << "rows=" << rows.size() << " out=" << cfg.out << '\n';
  }
  return status;
}

void add_common(CLI::App& cmd, RunConfig& cfg, bool many_instances) {
  if (many_instances) {
    cmd.add_option("instances", cfg.instances, "Instance files")->required()->check(CLI::ExistingFile);
  } else {
    cmd.add_option("instance", cfg.instances, "Instance file")->required()->expected(1)->check(CLI::ExistingFile);
  }
  cmd.add_option("--seed", cfg.seed, "Base seed for availability assignment and Monte Carlo");
  cmd.add_option("--budget-state", cfg.budget_state, "Packing time budget per interior state, seconds");
  cmd.add_option("--budget-terminal", cfg.budget_terminal, "Packing time budget for last-period states, seconds");
  cmd.add_option("--horizon", cfg.horizon, "Periods for instances without availability times")->check(CLI::Range(2, kMaxPeriods));
  cmd.add_option("--max-states", cfg.max_states, "Cap on reachable DP states");
  cmd.add_option("--node-limit", cfg.node_limit, "Deterministic packing node cap (0 = none)");
  cmd.add_option("--out", cfg.out, "Output path");
  cmd.add_option("--preset", cfg.preset, "paper (3600s/5s, |T|=10) or desk (10s/0.5s, |T|<=6)")
      ->check(CLI::IsMember({"paper", "desk"}));
  cmd.add_option("--workers", cfg.workers, "OpenMP worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Container loading with time availability constraints: packing, stopping policies, simulation"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* pack = app.add_subcommand("pack", "Maximum loadable volume of the whole box set");
  add_common(*pack, cfg, false);

  auto* policy = app.add_subcommand("policy", "Optimal load/wait policy as JSON");
  add_common(*policy, cfg, false);
  policy->add_option("--alpha", cfg.alphas, "Reliability index in (0, 1]")->required()->delimiter(',');
  policy->add_option("--mu", cfg.mus, "Empty-volume cost (default: instance value)")->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of the optimal policy");
  add_common(*simulate, cfg, false);
  simulate->add_option("--alpha", cfg.alphas, "Reliability index in (0, 1]")->required()->delimiter(',');
  simulate->add_option("--mu", cfg.mus, "Empty-volume cost (default: instance value)")->delimiter(',');
  simulate->add_option("--replications", cfg.replications, "Monte Carlo replications");
  simulate->add_option("--episodes", cfg.episodes, "Per-replication CSV output path");

  auto* sweep = app.add_subcommand("sweep", "Policy and Monte Carlo over the alpha x mu grid, CSV output");
  add_common(*sweep, cfg, true);
  sweep->add_option("--alpha", cfg.alphas, "Reliability indices (default 0.5,0.6,0.7,0.8,0.9)")->delimiter(',');
  sweep->add_option("--mu", cfg.mus, "Empty-volume costs (default 1,2,4)")->delimiter(',');
  sweep->add_option("--replications", cfg.replications, "Monte Carlo replications per cell");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*pack) return cmd_pack(*pack, cfg, out);
    if (*policy) return cmd_policy(*policy, cfg, out);
    if (*simulate) return cmd_simulate(*simulate, cfg, out);
    if (*sweep) return cmd_sweep(*sweep, cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace clptac::cli
