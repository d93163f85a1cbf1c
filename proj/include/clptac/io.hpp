#pragma once

#include "clptac/model.hpp"
#include "clptac/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clptac {

/// Instance text format error with a 1-based location.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Container and boxes from a file whose box records carry no period column.
struct PeriodFreeInstance {
  Container container;
  std::vector<Box> boxes;  // nominal_period is 0 until assigned
  Rational mu{1};
};

/// Instance text format:
///
///     L1 L2 L3
///     K
///     l1 l2 l3 count t      (K records, expanded to `count` boxes of period t)
///     H
///     mu <value>            (optional, default 1)
///
/// Box ids are assigned 1.. in file order. Blank lines and lines starting with '#' are skipped.
Instance parse_instance(std::string_view text);

/// Same layout with four-column box records "l1 l2 l3 count"; the H line is optional.
PeriodFreeInstance parse_period_free(std::string_view text);

/// True if the box records carry a period column.
bool has_period_column(std::string_view text);

/// Canonical text: records are runs of consecutive ids with equal lengths and period.
std::string format_instance(const Instance& instance);

std::string read_text_file(const std::filesystem::path& path);

/// Gives every box an independent uniform period in [1, horizon]. Deterministic given the seed.
/// Throws std::invalid_argument for horizons shorter than 2.
Instance assign_random_availability(const PeriodFreeInstance& raw, TimeHorizon horizon, std::uint64_t seed);

struct ResultsRow {
  std::string instance;
  Rational alpha;
  Rational mu;
  double mean_ready_time = 0.0;
  double sd_ready_time = 0.0;
  double mean_occupancy = 0.0;
  double sd_occupancy = 0.0;
  double mean_overflow_trucks = 0.0;
  double mean_realized_cost = 0.0;
  double expected_cost = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double exact_state_fraction = 1.0;
};

inline constexpr std::string_view kResultsHeader =
    "instance,alpha,mu,mean_ready_time,sd_ready_time,mean_occupancy,sd_occupancy,mean_overflow_trucks,"
    "mean_realized_cost,expected_cost,replications,seed,exact_state_fraction";

/// CSV with kResultsHeader, six fractional digits for real columns.
/// Throws std::invalid_argument("no results") for an empty list.
void write_results(const std::vector<ResultsRow>& rows, std::ostream& out);
/// Throws std::runtime_error when the destination cannot be written.
void write_results(const std::vector<ResultsRow>& rows, const std::filesystem::path& destination);

std::vector<ResultsRow> read_results(std::string_view csv);

/// Per-replication records: replication,seed,stop_period,loaded_early,ready_time,occupancy,
/// overflow_trucks,realized_cost,arrivals (';'-joined, '-' for never).
void write_episodes(const std::vector<EpisodeOutcome>& episodes, std::uint64_t base_seed, std::ostream& out);

}  // namespace clptac
