#include "clptac/io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace clptac;

TEST_CASE("parse_instance minimal file") {
  auto inst = parse_instance("10 10 10\n1\n10 10 10 1 1\n2\n");
  CHECK(inst.container.dims == Dims{10, 10, 10});
  CHECK(inst.horizon.num_periods == 2);
  CHECK(inst.mu == 1);
  REQUIRE(inst.all_boxes().size() == 1);
  CHECK(inst.all_boxes()[0] == Box{1, {10, 10, 10}, 1});
  CHECK(inst.shipments[1].boxes.empty());
}

TEST_CASE("parse_instance expands counts and reads mu") {
  auto inst = parse_instance("# demo\n20 10 10\n2\n5 5 5 3 2\n\n10 10 10 1 1\n3\nmu 2.5\n");
  CHECK(inst.mu == Rational(5, 2));
  CHECK(inst.shipments[0].boxes.size() == 1);
  CHECK(inst.shipments[1].boxes.size() == 3);
  CHECK(inst.shipments[1].boxes[0].id == 1);
  CHECK(inst.shipments[0].boxes[0].id == 4);
  CHECK(validate(inst).ok());
}

TEST_CASE("parse errors carry the location") {
  auto expect_error = [](const std::string& text, const std::string& what, int line) {
    try {
      parse_instance(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(what) != std::string::npos);
      CHECK(e.line() == line);
    }
  };
  expect_error("10 10 10\n1\n10 10 10 1 0\n2\n", "period out of horizon, line 3", 3);
  expect_error("10 10 10\n1\n10 10 10 1 3\n2\n", "period out of horizon", 3);
  expect_error("10 x 10\n1\n10 10 10 1 1\n2\n", "malformed container dimension", 1);
  expect_error("10 10 10\n2\n10 10 10 1 1\n2\n", "box record", 4);
  expect_error("10 10 10\n1\n10 10 10 1 1\n", "missing horizon", 4);
  expect_error("10 10 10\n1\n10 10 10 1\n2\n", "expected 5 fields", 3);
  expect_error("10 10 10\n1\n10 10 10 1 1\n1\n", "at least 2 periods", 4);
  expect_error("10 10 10\n1\n10 10 10 1 1\n2\nmu -1\n", "negative mu", 5);
  expect_error("10 10 10\n1\n10 10 10 1 1\n2\nmu 1\nextra\n", "trailing", 6);
  expect_error("10 10 10\n1\n10 0 10 1 1\n2\n", "nonpositive box length", 3);
  try {
    parse_instance("10 10 10\n1\n10 10 10 1 x\n2\n");
  } catch (const ParseError& e) {
    CHECK(e.column() == 12);
  }
}

TEST_CASE("property: canonical text round-trips") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    testing::RandomInstanceSpec spec;
    spec.num_periods = 2 + trial % 9;
    spec.max_boxes = 12;
    spec.mu = static_cast<double>(trial % 5) / 2.0;
    auto inst = testing::random_instance(rng, spec);
    const std::string text = format_instance(inst);
    auto parsed = parse_instance(text);
    CHECK(format_instance(parsed) == text);
    CHECK(parsed == parse_instance(format_instance(parsed)));
    CHECK(parsed.all_boxes().size() == inst.all_boxes().size());
    CHECK(parsed.mu == inst.mu);
  }
}

TEST_CASE("period-free input and random availability") {
  const std::string text = "587 233 220\n2\n78 37 33 63\n87 42 33 17\n";
  CHECK_FALSE(has_period_column(text));
  CHECK(has_period_column("10 10 10\n1\n10 10 10 1 1\n2\n"));
  auto raw = parse_period_free(text);
  CHECK(raw.boxes.size() == 80);
  auto a = assign_random_availability(raw, TimeHorizon{10}, 5);
  auto b = assign_random_availability(raw, TimeHorizon{10}, 5);
  CHECK(a == b);
  CHECK(validate(a).ok());
  CHECK_THROWS_AS(assign_random_availability(raw, TimeHorizon{1}, 5), std::invalid_argument);
}

TEST_CASE("random availability is uniform over the horizon") {
  PeriodFreeInstance raw;
  raw.container = Container{{10, 10, 10}};
  for (int i = 0; i < 100000; ++i) raw.boxes.push_back({i + 1, {1, 1, 1}, 0});
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto inst = assign_random_availability(raw, TimeHorizon{10}, seed);
    double chi2 = 0.0;
    for (const auto& s : inst.shipments) {
      const double freq = static_cast<double>(s.boxes.size()) / 100000.0;
      CHECK(std::abs(freq - 0.1) < 0.005);
      const double d = static_cast<double>(s.boxes.size()) - 10000.0;
      chi2 += d * d / 10000.0;
    }
    // 9 degrees of freedom, 0.1% critical value
    CHECK(chi2 < 27.88);
  }
}

TEST_CASE("results CSV") {
  ResultsRow r;
  r.instance = "ep1";
  r.alpha = Rational(1, 2);
  r.mu = 4;
  r.mean_ready_time = 0.123456789;
  r.mean_occupancy = 2.0 / 3.0;
  r.mean_realized_cost = 1.5;
  r.expected_cost = 1.49;
  r.replications = 5000;
  r.seed = 17;
  std::ostringstream os;
  write_results({r}, os);
  const std::string csv = os.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find("ep1,0.500000,4.000000,0.123457,0.000000,0.666667,") != std::string::npos);
  auto back = read_results(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].alpha == r.alpha);
  CHECK(back[0].mu == r.mu);
  CHECK(back[0].mean_ready_time == doctest::Approx(r.mean_ready_time).epsilon(1e-6));
  CHECK(back[0].mean_occupancy == doctest::Approx(r.mean_occupancy).epsilon(1e-6));
  CHECK(back[0].replications == 5000);
  CHECK(back[0].seed == 17);

  CHECK_THROWS_WITH_AS(write_results({}, os), "no results", std::invalid_argument);
  CHECK_THROWS_AS(write_results({r}, std::filesystem::path("/nonexistent-dir/x/results.csv")), std::runtime_error);

  auto path = std::filesystem::temp_directory_path() / "clptac_results_test.csv";
  write_results({r, r}, path);
  CHECK(read_results(read_text_file(path)).size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("episode records") {
  EpisodeOutcome e;
  e.stop_period = 2;
  e.loaded_early = true;
  e.ready_time_cost = Rational(1, 5);
  e.realized_cost = Rational(3, 5);
  e.occupancy = 0.75;
  e.realized_arrivals = {1, std::nullopt, 3};
  std::ostringstream os;
  write_episodes({e}, 4, os);
  CHECK(os.str().find("\n0," + std::to_string(replication_seed(4, 0)) + ",2,1,0.200000,0.750000,0,0.600000,1;-;3\n") !=
        std::string::npos);
}
