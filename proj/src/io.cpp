#include "clptac/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace clptac {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(what + ", line " + std::to_string(line) + (column > 0 ? ", column " + std::to_string(column) : "")),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string_view text;
  int column = 0;
};

struct Line {
  int number = 0;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    Line line{number, {}};
    size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r')) ++i;
      if (i >= raw.size()) break;
      size_t j = i;
      while (j < raw.size() && raw[j] != ' ' && raw[j] != '\t' && raw[j] != '\r') ++j;
      line.tokens.push_back({raw.substr(i, j - i), static_cast<int>(i) + 1});
      i = j;
    }
    const bool comment = !line.tokens.empty() && line.tokens.front().text.starts_with('#');
    if (!line.tokens.empty() && !comment) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

std::int64_t parse_int(const Line& line, size_t k, const char* what, std::int64_t min_value) {
  if (k >= line.tokens.size()) throw ParseError(std::string("missing ") + what, line.number, 0);
  const auto& tok = line.tokens[k];
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
  if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
    throw ParseError(std::string("malformed ") + what + " '" + std::string(tok.text) + "'", line.number, tok.column);
  }
  if (v < min_value) {
    throw ParseError(std::string(min_value > 0 ? "nonpositive " : "negative ") + what, line.number, tok.column);
  }
  return v;
}

std::int64_t positive_int(const Line& line, size_t k, const char* what) { return parse_int(line, k, what, 1); }

void expect_width(const Line& line, size_t width, const char* what) {
  if (line.tokens.size() != width) {
    throw ParseError(std::string(what) + ": expected " + std::to_string(width) + " fields, got " +
                         std::to_string(line.tokens.size()),
                     line.number, 0);
  }
}

struct Record {
  Dims lengths{};
  std::int64_t count = 0;
  std::int64_t period = 0;
  int line = 0;
  int period_column = 0;
};

struct Parsed {
  Container container;
  std::vector<Record> records;
  std::int64_t horizon = 0;
  int horizon_line = 0;
  Rational mu{1};
  bool with_period = true;
};

Parsed parse_common(std::string_view text, bool with_period, bool horizon_required) {
  const auto lines = tokenize(text);
  size_t at = 0;
  auto next = [&](const char* what) -> const Line& {
    if (at >= lines.size()) {
      const int last = lines.empty() ? 1 : lines.back().number + 1;
      throw ParseError(std::string("missing ") + what, last, 0);
    }
    return lines[at++];
  };

  Parsed p;
  p.with_period = with_period;
  const Line& header = next("container line");
  expect_width(header, 3, "container line");
  for (size_t a = 0; a < 3; ++a) p.container.dims[a] = positive_int(header, a, "container dimension");

  const Line& kline = next("box type count");
  expect_width(kline, 1, "box type count");
  const auto k = parse_int(kline, 0, "box type count", 0);

  const size_t width = with_period ? 5 : 4;
  for (std::int64_t r = 0; r < k; ++r) {
    const Line& line = next("box record");
    expect_width(line, width, "box record");
    Record rec;
    rec.line = line.number;
    for (size_t a = 0; a < 3; ++a) rec.lengths[a] = positive_int(line, a, "box length");
    rec.count = positive_int(line, 3, "box count");
    if (with_period) {
      // period range is checked once H is known
      const auto& tok = line.tokens[4];
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), rec.period);
      if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
        throw ParseError("malformed period '" + std::string(tok.text) + "'", line.number, tok.column);
      }
      rec.period_column = tok.column;
    }
    p.records.push_back(rec);
  }

  if (at < lines.size() && lines[at].tokens.front().text != "mu") {
    const Line& hline = next("horizon");
    expect_width(hline, 1, "horizon");
    p.horizon = positive_int(hline, 0, "horizon");
    p.horizon_line = hline.number;
  } else if (horizon_required) {
    next("horizon");
  }

  if (at < lines.size()) {
    const Line& mline = lines[at++];
    if (mline.tokens.front().text != "mu" || mline.tokens.size() != 2) {
      throw ParseError("expected 'mu <value>'", mline.number, mline.tokens.front().column);
    }
    try {
      p.mu = parse_rational(mline.tokens[1].text);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed mu '" + std::string(mline.tokens[1].text) + "'", mline.number, mline.tokens[1].column);
    }
    if (sgn(p.mu) < 0) throw ParseError("negative mu", mline.number, mline.tokens[1].column);
  }
  if (at < lines.size()) throw ParseError("unexpected trailing content", lines[at].number, lines[at].tokens.front().column);
  return p;
}

bool is_int_token(std::string_view s) {
  std::int64_t v;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

bool has_period_column(std::string_view text) {
  const auto lines = tokenize(text);
  return lines.size() < 3 || lines[2].tokens.size() != 4;
}

Instance parse_instance(std::string_view text) {
  const Parsed p = parse_common(text, true, true);
  if (p.horizon < 2) throw ParseError("horizon must have at least 2 periods", p.horizon_line, 0);
  if (p.horizon > kMaxPeriods) throw ParseError("horizon too long", p.horizon_line, 0);

  std::vector<Box> boxes;
  int id = 1;
  for (const auto& rec : p.records) {
    if (rec.period < 1 || rec.period > p.horizon) throw ParseError("period out of horizon", rec.line, rec.period_column);
    for (std::int64_t c = 0; c < rec.count; ++c) boxes.push_back({id++, rec.lengths, static_cast<int>(rec.period)});
  }
  Instance inst = make_instance(p.container, TimeHorizon{static_cast<int>(p.horizon)}, boxes, p.mu);
  if (auto report = validate(inst); !report.ok()) throw ParseError("invalid instance: " + report.to_string(), 1, 0);
  return inst;
}

PeriodFreeInstance parse_period_free(std::string_view text) {
  const Parsed p = parse_common(text, false, false);
  PeriodFreeInstance out;
  out.container = p.container;
  out.mu = p.mu;
  int id = 1;
  for (const auto& rec : p.records) {
    for (std::int64_t c = 0; c < rec.count; ++c) out.boxes.push_back({id++, rec.lengths, 0});
  }
  return out;
}

std::string format_instance(const Instance& instance) {
  auto boxes = instance.all_boxes();
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) { return a.id < b.id; });
  struct Run {
    Box box;
    std::int64_t count;
  };
  std::vector<Run> runs;
  for (const auto& b : boxes) {
    if (!runs.empty() && runs.back().box.lengths == b.lengths && runs.back().box.nominal_period == b.nominal_period) {
      ++runs.back().count;
    } else {
      runs.push_back({b, 1});
    }
  }
  std::ostringstream os;
  const auto& d = instance.container.dims;
  os << d[0] << ' ' << d[1] << ' ' << d[2] << '\n' << runs.size() << '\n';
  for (const auto& r : runs) {
    const auto& l = r.box.lengths;
    os << l[0] << ' ' << l[1] << ' ' << l[2] << ' ' << r.count << ' ' << r.box.nominal_period << '\n';
  }
  os << instance.horizon.num_periods << '\n' << "mu " << to_string(instance.mu) << '\n';
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Instance assign_random_availability(const PeriodFreeInstance& raw, TimeHorizon horizon, std::uint64_t seed) {
  if (horizon.num_periods < 2) throw std::invalid_argument("horizon must have at least 2 periods");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> period(1, horizon.num_periods);
  std::vector<Box> boxes = raw.boxes;
  for (auto& b : boxes) b.nominal_period = period(rng);
  return make_instance(raw.container, horizon, boxes, raw.mu);
}

void write_results(const std::vector<ResultsRow>& rows, std::ostream& out) {
  if (rows.empty()) throw std::invalid_argument("no results");
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.instance << ',' << to_fixed(r.alpha, 6) << ',' << to_fixed(r.mu, 6) << ',' << fixed6(r.mean_ready_time)
        << ',' << fixed6(r.sd_ready_time) << ',' << fixed6(r.mean_occupancy) << ',' << fixed6(r.sd_occupancy) << ','
        << fixed6(r.mean_overflow_trucks) << ',' << fixed6(r.mean_realized_cost) << ',' << fixed6(r.expected_cost)
        << ',' << r.replications << ',' << r.seed << ',' << fixed6(r.exact_state_fraction) << '\n';
  }
}

void write_results(const std::vector<ResultsRow>& rows, const std::filesystem::path& destination) {
  if (rows.empty()) throw std::invalid_argument("no results");
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + destination.string() + "'");
  write_results(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("cannot write '" + destination.string() + "'");
}

std::vector<ResultsRow> read_results(std::string_view csv) {
  std::vector<ResultsRow> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw std::invalid_argument("missing results header");
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 13) throw ParseError("results row needs 13 fields", number, 0);
    ResultsRow r;
    r.instance = f[0];
    r.alpha = parse_rational(f[1]);
    r.mu = parse_rational(f[2]);
    r.mean_ready_time = std::stod(f[3]);
    r.sd_ready_time = std::stod(f[4]);
    r.mean_occupancy = std::stod(f[5]);
    r.sd_occupancy = std::stod(f[6]);
    r.mean_overflow_trucks = std::stod(f[7]);
    r.mean_realized_cost = std::stod(f[8]);
    r.expected_cost = std::stod(f[9]);
    if (!is_int_token(f[10]) || !is_int_token(f[11])) throw ParseError("malformed integer field", number, 0);
    r.replications = std::stoull(f[10]);
    r.seed = std::stoull(f[11]);
    r.exact_state_fraction = std::stod(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_episodes(const std::vector<EpisodeOutcome>& episodes, std::uint64_t base_seed, std::ostream& out) {
  out << "replication,seed,stop_period,loaded_early,ready_time,occupancy,overflow_trucks,realized_cost,arrivals\n";
  for (size_t r = 0; r < episodes.size(); ++r) {
    const auto& e = episodes[r];
    out << r << ',' << replication_seed(base_seed, r) << ',' << e.stop_period << ',' << (e.loaded_early ? 1 : 0) << ','
        << to_fixed(e.ready_time_cost, 6) << ',' << fixed6(e.occupancy) << ',' << e.overflow_trucks << ','
        << to_fixed(e.realized_cost, 6) << ',';
    for (size_t k = 0; k < e.realized_arrivals.size(); ++k) {
      if (k) out << ';';
      if (e.realized_arrivals[k]) {
        out << *e.realized_arrivals[k];
      } else {
        out << '-';
      }
    }
    out << '\n';
  }
}

}  // namespace clptac
