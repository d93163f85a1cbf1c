#include "clptac/model.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace clptac {

std::vector<Box> Instance::all_boxes() const {
  std::vector<Box> out;
  for (const auto& s : shipments) out.insert(out.end(), s.boxes.begin(), s.boxes.end());
  return out;
}

std::vector<Box> Instance::boxes_in(ShipmentMask mask) const {
  std::vector<Box> out;
  for (const auto& s : shipments) {
    if (s.index >= 1 && s.index <= kMaxPeriods && (mask & shipment_bit(s.index)) != 0) {
      out.insert(out.end(), s.boxes.begin(), s.boxes.end());
    }
  }
  return out;
}

ShipmentMask Instance::nonempty_mask() const {
  ShipmentMask m = 0;
  for (const auto& s : shipments) {
    if (!s.boxes.empty() && s.index >= 1 && s.index <= kMaxPeriods) m |= shipment_bit(s.index);
  }
  return m;
}

Instance make_instance(Container container, TimeHorizon horizon, std::span<const Box> boxes, Rational mu) {
  Instance inst;
  inst.container = container;
  inst.horizon = horizon;
  inst.mu = std::move(mu);
  const int periods = std::max(horizon.num_periods, 0);
  inst.shipments.resize(static_cast<size_t>(periods));
  for (int t = 1; t <= periods; ++t) inst.shipments[static_cast<size_t>(t - 1)].index = t;
  Shipment stray;
  stray.index = 0;
  for (const auto& b : boxes) {
    if (b.nominal_period >= 1 && b.nominal_period <= periods) {
      inst.shipments[static_cast<size_t>(b.nominal_period - 1)].boxes.push_back(b);
    } else {
      stray.boxes.push_back(b);
    }
  }
  if (!stray.boxes.empty()) inst.shipments.push_back(std::move(stray));
  return inst;
}

ValidationReport validate(const Instance& instance) {
  ValidationReport report;
  auto add = [&](std::string what, int id) { report.violations.push_back({std::move(what), id}); };

  const auto& dims = instance.container.dims;
  for (int a = 0; a < 3; ++a) {
    if (dims[static_cast<size_t>(a)] <= 0) add("nonpositive container dimension on axis " + std::to_string(a + 1), 0);
  }
  const int periods = instance.horizon.num_periods;
  if (periods < 2) add("horizon must have at least 2 periods", 0);
  if (periods > kMaxPeriods) add("horizon exceeds " + std::to_string(kMaxPeriods) + " periods", 0);
  if (sgn(instance.mu) < 0) add("negative empty-volume cost mu", 0);

  std::set<int> seen;
  int expected_index = 1;
  for (const auto& s : instance.shipments) {
    const bool in_horizon = s.index >= 1 && s.index <= periods;
    if (in_horizon && s.index != expected_index) add("shipment out of order", s.index);
    if (in_horizon) ++expected_index;
    for (const auto& b : s.boxes) {
      for (int a = 0; a < 3; ++a) {
        if (b.lengths[static_cast<size_t>(a)] <= 0) {
          add("nonpositive length on axis " + std::to_string(a + 1), b.id);
        }
      }
      if (b.nominal_period < 1 || b.nominal_period > periods) {
        add("period out of horizon", b.id);
      } else if (b.nominal_period != s.index) {
        add("box period differs from its shipment", b.id);
      }
      if (!seen.insert(b.id).second) add("duplicate box id", b.id);
    }
  }
  if (periods >= 1 && expected_index != periods + 1) add("missing shipments for some periods", 0);
  return report;
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].what;
    if (violations[i].entity_id != 0) os << " (id " << violations[i].entity_id << ")";
  }
  return os.str();
}

Volume total_volume(std::span<const Box> boxes) {
  Volume v = 0;
  for (const auto& b : boxes) v += b.volume();
  return v;
}

std::string mask_to_string(ShipmentMask mask, int num_periods) {
  std::string s(static_cast<size_t>(num_periods), '0');
  for (int t = 1; t <= num_periods; ++t) {
    if (mask & shipment_bit(t)) s[static_cast<size_t>(num_periods - t)] = '1';
  }
  return s;
}

ShipmentMask mask_from_string(std::string_view text, int num_periods) {
  if (static_cast<int>(text.size()) != num_periods) throw std::invalid_argument("state label has wrong length");
  ShipmentMask m = 0;
  for (int t = 1; t <= num_periods; ++t) {
    char c = text[static_cast<size_t>(num_periods - t)];
    if (c == '1') {
      m |= shipment_bit(t);
    } else if (c != '0') {
      throw std::invalid_argument("state label must be binary");
    }
  }
  return m;
}

}  // namespace clptac
