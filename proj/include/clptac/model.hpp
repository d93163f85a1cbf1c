#pragma once

#include "clptac/rational.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace clptac {

using Length = std::int64_t;
using Volume = std::int64_t;

/// Edge lengths along axes 1, 2, 3.
using Dims = std::array<Length, 3>;

/// A rigid rectangular item. Orientation is fixed to the given axis order.
struct Box {
  int id = 0;
  Dims lengths{};
  int nominal_period = 1;

  Volume volume() const { return lengths[0] * lengths[1] * lengths[2]; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Container {
  Dims dims{};

  Volume capacity() const { return dims[0] * dims[1] * dims[2]; }
  friend bool operator==(const Container&, const Container&) = default;
};

/// Discrete periods 1..num_periods. The last period is terminal.
struct TimeHorizon {
  int num_periods = 2;

  bool is_terminal(int period) const { return period == num_periods; }
  friend bool operator==(const TimeHorizon&, const TimeHorizon&) = default;
};

/// Boxes with nominal availability period `index`. May be empty.
struct Shipment {
  int index = 1;
  std::vector<Box> boxes;

  friend bool operator==(const Shipment&, const Shipment&) = default;
};

/// Bit (t - 1) set means shipment t has arrived.
using ShipmentMask = std::uint32_t;

/// Longest horizon representable by ShipmentMask.
inline constexpr int kMaxPeriods = 30;

inline constexpr ShipmentMask shipment_bit(int period) { return ShipmentMask{1} << (period - 1); }

struct Instance {
  Container container;
  TimeHorizon horizon;
  std::vector<Shipment> shipments;  // shipments[t - 1] has index t
  Rational mu{1};

  /// All boxes ordered by shipment then by position inside the shipment.
  std::vector<Box> all_boxes() const;

  /// Boxes of every shipment whose bit is set in `mask`.
  std::vector<Box> boxes_in(ShipmentMask mask) const;

  /// Mask of the shipments that carry at least one box.
  ShipmentMask nonempty_mask() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Groups boxes into |T| shipments by nominal period. Boxes outside the horizon are kept
/// in an extra trailing list so validate() can report them.
Instance make_instance(Container container, TimeHorizon horizon, std::span<const Box> boxes, Rational mu = Rational(1));

struct Violation {
  std::string what;
  int entity_id = 0;  // box id, shipment index, or 0 for instance-level issues

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const Instance& instance);

/// Sum of l1*l2*l3; zero for the empty set.
Volume total_volume(std::span<const Box> boxes);

/// State label: highest period first, e.g. "010" for {B2} with |T| = 3.
std::string mask_to_string(ShipmentMask mask, int num_periods);

/// Inverse of mask_to_string. Throws std::invalid_argument on bad characters or length.
ShipmentMask mask_from_string(std::string_view text, int num_periods);

}  // namespace clptac
