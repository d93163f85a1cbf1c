#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace clptac {

/// Exact rational number used for costs, probabilities and the empty-volume weight.
using Rational = mpq_class;

/// Parses "3", "-2", "0.25", "1e-3" style decimals or "p/q" fractions exactly.
/// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// Canonical text: "p" when the denominator is 1, otherwise "p/q".
std::string to_string(const Rational& value);

inline double to_double(const Rational& value) { return value.get_d(); }

/// Decimal rendering with a fixed number of fractional digits (rounded half away from zero).
std::string to_fixed(const Rational& value, int digits);

}  // namespace clptac
