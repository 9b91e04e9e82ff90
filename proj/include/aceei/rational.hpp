#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aceei {

/// Exact rational number. All prices, budgets and taxes use this type.
using Rational = mpq_class;

/// num/den in canonical form. Prefer this over the two-argument mpq_class constructor, which does
/// not reduce.
inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

class RationalParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "n", "n/d" or a finite decimal such as "1.03" into a canonical rational.
Rational parse_rational(std::string_view text);

/// Always "num/den" (e.g. "1/1", "-3/20"), the wire format for rationals.
std::string to_string(const Rational& value);

/// Decimal rendering for human-facing reports only.
std::string to_decimal(const Rational& value, int digits = 6);

double to_double(const Rational& value);

/// base^exponent for a nonnegative exponent.
Rational pow(const Rational& base, unsigned long exponent);

/// Nearest multiple of `step` (ties round up).
Rational round_to_multiple(const Rational& value, const Rational& step);

Rational floor_to_multiple(const Rational& value, const Rational& step);
Rational ceil_to_multiple(const Rational& value, const Rational& step);

bool is_integer(const Rational& value);

/// Integer square root test: returns true and the root when `value` is a perfect square.
bool exact_sqrt(const Rational& value, Rational& root);

}  // namespace aceei
