#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pregma {

/// Exact rational number. Every probability in the toolkit is one of these.
using Rational = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `p/q`, `p` or a finite decimal such as `0.25` / `1e-6`.
/// Throws Error on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// `p/q` form (integers print without the denominator).
std::string to_fraction(const Rational& q);

/// Decimal rendering rounded to `digits` fractional digits.
std::string to_decimal(const Rational& q, int digits = 12);

/// Largest multiple of 2^-bits that is <= q.
Rational round_down(const Rational& q, unsigned bits);
/// Smallest multiple of 2^-bits that is >= q.
Rational round_up(const Rational& q, unsigned bits);

/// Bit length of the denominator, used to decide when iterates need rounding.
std::size_t denominator_bits(const Rational& q);

/// Number of bits needed so that 2^-bits <= eps.
unsigned bits_for(const Rational& eps);

inline Rational clamp01(const Rational& q) {
  if (q < 0) return Rational(0);
  if (q > 1) return Rational(1);
  return q;
}

/// Closed rational interval [lo, hi].
struct Interval {
  Rational lo{0};
  Rational hi{1};

  static Interval point(const Rational& v) { return {v, v}; }
  bool contains(const Rational& v) const { return lo <= v && v <= hi; }
  Rational width() const { return hi - lo; }
  bool exact() const { return lo == hi; }
};

Interval hull(const Interval& a, const Interval& b);

}  // namespace pregma
