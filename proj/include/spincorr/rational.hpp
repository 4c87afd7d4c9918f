#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace spincorr {

/// Exact rational number. All static property checks run on this type.
using Rational = mpq_class;

/// Parses "p/q", an integer, or a plain decimal ("0.25", "1e-3") exactly.
/// Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical text form: "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& value);

/// Exact rational value of the shortest decimal that round-trips `value`.
/// 0.1 maps to 1/10, not to the binary expansion of the double.
Rational rational_from_double(double value);

inline double to_double(const Rational& value) { return value.get_d(); }
inline double to_double(double value) { return value; }

/// p/q in lowest terms. The two-argument mpq_class constructor does not
/// reduce, and every comparison assumes reduced operands.
inline Rational ratio(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

/// Common denominator of `values` and the integer numerators over it.
/// numerators[i] / denominator == values[i].
struct ScaledIntegers {
  std::vector<mpz_class> numerators;
  mpz_class denominator;
};
ScaledIntegers to_common_denominator(const std::vector<Rational>& values);

}  // namespace spincorr
