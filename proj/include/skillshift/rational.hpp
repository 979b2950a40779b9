#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace skillshift {

/// Arbitrary-precision exact fraction. Success rates, RPDs and costs are
/// carried in this type; conversion to decimal happens only on output.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "0.97", "-3.18", "1", "3/4". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Decimal rendering rounded half away from zero, e.g. 67/100 -> "0.67".
std::string format_fixed(const Rational& value, int decimals);

/// "p/q", or "p" when the denominator is one.
std::string format_exact(const Rational& value);

double to_double(const Rational& value);

}  // namespace skillshift
