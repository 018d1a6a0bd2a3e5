#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace taxoforge {

using Rational = boost::rational<std::int64_t>;

// Accepts "3", "-8", "2.5", "7/2".
Rational parse_rational(std::string_view text);

// "p/q", or "p" when q == 1.
std::string to_string(const Rational& r);

// Decimal rendering rounded half away from zero, exactly.
std::string to_decimal(const Rational& r, int places);

}  // namespace taxoforge
