#ifndef COARSE_RATIONAL_HPP
#define COARSE_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace coarse {

// Exact arbitrary-precision arithmetic. Every probability and every solver
// value in decision paths is a Rat; floating point appears only in Monte
// Carlo reporting.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Renders "p/q", or just "p" when q == 1.
std::string rat_to_string(const Rat& r);

/// Parses "p/q" or "p" (decimal integers, q > 0). Throws ParseError.
Rat rat_from_string(std::string_view text);

std::string int_to_string(const Int& i);

/// Scales a rational vector to the canonical smallest integer vector with the
/// same direction: multiply by the lcm of denominators, divide by the gcd of
/// numerators.
std::vector<Int> integerize(const std::vector<Rat>& v);

}  // namespace coarse

#endif
