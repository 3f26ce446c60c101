#include "coarse/rational.hpp"

#include "coarse/errors.hpp"

namespace coarse {

std::string rat_to_string(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) {
    s += "/";
    s += denominator(r).str();
  }
  return s;
}

std::string int_to_string(const Int& i) { return i.str(); }

namespace {

bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  size_t pos = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = (s[0] == '-');
    pos = 1;
  }
  if (pos == s.size()) return false;
  Int value = 0;
  for (; pos < s.size(); ++pos) {
    if (s[pos] < '0' || s[pos] > '9') return false;
    value = value * 10 + (s[pos] - '0');
  }
  out = neg ? -value : value;
  return true;
}

}  // namespace

Rat rat_from_string(std::string_view text) {
  size_t slash = text.find('/');
  Int num, den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) throw ParseError("bad rational: '" + std::string(text) + "'");
  } else {
    if (!parse_int(text.substr(0, slash), num) || !parse_int(text.substr(slash + 1), den))
      throw ParseError("bad rational: '" + std::string(text) + "'");
    if (den <= 0) throw ParseError("rational denominator must be positive: '" + std::string(text) + "'");
  }
  return Rat(num, den);
}

std::vector<Int> integerize(const std::vector<Rat>& v) {
  Int den_lcm = 1;
  for (const Rat& r : v) den_lcm = lcm(den_lcm, denominator(r));
  std::vector<Int> out;
  out.reserve(v.size());
  Int num_gcd = 0;
  for (const Rat& r : v) {
    Int scaled = numerator(r) * (den_lcm / denominator(r));
    num_gcd = gcd(num_gcd, scaled);
    out.push_back(scaled);
  }
  if (num_gcd > 1) {
    for (Int& i : out) i /= num_gcd;
  }
  return out;
}

}  // namespace coarse
