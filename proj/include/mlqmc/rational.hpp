#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

#include "errors.hpp"

namespace mlqmc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline BigInt ipow(BigInt base, unsigned e) {
  BigInt r = 1;
  while (e) {
    if (e & 1u) r *= base;
    base *= base;
    e >>= 1u;
  }
  return r;
}

inline Rational rpow(const Rational& base, long e) {
  if (e >= 0) {
    return Rational(ipow(numerator(base), unsigned(e)), ipow(denominator(base), unsigned(e)));
  }
  if (base == 0) throw usage_error("rpow: zero base with negative exponent");
  return Rational(ipow(denominator(base), unsigned(-e)), ipow(numerator(base), unsigned(-e)));
}

// Base-10 integer parser. The cpp_int string constructor honors C-style
// prefixes ("0x" hex, leading "0" octal), which would silently corrupt
// decimal fractions like ".037"; always parse digit by digit instead.
inline BigInt parse_bigint(const std::string& s) {
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
  if (i == s.size()) throw usage_error("parse_bigint: no digits in '" + s + "'");
  BigInt r = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9')
      throw usage_error("parse_bigint: bad digit in '" + s + "'");
    r = r * 10 + (s[i] - '0');
  }
  return neg ? -r : r;
}

// Parses "3", "-3", "3/4" or a plain decimal like "1.25" into an exact rational.
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) throw usage_error("parse_rational: empty string");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num = parse_bigint(s.substr(0, slash));
    BigInt den = parse_bigint(s.substr(slash + 1));
    if (den == 0) throw usage_error("parse_rational: zero denominator in '" + s + "'");
    return Rational(num, den);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(parse_bigint(s));
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  BigInt num = parse_bigint(digits);
  BigInt den = ipow(BigInt(10), unsigned(s.size() - dot - 1));
  return Rational(num, den);
}

inline std::string to_string(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

}  // namespace mlqmc
