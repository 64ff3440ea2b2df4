#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mlqmc {

inline bool is_small_prime(std::uint32_t b) {
  if (b < 2) return false;
  for (std::uint32_t d = 2; d * d <= b; ++d)
    if (b % d == 0) return false;
  return true;
}

// a^-1 mod b, b prime (Fermat).
inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t b) {
  a %= b;
  if (a == 0) throw usage_error("inv_mod: zero has no inverse");
  std::uint64_t r = 1, x = a;
  std::uint32_t e = b - 2;
  while (e) {
    if (e & 1u) r = r * x % b;
    x = x * x % b;
    e >>= 1u;
  }
  return std::uint32_t(r);
}

// Dense polynomial over Z_b, b prime. Coefficients are stored constant term
// first and kept canonical: no trailing zeros, so the zero polynomial has an
// empty coefficient vector and degree -1.
struct GFPoly {
  std::uint32_t b = 2;
  std::vector<std::uint8_t> c;

  int degree() const { return int(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }
  std::uint8_t coeff(std::size_t i) const { return i < c.size() ? c[i] : 0; }

  void trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }

  // Integer encoding sum_i c[i] b^i; also the tie-break order used by CBC.
  std::uint64_t encode() const {
    std::uint64_t v = 0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * b + c[i];
    return v;
  }

  // Digit string, constant term first ("1101" = 1 + x + x^3 at b = 2).
  std::string digits() const {
    if (c.empty()) return "0";
    std::string s;
    for (auto d : c) s += char('0' + d);
    return s;
  }

  bool operator==(const GFPoly&) const = default;
};

inline GFPoly poly_zero(std::uint32_t b) { return GFPoly{b, {}}; }

inline GFPoly poly_one(std::uint32_t b) { return GFPoly{b, {1}}; }

// x^k
inline GFPoly poly_xpow(std::uint32_t b, unsigned k) {
  GFPoly r{b, std::vector<std::uint8_t>(k + 1, 0)};
  r.c[k] = 1;
  return r;
}

// Digit expansion of e in base b, least significant first; the inverse of
// GFPoly::encode. Bijection between [0, b^M) and polynomials of degree < M.
inline GFPoly int_to_poly(std::uint64_t e, std::uint32_t b) {
  if (!is_small_prime(b)) throw usage_error("int_to_poly: base must be prime");
  GFPoly r{b, {}};
  while (e) {
    r.c.push_back(std::uint8_t(e % b));
    e /= b;
  }
  return r;
}

inline GFPoly poly_from_digits(const std::string& s, std::uint32_t b) {
  if (!is_small_prime(b)) throw usage_error("poly_from_digits: base must be prime");
  GFPoly r{b, {}};
  r.c.reserve(s.size());
  for (char ch : s) {
    if (ch < '0' || ch >= char('0' + int(b)))
      throw usage_error("poly_from_digits: digit out of range for base");
    r.c.push_back(std::uint8_t(ch - '0'));
  }
  r.trim();
  return r;
}

inline GFPoly poly_add(const GFPoly& a, const GFPoly& d) {
  if (a.b != d.b) throw usage_error("poly_add: mixed bases");
  GFPoly r{a.b, {}};
  r.c.resize(std::max(a.c.size(), d.c.size()), 0);
  for (std::size_t i = 0; i < r.c.size(); ++i)
    r.c[i] = std::uint8_t((a.coeff(i) + d.coeff(i)) % a.b);
  r.trim();
  return r;
}

inline GFPoly poly_neg(const GFPoly& a) {
  GFPoly r = a;
  for (auto& d : r.c) d = std::uint8_t((a.b - d) % a.b);
  return r;
}

inline GFPoly poly_sub(const GFPoly& a, const GFPoly& d) { return poly_add(a, poly_neg(d)); }

inline GFPoly poly_mul(const GFPoly& a, const GFPoly& d) {
  if (a.b != d.b) throw usage_error("poly_mul: mixed bases");
  if (a.is_zero() || d.is_zero()) return poly_zero(a.b);
  GFPoly r{a.b, std::vector<std::uint8_t>(a.c.size() + d.c.size() - 1, 0)};
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (!a.c[i]) continue;
    for (std::size_t j = 0; j < d.c.size(); ++j)
      r.c[i + j] = std::uint8_t((r.c[i + j] + a.c[i] * d.c[j]) % a.b);
  }
  r.trim();
  return r;
}

// Remainder of a modulo m (schoolbook long division).
inline GFPoly poly_mod(GFPoly a, const GFPoly& m) {
  if (a.b != m.b) throw usage_error("poly_mod: mixed bases");
  if (m.is_zero()) throw usage_error("poly_mod: zero modulus");
  const std::uint32_t b = a.b;
  const std::uint32_t lead_inv = inv_mod(m.c.back(), b);
  while (a.degree() >= m.degree()) {
    std::size_t shift = std::size_t(a.degree() - m.degree());
    std::uint32_t q = a.c.back() * lead_inv % b;
    for (std::size_t i = 0; i < m.c.size(); ++i) {
      std::uint32_t v = a.c[i + shift] + b * m.c[i] - q * m.c[i] % b;
      a.c[i + shift] = std::uint8_t(v % b);
    }
    a.trim();
  }
  return a;
}

inline GFPoly poly_mulmod(const GFPoly& a, const GFPoly& d, const GFPoly& m) {
  return poly_mod(poly_mul(a, d), m);
}

// Trial division by every monic polynomial of degree 1..deg/2.
inline bool poly_is_irreducible(const GFPoly& m) {
  const int deg = m.degree();
  if (deg <= 0) return false;
  if (deg == 1) return true;
  const std::uint32_t b = m.b;
  for (int dd = 1; dd <= deg / 2; ++dd) {
    std::uint64_t lead = 1;
    for (int i = 0; i < dd; ++i) lead *= b;
    for (std::uint64_t lo = 0; lo < lead; ++lo) {
      GFPoly div = int_to_poly(lo + lead, b);  // monic of degree dd
      if (poly_mod(m, div).is_zero()) return false;
    }
  }
  return true;
}

// Truncated Laurent expansion of num/den: writes the digits t_1..t_M of
// frac(num/den) = sum_{l>=1} t_l x^-l. Polynomial parts (terms x^-l with
// l <= 0) never contribute, so num is first reduced modulo den; after that
// one synthetic-division step emits one digit per iteration.
inline std::vector<std::uint8_t> laurent_digits(const GFPoly& num, const GFPoly& den, unsigned M) {
  if (den.is_zero()) throw usage_error("laurent_digits: zero denominator");
  if (num.b != den.b) throw usage_error("laurent_digits: mixed bases");
  const std::uint32_t b = den.b;
  const int D = den.degree();
  const std::uint32_t lead_inv = inv_mod(den.c.back(), b);
  GFPoly a = poly_mod(num, den);  // deg a < D
  std::vector<std::uint8_t> out(M, 0);
  for (unsigned l = 0; l < M; ++l) {
    if (a.is_zero()) break;  // all remaining digits zero
    a.c.insert(a.c.begin(), 0);  // multiply by x
    std::uint32_t t = 0;
    if (a.degree() == D) {
      t = a.c.back() * lead_inv % b;
      for (std::size_t i = 0; i < den.c.size(); ++i) {
        std::uint32_t v = a.c[i] + b * den.c[i] - t * den.c[i] % b;
        a.c[i] = std::uint8_t(v % b);
      }
      a.trim();
    }
    out[l] = std::uint8_t(t);
  }
  return out;
}

// nu_M(num/den) as an exact numerator over b^M: value is result * b^-M,
// i.e. result = sum_l t_l b^(M-l).
inline std::uint64_t nu_m(const GFPoly& num, const GFPoly& den, unsigned M) {
  auto d = laurent_digits(num, den, M);
  std::uint64_t v = 0;
  for (unsigned l = 0; l < M; ++l) v = v * den.b + d[l];
  return v;
}

}  // namespace mlqmc
