#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "gfpoly.hpp"
#include "rational.hpp"
#include "weights.hpp"

namespace mlqmc {

// ---------------------------------------------------------------------------
// Generating vectors
// ---------------------------------------------------------------------------

// Rank-1 polynomial lattice rule over GF(b): modulus p of degree M
// (irreducible), one generator polynomial of degree < M per coordinate.
// Point h in [0, b^M) has coordinate j equal to the first M expansion digits
// of hbar(x) q_j(x) / p(x), where hbar is the digit polynomial of h.
struct GeneratingVector {
  std::uint32_t b = 2;
  unsigned M = 0;
  GFPoly p;
  std::vector<GFPoly> q;

  std::uint64_t n() const {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < M; ++i) r *= b;
    return r;
  }
  unsigned s() const { return unsigned(q.size()); }

  void validate() const {
    if (!is_small_prime(b)) throw usage_error("generating vector: base must be a small prime");
    if (M == 0 || M > 20) throw usage_error("generating vector: need 1 <= M <= 20");
    if (p.b != b) throw usage_error("generating vector: modulus base mismatch");
    if (p.degree() != int(M)) throw usage_error("generating vector: modulus degree must be M");
    if (!poly_is_irreducible(p)) throw usage_error("generating vector: modulus must be irreducible");
    for (const auto& g : q) {
      if (g.b != b) throw usage_error("generating vector: generator base mismatch");
      if (g.is_zero()) throw usage_error("generating vector: zero generator");
      if (g.degree() >= int(M)) throw usage_error("generating vector: generator degree must be < M");
    }
  }
};

// Smallest (by integer encoding) irreducible polynomial of each degree,
// precomputed for the two bases used throughout and verified by trial
// division in the test suite. Other bases fall back to a search.
inline GFPoly default_modulus(std::uint32_t b, unsigned M) {
  if (!is_small_prime(b)) throw usage_error("default_modulus: base must be a small prime");
  if (M == 0 || M > 20) throw usage_error("default_modulus: need 1 <= M <= 20");
  static const std::uint64_t table2[20] = {2,     7,      11,     19,     37,     67,    131,
                                           283,   515,    1033,   2053,   4105,   8219,  16417,
                                           32771, 65579,  131081, 262153, 524327, 1048585};
  static const std::uint64_t table3[20] = {3,       10,       34,        86,        250,
                                           734,     2198,     6572,      19747,     59068,
                                           177158,  531452,   1594330,   4782974,   14348918,
                                           43046758, 129140170, 387420523, 1162261478, 3486784435};
  if (b == 2) return int_to_poly(table2[M - 1], 2);
  if (b == 3) return int_to_poly(table3[M - 1], 3);
  std::uint64_t bm = 1;
  for (unsigned i = 0; i < M; ++i) bm *= b;
  for (std::uint64_t e = bm; e < bm * b; ++e) {
    GFPoly cand = int_to_poly(e, b);
    if (poly_is_irreducible(cand)) return cand;
  }
  throw resource_error("default_modulus: no irreducible polynomial found");
}

// ---------------------------------------------------------------------------
// Point generation
// ---------------------------------------------------------------------------

// Numerators of one coordinate column: entry h is b^M times the coordinate
// value of point h. Uses linearity of the digit map over GF(b): the column is
// generated from the images of the monomials x^t.
inline std::vector<std::uint64_t> plr_column(std::uint32_t b, unsigned M, const GFPoly& p,
                                             const GFPoly& qj) {
  std::uint64_t n = 1;
  for (unsigned i = 0; i < M; ++i) n *= b;
  std::vector<std::uint64_t> col(n, 0);
  if (b == 2) {
    std::vector<std::uint64_t> basis(M);
    for (unsigned t = 0; t < M; ++t)
      basis[t] = nu_m(poly_mul(poly_xpow(b, t), qj), p, M);
    for (std::uint64_t h = 1; h < n; ++h) {
      std::uint64_t low = h & (~h + 1);
      unsigned t = 0;
      while ((std::uint64_t(1) << t) != low) ++t;
      col[h] = col[h ^ low] ^ basis[t];
    }
    return col;
  }
  // General base: per-monomial digit rows combined with mod-b arithmetic.
  std::vector<std::vector<std::uint8_t>> basis(M);
  for (unsigned t = 0; t < M; ++t)
    basis[t] = laurent_digits(poly_mul(poly_xpow(b, t), qj), p, M);
  std::vector<std::uint8_t> dig(M);
  for (std::uint64_t h = 0; h < n; ++h) {
    std::fill(dig.begin(), dig.end(), 0);
    std::uint64_t hh = h;
    for (unsigned t = 0; hh; ++t, hh /= b) {
      std::uint32_t d = std::uint32_t(hh % b);
      if (!d) continue;
      for (unsigned l = 0; l < M; ++l)
        dig[l] = std::uint8_t((dig[l] + d * basis[t][l]) % b);
    }
    std::uint64_t num = 0;
    for (unsigned l = 0; l < M; ++l) num = num * b + dig[l];
    col[h] = num;
  }
  return col;
}

inline std::vector<std::vector<std::uint64_t>> plr_matrix(const GeneratingVector& g) {
  std::vector<std::vector<std::uint64_t>> cols;
  cols.reserve(g.s());
  for (const auto& qj : g.q) cols.push_back(plr_column(g.b, g.M, g.p, qj));
  return cols;
}

// ---------------------------------------------------------------------------
// The per-point quality function phi
// ---------------------------------------------------------------------------

// phi(x) for x = num / b^M: the closed-form column sum that turns the dual
// count of the scrambled-variance criterion into an O(n) point average.
//   phi(0)   = b^2/(b+1)
//   phi(x>0) = b^2 (1 - b^{-2(a0-1)})/(b+1) - b^{2-2 a0},
// where a0 is the index (1-based) of the first nonzero base-b digit of x.
inline unsigned phi_first_digit_index(std::uint64_t num, unsigned M, std::uint32_t b) {
  unsigned hp = 0;  // floor(log_b num)
  std::uint64_t v = num;
  while (v >= b) {
    v /= b;
    ++hp;
  }
  return M - hp;  // a0
}

inline Rational phi_exact(std::uint64_t num, unsigned M, std::uint32_t b) {
  BigInt bb = b;
  if (num == 0) return Rational(bb * bb, b + 1);
  unsigned a0 = phi_first_digit_index(num, M, b);
  Rational head = Rational(bb * bb, b + 1) * (Rational(1) - Rational(1, ipow(bb, 2 * (a0 - 1))));
  return head - Rational(bb * bb, ipow(bb, 2 * a0));
}

inline double phi_value(std::uint64_t num, unsigned M, std::uint32_t b) {
  double b2 = double(b) * b;
  if (num == 0) return b2 / (b + 1);
  unsigned a0 = phi_first_digit_index(num, M, b);
  double p1 = std::pow(double(b), -2.0 * (a0 - 1));
  double p2 = std::pow(double(b), 2.0 - 2.0 * a0);
  return b2 * (1.0 - p1) / (b + 1) - p2;
}

namespace detail {

template <class Num>
Num phi_as(std::uint64_t num, unsigned M, std::uint32_t b) {
  if constexpr (std::is_same_v<Num, Rational>) return phi_exact(num, M, b);
  else return phi_value(num, M, b);
}

template <class Num>
Num gamma1_as(const WeightModel& w, std::uint64_t j) {
  if constexpr (std::is_same_v<Num, Rational>) return w.gamma1_exact(j);
  else return w.gamma1(j);
}

template <class Num>
Num entry_gamma_as(const WeightEntry& e) {
  if constexpr (std::is_same_v<Num, Rational>) {
    if (!e.exact) throw usage_error("exact quality requested with inexact table weights");
    return e.gamma_exact;
  } else {
    return e.gamma;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quality criterion
// ---------------------------------------------------------------------------

// B(g) = (1/n) sum_points sum_{nonempty w subset of [s], gamma_w > 0}
//        gamma_w prod_{j in w} phi(x_j)/3.
// Equal, by the digit-orthogonality identity, to the dual-space sum
// sum_w gamma_w sum_{l_w strictly positive, in the dual} prod r(l_j) that
// bounds the scrambled-estimator variance; dual_B_oracle below evaluates the
// right-hand side directly.
struct QualityValue {
  double value = 0;
  Rational exact = 0;
  bool is_exact = false;
};

enum class QualityMode { automatic, exact, floating };

namespace detail {

inline bool resolve_exact(QualityMode mode, const WeightModel& w, unsigned M, unsigned s) {
  switch (mode) {
    case QualityMode::exact:
      if (!w.exact_capable())
        throw usage_error("exact quality requested but weights are not exactly representable");
      return true;
    case QualityMode::floating:
      return false;
    case QualityMode::automatic:
    default:
      // Exact arithmetic costs O(b^{2M}) big-rational operations per
      // coordinate with denominators growing in s; keep it for small rules.
      return w.exact_capable() && M <= 8 && s <= 8;
  }
}

template <class Num>
Num quality_B_impl(const GeneratingVector& g, const WeightModel& w) {
  const std::uint64_t n = g.n();
  const unsigned s = g.s();
  auto cols = plr_matrix(g);
  const Num third = Num(1) / 3;
  Num acc = 0;
  if (w.is_product()) {
    for (std::uint64_t h = 0; h < n; ++h) {
      Num prod = 1;
      for (unsigned j = 0; j < s; ++j)
        prod *= Num(1) + detail::gamma1_as<Num>(w, j + 1) *
                             detail::phi_as<Num>(cols[j][h], g.M, g.b) * third;
      acc += prod - Num(1);
    }
  } else {
    for (std::uint64_t h = 0; h < n; ++h) {
      Num point = 0;
      for (const auto& e : w.entries) {
        if (e.gamma <= 0 || e.u.back() > s) continue;
        Num term = detail::entry_gamma_as<Num>(e);
        for (auto j : e.u) term *= detail::phi_as<Num>(cols[j - 1][h], g.M, g.b) * third;
        point += term;
      }
      acc += point;
    }
  }
  return acc / Num(std::int64_t(n));
}

}  // namespace detail

inline QualityValue quality_B(const GeneratingVector& g, const WeightModel& w,
                              QualityMode mode = QualityMode::automatic) {
  g.validate();
  QualityValue out;
  if (detail::resolve_exact(mode, w, g.M, g.s())) {
    out.exact = detail::quality_B_impl<Rational>(g, w);
    out.value = to_double(out.exact);
    out.is_exact = true;
  } else {
    out.value = detail::quality_B_impl<double>(g, w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Component-by-component construction
// ---------------------------------------------------------------------------

struct CbcResult {
  GeneratingVector g;
  std::vector<double> step_values;   // objective of the chosen generator, per coordinate
  std::vector<Rational> step_exact;  // populated in exact mode
  bool exact = false;
};

namespace detail {

// One CBC pass. Starting from the (validated) prefix in g.q, appends
// generators until target_s coordinates, scanning candidates in increasing
// integer encoding and keeping the first strict minimizer.
template <class Num>
CbcResult cbc_impl(GeneratingVector g, unsigned target_s, const WeightModel& w) {
  const std::uint64_t n = g.n();
  const Num third = Num(1) / 3;
  CbcResult res;
  res.exact = std::is_same_v<Num, Rational>;

  // Per-point state: for product weights the running factor
  // prod_{j chosen} (1 + gamma_j phi_j / 3); for tables the phi/3 columns.
  std::vector<Num> running(w.is_product() ? n : 0, Num(1));
  std::vector<std::vector<Num>> phi_cols;  // tables only

  auto column_phis = [&](const GFPoly& qz) {
    auto nums = plr_column(g.b, g.M, g.p, qz);
    std::vector<Num> ph(n);
    for (std::uint64_t h = 0; h < n; ++h) ph[h] = detail::phi_as<Num>(nums[h], g.M, g.b);
    return ph;
  };

  // Objective of candidate column at step z (1-based):
  // (1/n) sum_h A_h * phi_h / 3 with A as below.
  std::vector<Num> A(n, Num(0));
  auto step_objective = [&](const std::vector<Num>& ph) {
    Num acc = 0;
    for (std::uint64_t h = 0; h < n; ++h) acc += A[h] * ph[h];
    return acc * third / Num(std::int64_t(n));
  };

  auto prepare_step = [&](unsigned z) {
    if (w.is_product()) {
      Num gz = detail::gamma1_as<Num>(w, z);
      for (std::uint64_t h = 0; h < n; ++h) A[h] = gz * running[h];
      return;
    }
    // Table: A_h = sum over supported sets with max coordinate z of
    // gamma_u prod_{j in u, j < z} phi_j / 3.
    std::fill(A.begin(), A.end(), Num(0));
    for (const auto& e : w.entries) {
      if (e.gamma <= 0 || e.u.back() != z) continue;
      Num ge = detail::entry_gamma_as<Num>(e);
      for (std::uint64_t h = 0; h < n; ++h) {
        Num t = ge;
        for (auto j : e.u)
          if (j != z) t *= phi_cols[j - 1][h] * third;
        A[h] += t;
      }
    }
  };

  auto absorb_choice = [&](unsigned z, const std::vector<Num>& ph) {
    if (w.is_product()) {
      Num gz = detail::gamma1_as<Num>(w, z);
      for (std::uint64_t h = 0; h < n; ++h) running[h] *= Num(1) + gz * ph[h] * third;
    } else {
      phi_cols.push_back(ph);
    }
  };

  auto record = [&](const Num& val) {
    if constexpr (std::is_same_v<Num, Rational>) {
      res.step_exact.push_back(val);
      res.step_values.push_back(to_double(val));
    } else {
      res.step_values.push_back(val);
    }
  };

  // Rebuild state for any pre-existing prefix, recording its step values.
  for (unsigned z = 1; z <= g.s(); ++z) {
    prepare_step(z);
    auto ph = column_phis(g.q[z - 1]);
    record(step_objective(ph));
    absorb_choice(z, ph);
  }

  while (g.s() < target_s) {
    unsigned z = g.s() + 1;
    if (z == 1) {
      // Any nonzero generator gives the same first column up to relabeling
      // of the points; fix q_1 = 1.
      GFPoly one = poly_one(g.b);
      prepare_step(1);
      auto ph = column_phis(one);
      record(step_objective(ph));
      absorb_choice(1, ph);
      g.q.push_back(one);
      continue;
    }
    prepare_step(z);
    bool have = false;
    Num best_val = 0;
    std::vector<Num> best_ph;
    GFPoly best_q;
    for (std::uint64_t e = 1; e < n; ++e) {
      GFPoly cand = int_to_poly(e, g.b);
      auto ph = column_phis(cand);
      Num val = step_objective(ph);
      if (!have || val < best_val) {
        have = true;
        best_val = val;
        best_ph = std::move(ph);
        best_q = std::move(cand);
      }
    }
    record(best_val);
    absorb_choice(z, best_ph);
    g.q.push_back(best_q);
  }
  res.g = std::move(g);
  return res;
}

}  // namespace detail

// CBC from scratch: q_1 = 1, then a full candidate scan per coordinate.
inline CbcResult cbc_construct(std::uint32_t b, unsigned M, const GFPoly& p, unsigned s,
                               const WeightModel& w, QualityMode mode = QualityMode::automatic) {
  GeneratingVector g;
  g.b = b;
  g.M = M;
  g.p = p;
  g.validate();
  if (s == 0) throw usage_error("cbc: need at least one coordinate");
  if (detail::resolve_exact(mode, w, M, s)) return detail::cbc_impl<Rational>(std::move(g), s, w);
  return detail::cbc_impl<double>(std::move(g), s, w);
}

// CBC extension: keeps the existing coordinates of g and appends new ones
// until target_s. Recomputes (and re-reports) the prefix step values.
inline CbcResult cbc_extend(const GeneratingVector& g, unsigned target_s, const WeightModel& w,
                            QualityMode mode = QualityMode::automatic) {
  g.validate();
  if (target_s < g.s()) throw usage_error("cbc_extend: target dimension below prefix");
  if (detail::resolve_exact(mode, w, g.M, target_s)) return detail::cbc_impl<Rational>(g, target_s, w);
  return detail::cbc_impl<double>(g, target_s, w);
}

// ---------------------------------------------------------------------------
// Averaging bound for the CBC objective
// ---------------------------------------------------------------------------

// C_{b,lambda} = max( sum_{l >= 1} r(l)^lambda , (sum_{l >= 1} r(l))^lambda )
// with r(l) = b^{-3a}/3 for b^a <= l < b^{a+1}; finite exactly for
// lambda in (1/3, 1].
inline double cbc_constant(std::uint32_t b, double lambda) {
  if (!(lambda > 1.0 / 3.0 && lambda <= 1.0))
    throw usage_error("cbc_constant: lambda must lie in (1/3, 1]");
  double t = std::pow(double(b), 3.0 * lambda - 1.0);
  double first = (b - 1) / std::pow(3.0, lambda) * t / (t - 1.0);
  double second = std::pow(double(b) * b / (3.0 * (b + 1)), lambda);
  return std::max(first, second);
}

// lambda = 1: both branches coincide at b^2 / (3(b+1)).
inline Rational cbc_constant_exact(std::uint32_t b) {
  BigInt bb = b;
  return Rational(bb * bb, 3 * (bb + 1));
}

// Upper bound on the step-z CBC objective delivered by averaging over all
// candidates: (b^M - 1)^{-tau} ( sum_{w : z in w, w subset [z]}
// gamma_w^{1/tau} C_{b,1/tau}^{|w|} )^tau, valid for 1 <= tau < 3.
inline double cbc_step_bound(std::uint32_t b, unsigned M, const WeightModel& w, unsigned z,
                             double tau) {
  if (!(tau >= 1.0 && tau < 3.0)) throw usage_error("cbc_step_bound: tau must lie in [1, 3)");
  double C = cbc_constant(b, 1.0 / tau);
  double sum = 0;
  if (w.is_product()) {
    sum = std::pow(w.gamma1(z), 1.0 / tau) * C;
    for (unsigned j = 1; j < z; ++j) sum *= 1.0 + std::pow(w.gamma1(j), 1.0 / tau) * C;
  } else {
    for (const auto& e : w.entries) {
      if (e.gamma <= 0 || e.u.back() != z) continue;
      sum += std::pow(e.gamma, 1.0 / tau) * std::pow(C, double(e.u.size()));
    }
  }
  double nm1 = std::pow(double(b), double(M)) - 1.0;
  return std::pow(nm1, -tau) * std::pow(sum, tau);
}

inline Rational cbc_step_bound_exact(std::uint32_t b, unsigned M, const WeightModel& w,
                                     unsigned z) {
  if (!w.exact_capable()) throw usage_error("cbc_step_bound_exact: weights not exact");
  Rational C = cbc_constant_exact(b);
  Rational sum;
  if (w.is_product()) {
    sum = w.gamma1_exact(z) * C;
    for (unsigned j = 1; j < z; ++j) sum *= Rational(1) + w.gamma1_exact(j) * C;
  } else {
    sum = 0;
    for (const auto& e : w.entries) {
      if (e.gamma <= 0 || e.u.back() != z) continue;
      sum += e.gamma_exact * rpow(C, long(e.u.size()));
    }
  }
  BigInt nm1 = ipow(BigInt(b), M) - 1;
  return sum / nm1;
}

// ---------------------------------------------------------------------------
// Dual-space oracle
// ---------------------------------------------------------------------------

// Membership of the integer vector (k_j) restricted to coordinates js in the
// dual module: sum_j trunc_M(k_j)(x) q_j(x) = 0 mod p(x).
inline bool dual_contains(const GeneratingVector& g, const std::vector<unsigned>& js,
                          const std::vector<std::uint64_t>& ks) {
  if (js.size() != ks.size()) throw usage_error("dual_contains: mismatched lengths");
  const std::uint64_t n = g.n();
  GFPoly acc = poly_zero(g.b);
  for (std::size_t i = 0; i < js.size(); ++i) {
    if (js[i] >= g.s()) throw usage_error("dual_contains: coordinate out of range");
    GFPoly t = poly_mulmod(int_to_poly(ks[i] % n, g.b), g.q[js[i]], g.p);
    acc = poly_mod(poly_add(acc, t), g.p);
  }
  return acc.is_zero();
}

// r(l): the scrambled-variance gain coefficient of the Walsh index l.
inline double dual_r(std::uint64_t l, std::uint32_t b) {
  if (l == 0) return 1.0;
  unsigned a = 0;
  while (l >= b) {
    l /= b;
    ++a;
  }
  return std::pow(double(b), -3.0 * a) / 3.0;
}

// Truncation error of enumerating each dual coordinate only up to b^depth:
// per missing coordinate a tail of b^{2-2 depth} / (3(b+1)), times the full
// single-coordinate sum S = b^2/(3(b+1)) for every other coordinate.
inline double dual_tail_bound(std::uint32_t b, unsigned depth, const WeightModel& w, unsigned s) {
  double S = double(b) * b / (3.0 * (b + 1));
  double tail_one = std::pow(double(b), 2.0 - 2.0 * double(depth)) / (3.0 * (b + 1));
  double total = 0;
  if (w.is_product()) {
    // over all nonempty subsets of [s]: organized by subset size
    // sum_w gamma_w |w| tail S^{|w|-1}; enumerate subsets directly (s small).
    if (s > 20) throw resource_error("dual_tail_bound: too many coordinates");
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << s); ++mask) {
      double gw = 1;
      unsigned sz = 0;
      for (unsigned j = 0; j < s; ++j)
        if (mask >> j & 1) {
          gw *= w.gamma1(j + 1);
          ++sz;
        }
      total += gw * sz * tail_one * std::pow(S, double(sz - 1));
    }
  } else {
    for (const auto& e : w.entries) {
      if (e.gamma <= 0 || e.u.back() > s) continue;
      total += e.gamma * double(e.u.size()) * tail_one * std::pow(S, double(e.u.size()) - 1.0);
    }
  }
  return total;
}

namespace detail {

// Kahan-compensated accumulator: the oracle adds ~b^depth tiny terms and the
// acceptance tolerance sits below the naive float error.
struct Kahan {
  double sum = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

// Direct evaluation of the dual-space criterion
//   sum_{nonempty w in supp, w subset [s]} gamma_w
//     sum_{l in [1, b^depth)^w, l in dual} prod_j r(l_j)
// by brute-force enumeration; the independent oracle for quality_B.
inline double dual_B_oracle(const GeneratingVector& g, const WeightModel& w, unsigned depth) {
  g.validate();
  const std::uint32_t b = g.b;
  const unsigned s = g.s();
  const std::uint64_t n = g.n();
  std::uint64_t limit = 1;
  for (unsigned i = 0; i < depth; ++i) {
    limit *= b;
    if (limit > (std::uint64_t(1) << 40)) throw resource_error("dual_B_oracle: depth too large");
  }

  // Subsets to enumerate, with weights.
  std::vector<std::pair<std::vector<unsigned>, double>> subsets;  // 0-based coords
  if (w.is_product()) {
    if (s > 16) throw resource_error("dual_B_oracle: too many coordinates");
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << s); ++mask) {
      std::vector<unsigned> js;
      double gw = 1;
      for (unsigned j = 0; j < s; ++j)
        if (mask >> j & 1) {
          js.push_back(j);
          gw *= w.gamma1(j + 1);
        }
      subsets.emplace_back(std::move(js), gw);
    }
  } else {
    for (const auto& e : w.entries) {
      if (e.gamma <= 0 || e.u.back() > s) continue;
      std::vector<unsigned> js;
      for (auto j : e.u) js.push_back(j - 1);
      subsets.emplace_back(std::move(js), e.gamma);
    }
  }

  // Cost guard across all subsets.
  double terms = 0;
  for (const auto& [js, gw] : subsets) terms += std::pow(double(limit - 1), double(js.size()));
  if (terms > double(std::uint64_t(1) << 30)) throw resource_error("dual_B_oracle: too many terms");

  // Residue encodings of trunc(l) q_j mod p per coordinate.
  std::vector<std::vector<std::uint64_t>> res(s, std::vector<std::uint64_t>(n));
  for (unsigned j = 0; j < s; ++j)
    for (std::uint64_t l = 0; l < n; ++l)
      res[j][l] = poly_mulmod(int_to_poly(l, b), g.q[j], g.p).encode();

  auto gf_sum_is_zero = [&](const std::vector<std::uint64_t>& encs) {
    if (b == 2) {
      std::uint64_t x = 0;
      for (auto e : encs) x ^= e;
      return x == 0;
    }
    GFPoly acc = poly_zero(b);
    for (auto e : encs) acc = poly_add(acc, int_to_poly(e, b));
    // poly_add reduces coefficients mod b already; zero iff all digits vanish
    return acc.is_zero();
  };

  detail::Kahan total;
  std::vector<std::uint64_t> ls, encs;
  for (const auto& [js, gw] : subsets) {
    const unsigned d = unsigned(js.size());
    ls.assign(d, 1);
    encs.assign(d, 0);
    while (true) {
      double prod = gw;
      for (unsigned i = 0; i < d; ++i) {
        encs[i] = res[js[i]][ls[i] % n];
        prod *= dual_r(ls[i], b);
      }
      if (gf_sum_is_zero(encs)) total.add(prod);
      unsigned i = 0;
      while (i < d && ++ls[i] == limit) {
        ls[i] = 1;
        ++i;
      }
      if (i == d) break;
    }
  }
  return total.sum;
}

// ---------------------------------------------------------------------------
// Vector files
// ---------------------------------------------------------------------------

// Line 1: "b M p-digits" (digit strings are constant term first, so
// "2 3 1101" is base 2, degree 3, p = 1 + x + x^3). One generator digit
// string per following line.
inline void save_vector(std::ostream& out, const GeneratingVector& g) {
  out << g.b << " " << g.M << " " << g.p.digits() << "\n";
  for (const auto& qj : g.q) out << qj.digits() << "\n";
}

inline GeneratingVector load_vector(std::istream& in) {
  GeneratingVector g;
  std::string line;
  if (!std::getline(in, line)) throw usage_error("vector file: missing header");
  std::istringstream head(line);
  std::string pdig;
  if (!(head >> g.b >> g.M >> pdig)) throw usage_error("vector file: header must be 'b M p'");
  g.p = poly_from_digits(pdig, g.b);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string qdig;
    ls >> qdig;
    g.q.push_back(poly_from_digits(qdig, g.b));
  }
  g.validate();
  return g;
}

}  // namespace mlqmc
