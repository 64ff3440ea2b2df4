#pragma once
// Brute-force ANOVA decomposition for small dimension d on a midpoint grid,
// pointwise ANOVA-term evaluation by quadrature, the f+/f- subset aggregates,
// and an empirical variance-identity test for randomized quadrature rules
// whose randomization factorizes per coordinate.

#include <mlqmc/errors.hpp>
#include <mlqmc/rng.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace mlqmc {

// A d-variate function sampled at points given as a contiguous double[d].
using GridFn = std::function<double(const double*)>;

namespace detail {

inline std::uint64_t grid_cells(unsigned d, std::uint32_t R) {
  std::uint64_t c = 1;
  for (unsigned j = 0; j < d; ++j) c *= R;
  return c;
}

inline void check_grid(unsigned d, std::uint32_t R) {
  if (d < 1 || d > 4) throw usage_error("grid dimension must be in 1..4");
  if (R < 1 || R > 256) throw usage_error("grid resolution must be in 1..256");
  if (grid_cells(d, R) > (std::uint64_t(1) << 24))
    throw resource_error("midpoint grid exceeds 2^24 cells");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid decomposition
// ---------------------------------------------------------------------------
//
// Terms are indexed by coordinate masks (bit j <-> coordinate j+1). The term
// for `mask` is tabulated on the R^{popcount(mask)} midpoint sub-grid over the
// coordinates in `mask` in increasing order, lowest coordinate fastest.
// With respect to the uniform measure on midpoints the recursion below is the
// exact discrete ANOVA decomposition, so the mean-zero and variance-additivity
// identities hold to rounding error, while each term approximates its
// continuum counterpart with the midpoint-rule quadrature error.
struct AnovaDecomposition {
  unsigned d = 0;
  std::uint32_t R = 0;
  std::vector<std::vector<double>> terms;  // size 2^d, indexed by mask
  std::vector<double> variances;           // grid variance of each term
  double variance_f = 0;                   // grid variance of f itself
  double grid_mean = 0;                    // = terms[0][0]

  double node(std::uint32_t i) const { return (i + 0.5) / R; }

  // Flat index into terms[mask] from per-axis indices idx[0..d-1].
  std::uint64_t project(std::uint32_t mask, const std::uint32_t* idx) const {
    std::uint64_t flat = 0, stride = 1;
    for (unsigned j = 0; j < d; ++j)
      if (mask >> j & 1u) {
        flat += idx[j] * stride;
        stride *= R;
      }
    return flat;
  }

  double term_at(std::uint32_t mask, const std::uint32_t* idx) const {
    return terms[mask][project(mask, idx)];
  }

  double sum_at(const std::uint32_t* idx) const {
    double s = 0;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) s += term_at(mask, idx);
    return s;
  }
};

inline AnovaDecomposition decompose(const GridFn& f, unsigned d, std::uint32_t R) {
  detail::check_grid(d, R);
  const std::uint64_t cells = detail::grid_cells(d, R);
  const std::uint32_t nmask = 1u << d;

  AnovaDecomposition dec;
  dec.d = d;
  dec.R = R;
  dec.terms.assign(nmask, {});
  for (std::uint32_t mask = 0; mask < nmask; ++mask) {
    std::uint64_t size = 1;
    for (unsigned j = 0; j < d; ++j)
      if (mask >> j & 1u) size *= R;
    dec.terms[mask].assign(size, 0.0);
  }

  // One pass over the full grid: accumulate every marginal sum at once.
  std::uint32_t idx[4] = {0, 0, 0, 0};
  double x[4];
  for (unsigned j = 0; j < d; ++j) x[j] = dec.node(0);
  double sum_f = 0, sum_f2 = 0;
  for (std::uint64_t c = 0; c < cells; ++c) {
    const double v = f(x);
    sum_f += v;
    sum_f2 += v * v;
    for (std::uint32_t mask = 0; mask < nmask; ++mask)
      dec.terms[mask][dec.project(mask, idx)] += v;
    for (unsigned j = 0; j < d; ++j) {
      if (++idx[j] < R) {
        x[j] = dec.node(idx[j]);
        break;
      }
      idx[j] = 0;
      x[j] = dec.node(0);
    }
  }
  dec.grid_mean = sum_f / double(cells);
  dec.variance_f = sum_f2 / double(cells) - dec.grid_mean * dec.grid_mean;

  // Normalize marginal sums to means, then Mobius-subtract proper-subset
  // terms in place (ascending masks: every proper submask is numerically
  // smaller, hence already final).
  for (std::uint32_t mask = 0; mask < nmask; ++mask) {
    auto& t = dec.terms[mask];
    const double norm = double(cells) / double(t.size());
    for (auto& v : t) v /= norm;
    if (mask == 0) continue;
    std::uint32_t sidx[4];
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      std::size_t rem = flat;
      for (unsigned j = 0; j < d; ++j)
        if (mask >> j & 1u) {
          sidx[j] = std::uint32_t(rem % R);
          rem /= R;
        } else {
          sidx[j] = 0;
        }
      double sub = 0;
      for (std::uint32_t s = (mask - 1) & mask;; s = (s - 1) & mask) {
        sub += dec.term_at(s, sidx);
        if (s == 0) break;
      }
      t[flat] -= sub;
    }
  }

  dec.variances.assign(nmask, 0.0);
  for (std::uint32_t mask = 1; mask < nmask; ++mask) {
    double s2 = 0;
    for (double v : dec.terms[mask]) s2 += v * v;
    dec.variances[mask] = s2 / double(dec.terms[mask].size());
  }
  return dec;
}

// ---------------------------------------------------------------------------
// Variance identity
// ---------------------------------------------------------------------------

struct VarianceIdentityReport {
  double variance_f = 0;     // grid variance of f
  double sum_terms = 0;      // sum of per-term grid variances
  double relative_gap = 0;   // |variance_f - sum| / max(variance_f, tiny)
};

inline VarianceIdentityReport variance_identity_check(const AnovaDecomposition& dec) {
  VarianceIdentityReport rep;
  rep.variance_f = dec.variance_f;
  for (double v : dec.variances) rep.sum_terms += v;
  const double scale = std::max(std::abs(rep.variance_f), 1e-300);
  rep.relative_gap = std::abs(rep.variance_f - rep.sum_terms) / scale;
  return rep;
}

// ---------------------------------------------------------------------------
// Pointwise ANOVA-term evaluation at arbitrary (off-grid) points
// ---------------------------------------------------------------------------
//
// The term for `mask` at x depends only on x_mask; it is computed by the same
// recursion as the grid decomposition, integrating the complementary
// coordinates with the midpoint rule at resolution R. Summing all terms at a
// point telescopes back to f(x) exactly.
class PointwiseAnova {
 public:
  PointwiseAnova(GridFn f, unsigned d, std::uint32_t R)
      : f_(std::move(f)), d_(d), R_(R) {
    detail::check_grid(d, R);
    mean_ = marginal(0, nullptr);
  }

  unsigned dimension() const { return d_; }
  double mean() const { return mean_; }

  // All 2^d ANOVA terms of f at x; out has 2^d entries indexed by mask.
  void eval_all(const double* x, double* out) const {
    const std::uint32_t nmask = 1u << d_;
    out[0] = mean_;
    for (std::uint32_t mask = 1; mask < nmask; ++mask) {
      double m = marginal(mask, x);
      for (std::uint32_t s = (mask - 1) & mask;; s = (s - 1) & mask) {
        m -= out[s];
        if (s == 0) break;
      }
      out[mask] = m;
    }
  }

  double eval(std::uint32_t mask, const double* x) const {
    if (mask == 0) return mean_;
    double m = marginal(mask, x);
    for (std::uint32_t s = (mask - 1) & mask;; s = (s - 1) & mask) {
      m -= eval(s, x);
      if (s == 0) break;
    }
    return m;
  }

 private:
  // Mean of f over the complement midpoint grid with x fixed on `mask`.
  double marginal(std::uint32_t mask, const double* x) const {
    double pt[4];
    std::uint32_t free_axis[4];
    unsigned nfree = 0;
    for (unsigned j = 0; j < d_; ++j) {
      if (mask >> j & 1u)
        pt[j] = x[j];
      else
        free_axis[nfree++] = j;
    }
    std::uint64_t cells = 1;
    for (unsigned t = 0; t < nfree; ++t) cells *= R_;
    std::uint32_t idx[4] = {0, 0, 0, 0};
    for (unsigned t = 0; t < nfree; ++t) pt[free_axis[t]] = (0 + 0.5) / R_;
    double sum = 0;
    for (std::uint64_t c = 0; c < cells; ++c) {
      sum += f_(pt);
      for (unsigned t = 0; t < nfree; ++t) {
        if (++idx[t] < R_) {
          pt[free_axis[t]] = (idx[t] + 0.5) / R_;
          break;
        }
        idx[t] = 0;
        pt[free_axis[t]] = 0.5 / R_;
      }
    }
    return sum / double(cells);
  }

  GridFn f_;
  unsigned d_;
  std::uint32_t R_;
  double mean_ = 0;
};

// ---------------------------------------------------------------------------
// f+ / f- subset aggregates
// ---------------------------------------------------------------------------
//
// For masks u <= v <= w inside [d]:
//   plus  = sum over u' in complement(v) of the term for (u | u'),
//   minus = the same sum restricted to u' intersecting w.
// Both are tabulated on the full R^d grid.
struct PlusMinus {
  std::vector<double> plus;
  std::vector<double> minus;
};

inline PlusMinus f_plus_minus(const AnovaDecomposition& dec, std::uint32_t u,
                              std::uint32_t v, std::uint32_t w) {
  const std::uint32_t full = (1u << dec.d) - 1;
  if ((u & ~v) || (v & ~w) || (w & ~full))
    throw usage_error("f_plus_minus requires u <= v <= w inside the grid dimension");
  const std::uint64_t cells = detail::grid_cells(dec.d, dec.R);
  PlusMinus pm;
  pm.plus.assign(cells, 0.0);
  pm.minus.assign(cells, 0.0);
  const std::uint32_t comp = full & ~v;
  std::uint32_t idx[4] = {0, 0, 0, 0};
  for (std::uint64_t c = 0; c < cells; ++c) {
    double p = 0, m = 0;
    for (std::uint32_t up = comp;; up = (up - 1) & comp) {
      const double t = dec.term_at(u | up, idx);
      p += t;
      if (up & w) m += t;
      if (up == 0) break;
    }
    pm.plus[c] = p;
    pm.minus[c] = m;
    for (unsigned j = 0; j < dec.d; ++j) {
      if (++idx[j] < dec.R) break;
      idx[j] = 0;
    }
  }
  return pm;
}

// ---------------------------------------------------------------------------
// Randomized rules with per-coordinate randomization
// ---------------------------------------------------------------------------
//
// A randomized equal- or general-weight quadrature rule whose randomization is
// driven by one key per coordinate. The variance identity
//   Var(Q(f)) = sum over u of Var(Q(f_u))
// holds when column j of the generated points depends on keys[j] only and is
// marginally uniform; the key-isolation check verifies the former structurally.
struct RandomizedRule {
  unsigned d = 0;
  std::uint64_t n = 0;
  std::vector<double> weights;  // size n, must sum to 1
  // keys.size() == d; returns row-major n*d points in [0,1).
  std::function<std::vector<double>(const std::vector<std::uint64_t>&)> points;
};

inline void check_key_isolation(const RandomizedRule& rule, std::uint64_t probe_key) {
  if (rule.d == 0 || rule.n == 0 || !rule.points)
    throw usage_error("randomized rule is not populated");
  if (rule.weights.size() != rule.n)
    throw usage_error("rule weight count does not match point count");
  double wsum = 0;
  for (double w : rule.weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-12) throw usage_error("rule weights must sum to 1");
  std::vector<std::uint64_t> keys(rule.d);
  for (unsigned j = 0; j < rule.d; ++j) keys[j] = key_child(probe_key, j + 1);
  const std::vector<double> base = rule.points(keys);
  if (base.size() != rule.n * rule.d)
    throw usage_error("rule returned wrong point-matrix size");
  for (unsigned j = 0; j < rule.d; ++j) {
    auto flipped = keys;
    flipped[j] = key_child(probe_key, 1000 + j);
    const std::vector<double> alt = rule.points(flipped);
    for (std::uint64_t i = 0; i < rule.n; ++i)
      for (unsigned c = 0; c < rule.d; ++c)
        if (c != j && alt[i * rule.d + c] != base[i * rule.d + c])
          throw usage_error("rule randomization is not isolated per coordinate");
  }
}

struct InvarianceReport {
  double var_f = 0;            // estimated Var(Q(f))
  double se_var_f = 0;         // standard error of that estimate
  double sum_terms = 0;        // estimated sum of Var(Q(f_u)) over all u
  double se_sum_terms = 0;     // standard error of the sum estimate
  double z = 0;                // |var_f - sum_terms| / combined SE
  std::vector<double> term_variance;  // per-mask Var(Q(f_u)) estimates
};

// Estimates both sides of the variance identity from disjoint replication
// ranges (so their standard errors combine independently) and reports the
// agreement z-score. Throws usage_error if the rule fails key isolation.
inline InvarianceReport invariance_test(const RandomizedRule& rule, const GridFn& f,
                                        std::uint32_t R, std::uint64_t replications,
                                        std::uint64_t master_seed) {
  if (replications < 2) throw usage_error("invariance test needs at least 2 replications");
  check_key_isolation(rule, key_child(mix64(master_seed), 0x69736fULL));
  const unsigned d = rule.d;
  const std::uint32_t nmask = 1u << d;
  PointwiseAnova pa(f, d, R);
  const std::uint64_t root = mix64(master_seed);

  auto keys_for = [&](std::uint64_t rep) {
    std::vector<std::uint64_t> keys(d);
    const std::uint64_t rep_key = key_child(root, rep + 1);
    for (unsigned j = 0; j < d; ++j) keys[j] = key_child(rep_key, j + 1);
    return keys;
  };

  // Side 1: Var(Q(f)) from replications [0, N).
  const std::uint64_t N = replications;
  std::vector<double> qf(N);
  for (std::uint64_t r = 0; r < N; ++r) {
    const auto pts = rule.points(keys_for(r));
    double q = 0;
    for (std::uint64_t i = 0; i < rule.n; ++i) q += rule.weights[i] * f(&pts[i * d]);
    qf[r] = q;
  }

  // Side 2: Var(Q(f_u)) for every u from replications [N, 2N).
  std::vector<std::vector<double>> qu(nmask, std::vector<double>(N));
  std::vector<double> terms(nmask);
  for (std::uint64_t r = 0; r < N; ++r) {
    const auto pts = rule.points(keys_for(N + r));
    std::vector<double> acc(nmask, 0.0);
    for (std::uint64_t i = 0; i < rule.n; ++i) {
      pa.eval_all(&pts[i * d], terms.data());
      for (std::uint32_t mask = 0; mask < nmask; ++mask)
        acc[mask] += rule.weights[i] * terms[mask];
    }
    for (std::uint32_t mask = 0; mask < nmask; ++mask) qu[mask][r] = acc[mask];
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
  };

  InvarianceReport rep;
  {
    const double mu = mean_of(qf);
    std::vector<double> sq(N);
    for (std::uint64_t r = 0; r < N; ++r) sq[r] = (qf[r] - mu) * (qf[r] - mu);
    const double m = mean_of(sq);
    rep.var_f = m * double(N) / double(N - 1);
    double v2 = 0;
    for (double x : sq) v2 += (x - m) * (x - m);
    rep.se_var_f = std::sqrt(v2 / double(N - 1) / double(N));
  }
  {
    rep.term_variance.assign(nmask, 0.0);
    std::vector<double> mu(nmask);
    for (std::uint32_t mask = 0; mask < nmask; ++mask) mu[mask] = mean_of(qu[mask]);
    // Per-replication total squared deviation; its mean estimates the sum of
    // variances and its spread gives the SE with cross-terms included.
    std::vector<double> tot(N, 0.0);
    for (std::uint32_t mask = 0; mask < nmask; ++mask)
      for (std::uint64_t r = 0; r < N; ++r) {
        const double dlt = qu[mask][r] - mu[mask];
        tot[r] += dlt * dlt;
        rep.term_variance[mask] += dlt * dlt;
      }
    for (std::uint32_t mask = 0; mask < nmask; ++mask)
      rep.term_variance[mask] /= double(N - 1);
    const double m = mean_of(tot);
    rep.sum_terms = m * double(N) / double(N - 1);
    double v2 = 0;
    for (double x : tot) v2 += (x - m) * (x - m);
    rep.se_sum_terms = std::sqrt(v2 / double(N - 1) / double(N));
  }
  const double se = std::sqrt(rep.se_var_f * rep.se_var_f +
                              rep.se_sum_terms * rep.se_sum_terms);
  rep.z = std::abs(rep.var_f - rep.sum_terms) / std::max(se, 1e-300);
  return rep;
}

}  // namespace mlqmc
