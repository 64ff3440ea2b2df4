#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "weights.hpp"

namespace mlqmc {

// Smallest J with c * kaa * J^(1-q) / (q-1) < eps: beyond J the tail of
// sum_j gamma_j * kaa is below eps by the integral comparison bound.
inline std::uint64_t product_truncation_index(const WeightModel& w, double kaa,
                                              double eps = 1e-12) {
  if (!w.is_product()) throw usage_error("product_truncation_index: product weights only");
  double lhs = w.c * kaa / (w.q - 1.0);
  if (lhs <= eps) return 1;
  double J = std::pow(lhs / eps, 1.0 / (w.q - 1.0));
  if (J > 5e7) throw resource_error("product truncation index too large");
  return std::uint64_t(J) + 1;
}

// prod_{j in [1..J] \ v} (1 + gamma_j * kaa) with J from the truncation rule
// (and at least max v).
inline double product_over_complement(const WeightModel& w, const Coords& v, double kaa,
                                      double eps = 1e-12) {
  std::uint64_t J = product_truncation_index(w, kaa, eps);
  if (!v.empty()) J = std::max<std::uint64_t>(J, v.back());
  double prod = 1.0;
  std::size_t vi = 0;
  for (std::uint64_t j = 1; j <= J; ++j) {
    if (vi < v.size() && v[vi] == j) {
      ++vi;
      continue;
    }
    prod *= 1.0 + w.gamma1(j) * kaa;
  }
  return prod;
}

// Squared bias of anchored truncation to the subspace on v:
// sum over nonempty u disjoint from v of gamma_u * k_u(a,a).
inline double bias_squared(const WeightModel& w, const Coords& v, double a = default_anchor) {
  if (!coords_valid(v)) throw usage_error("bias_squared: bad coordinate set");
  const double kaa = kernel_diag(a);
  if (w.is_product()) return product_over_complement(w, v, kaa) - 1.0;
  double s = 0;
  for (const auto& e : w.entries) {
    if (e.gamma <= 0) continue;
    if (coords_disjoint(e.u, v)) s += e.gamma * std::pow(kaa, double(e.u.size()));
  }
  return s;
}

// r^2_{v,u,a} = sum_{u' subset of N \ v} gamma_{u union u'} k_{u'}(a,a), u <= v.
inline double r_squared(const WeightModel& w, const Coords& v, const Coords& u,
                        double a = default_anchor) {
  if (!coords_valid(v) || !coords_valid(u)) throw usage_error("r_squared: bad coordinate set");
  if (!coords_subset(u, v)) throw usage_error("r_squared: u must be a subset of v");
  const double kaa = kernel_diag(a);
  if (w.is_product()) return w.gamma(u) * product_over_complement(w, v, kaa);
  double s = u.empty() ? 1.0 : 0.0;  // u' = empty set term gamma_u, with gamma_emptyset = 1
  for (const auto& e : w.entries) {
    if (e.gamma <= 0) continue;
    if (!coords_subset(u, e.u)) continue;
    Coords diff;
    std::set_difference(e.u.begin(), e.u.end(), u.begin(), u.end(), std::back_inserter(diff));
    if (!coords_disjoint(diff, v)) continue;
    s += e.gamma * std::pow(kaa, double(diff.size()));
  }
  return s;
}

// rtilde^2_{w,v,u,a}: like r^2_{v,u,a} but keeping only u' that meet wset.
// Arguments: vset strictly inside wset, u inside vset.
inline double rtilde_squared(const WeightModel& wm, const Coords& wset, const Coords& vset,
                             const Coords& u, double a = default_anchor) {
  if (!coords_subset(vset, wset) || wset == vset)
    throw usage_error("rtilde_squared: need v strictly inside w");
  if (!coords_subset(u, vset)) throw usage_error("rtilde_squared: u must be a subset of v");
  const double kaa = kernel_diag(a);
  if (wm.is_product())
    return wm.gamma(u) *
           (product_over_complement(wm, vset, kaa) - product_over_complement(wm, wset, kaa));
  double s = 0;
  for (const auto& e : wm.entries) {
    if (e.gamma <= 0) continue;
    if (!coords_subset(u, e.u)) continue;
    Coords diff;
    std::set_difference(e.u.begin(), e.u.end(), u.begin(), u.end(), std::back_inserter(diff));
    if (!coords_disjoint(diff, vset)) continue;
    if (coords_disjoint(diff, wset)) continue;
    s += e.gamma * std::pow(kaa, double(diff.size()));
  }
  return s;
}

// Operator norm ||Psi_{v,a}|| = max_{u <= v, gamma_u > 0} gamma_u^{-1/2} r_{v,u,a}.
inline double projection_norm(const WeightModel& w, const Coords& v, double a = default_anchor) {
  const double kaa = kernel_diag(a);
  if (w.is_product()) return std::sqrt(product_over_complement(w, v, kaa));
  double best = r_squared(w, v, {}, a);  // u = empty set, gamma = 1
  for (const auto& e : w.entries) {
    if (e.gamma <= 0 || !coords_subset(e.u, v)) continue;
    best = std::max(best, r_squared(w, v, e.u, a) / e.gamma);
  }
  return std::sqrt(best);
}

// gamma_hat_u = gamma_u * k_u(a,a).
inline double gamma_hat(const WeightModel& w, const Coords& u, double a = default_anchor) {
  return w.gamma(u) * std::pow(kernel_diag(a), double(u.size()));
}

// Supported table entries ordered by decreasing gamma_hat (ties broken by
// lexicographically smaller set): the canonical enumeration u_1, u_2, ...
inline std::vector<std::size_t> entry_order_by_gamma_hat(const WeightModel& w,
                                                         double a = default_anchor) {
  if (w.is_product()) throw usage_error("entry_order_by_gamma_hat: table weights only");
  const double kaa = kernel_diag(a);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < w.entries.size(); ++i)
    if (w.entries[i].gamma > 0) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    double gi = w.entries[i].gamma * std::pow(kaa, double(w.entries[i].u.size()));
    double gj = w.entries[j].gamma * std::pow(kaa, double(w.entries[j].u.size()));
    if (gi != gj) return gi > gj;
    return w.entries[i].u < w.entries[j].u;
  });
  return idx;
}

// Numerical estimate of decay_gamma = sup{p : gamma_hat_{u_j} j^p -> 0}:
// least-squares slope of -log gamma_hat vs log rank over the top half of the
// sorted list (the largest `truncation` weights; for product weights sets of
// order <= 3 over the first `truncation` coordinates are enumerated).
inline double decay_estimate(const WeightModel& w, unsigned truncation = 128,
                             double a = default_anchor) {
  if (truncation < 100) throw usage_error("decay_estimate: truncation must be >= 100");
  const double kaa = kernel_diag(a);
  std::vector<double> ghat;
  if (w.is_product()) {
    const std::uint32_t T = truncation;
    std::vector<double> g1(T + 1);
    for (std::uint32_t j = 1; j <= T; ++j) g1[j] = w.gamma1(j);
    for (std::uint32_t j = 1; j <= T; ++j) ghat.push_back(g1[j] * kaa);
    for (std::uint32_t i = 1; i <= T; ++i)
      for (std::uint32_t j = i + 1; j <= T; ++j) ghat.push_back(g1[i] * g1[j] * kaa * kaa);
    for (std::uint32_t i = 1; i <= T; ++i)
      for (std::uint32_t j = i + 1; j <= T; ++j) {
        double gij = g1[i] * g1[j];
        for (std::uint32_t l = j + 1; l <= T; ++l)
          ghat.push_back(gij * g1[l] * kaa * kaa * kaa);
      }
  } else {
    for (const auto& e : w.entries)
      if (e.gamma > 0) ghat.push_back(e.gamma * std::pow(kaa, double(e.u.size())));
  }
  std::erase_if(ghat, [](double g) { return !(g > 0); });
  if (ghat.size() < 10) throw usage_error("decay_estimate: fewer than 10 positive weights");
  std::size_t keep = std::min<std::size_t>(ghat.size(), truncation);
  std::partial_sort(ghat.begin(), ghat.begin() + keep, ghat.end(), std::greater<>());
  ghat.resize(keep);
  std::size_t half = keep / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 1; j <= half; ++j) {
    double x = std::log(double(j)), y = -std::log(ghat[j - 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = double(half);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mlqmc
