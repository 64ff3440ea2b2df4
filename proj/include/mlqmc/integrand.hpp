#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "space.hpp"
#include "weights.hpp"

namespace mlqmc {

// A point of [0,1)^infinity materialized on finitely many coordinates; all
// other coordinates read the anchor. This realizes sampling in the anchored
// subspace without building infinite vectors.
struct PointView {
  const std::uint32_t* coords = nullptr;  // sorted ascending, 1-based
  const double* values = nullptr;
  std::size_t count = 0;
  double anchor = default_anchor;
  bool is_prefix = false;  // populated coordinates are exactly 1..count

  double at(std::uint32_t j) const {
    if (is_prefix) return (j >= 1 && j <= count) ? values[j - 1] : anchor;
    std::size_t lo = 0, hi = count;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (coords[mid] < j) lo = mid + 1;
      else hi = mid;
    }
    return (lo < count && coords[lo] == j) ? values[lo] : anchor;
  }

  bool has(std::uint32_t j) const {
    if (is_prefix) return j >= 1 && j <= count;
    std::size_t lo = 0, hi = count;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (coords[mid] < j) lo = mid + 1;
      else hi = mid;
    }
    return lo < count && coords[lo] == j;
  }

  std::uint32_t coord_at(std::size_t i) const {
    return is_prefix ? std::uint32_t(i + 1) : coords[i];
  }

  std::uint32_t max_coord() const {
    return count == 0 ? 0 : (is_prefix ? std::uint32_t(count) : coords[count - 1]);
  }
};

// Cost-metered integrand with a known exact integral and declared membership
// data: either a finite active coordinate set, or (for product-form
// integrands) a truncation index with its analytic tail bound.
struct Integrand {
  std::string name;
  std::function<double(const PointView&)> fn;
  double exact_integral = std::numeric_limits<double>::quiet_NaN();
  Coords active;                    // empty means "not finitely supported"
  std::uint64_t truncation_index = 0;
  double truncation_tail = 0;
  std::shared_ptr<std::atomic<std::uint64_t>> evals =
      std::make_shared<std::atomic<std::uint64_t>>(0);

  double operator()(const PointView& v) const {
    evals->fetch_add(1, std::memory_order_relaxed);
    return fn(v);
  }

  std::uint64_t eval_count() const { return evals->load(std::memory_order_relaxed); }
};

inline Integrand make_constant(double value) {
  Integrand f;
  f.name = "constant:" + std::to_string(value);
  f.exact_integral = value;
  f.fn = [value](const PointView&) { return value; };
  return f;
}

// Section of the space kernel: f(x) = K_v(x, y) = sum_{u <= v} gamma_u
// k_u(x_u, y_u). Mean-zero component kernels make the exact integral 1 for
// every v and y. y is given coordinate-aligned with v.
inline Integrand make_kernel_section(const WeightModel& w, Coords v, std::vector<double> y,
                                     double anchor = default_anchor) {
  if (!coords_valid(v)) throw usage_error("kernel_section: bad coordinate set");
  if (y.size() != v.size()) throw usage_error("kernel_section: y must align with v");
  Integrand f;
  f.name = "kernel_section";
  f.exact_integral = 1.0;
  f.active = v;
  (void)anchor;
  if (w.is_product()) {
    std::vector<double> gam(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) gam[i] = w.gamma1(v[i]);
    auto vv = std::make_shared<Coords>(std::move(v));
    auto yy = std::make_shared<std::vector<double>>(std::move(y));
    auto gg = std::make_shared<std::vector<double>>(std::move(gam));
    f.fn = [vv, yy, gg](const PointView& p) {
      double prod = 1.0;
      for (std::size_t i = 0; i < vv->size(); ++i)
        prod *= 1.0 + (*gg)[i] * kernel_k(p.at((*vv)[i]), (*yy)[i]);
      return prod;
    };
    return f;
  }
  // Table weights: pre-filter the supported sets inside v; evaluation is
  // 1 + sum over those sets of gamma_u * prod k(x_j, y_j).
  struct Term {
    double gamma;
    std::vector<std::uint32_t> js;
    std::vector<double> ys;
  };
  auto terms = std::make_shared<std::vector<Term>>();
  for (const auto& e : w.entries) {
    if (e.gamma <= 0 || !coords_subset(e.u, v)) continue;
    Term t;
    t.gamma = e.gamma;
    for (auto j : e.u) {
      std::size_t pos = std::size_t(std::lower_bound(v.begin(), v.end(), j) - v.begin());
      t.js.push_back(j);
      t.ys.push_back(y[pos]);
    }
    terms->push_back(std::move(t));
  }
  auto vv = std::make_shared<Coords>(std::move(v));
  f.fn = [terms, vv](const PointView& p) {
    double s = 1.0;
    for (const auto& t : *terms) {
      double prod = t.gamma;
      for (std::size_t i = 0; i < t.js.size(); ++i) prod *= kernel_k(p.at(t.js[i]), t.ys[i]);
      s += prod;
    }
    return s;
  };
  return f;
}

// Pure ANOVA term of the kernel type: f(x) = k_u(x_u, y_u) = prod_{j in u}
// k(x_j, y_j). Exact integral 0 for nonempty u (mean-zero kernel), 1 for
// empty u.
inline Integrand make_anova_pure(Coords u, std::vector<double> y) {
  if (!coords_valid(u)) throw usage_error("anova_pure: bad coordinate set");
  if (y.size() != u.size()) throw usage_error("anova_pure: y must align with u");
  Integrand f;
  f.name = "anova_pure";
  f.exact_integral = u.empty() ? 1.0 : 0.0;
  f.active = u;
  auto uu = std::make_shared<Coords>(std::move(u));
  auto yy = std::make_shared<std::vector<double>>(std::move(y));
  f.fn = [uu, yy](const PointView& p) {
    double prod = 1.0;
    for (std::size_t i = 0; i < uu->size(); ++i) prod *= kernel_k(p.at((*uu)[i]), (*yy)[i]);
    return prod;
  };
  return f;
}

// Genuinely infinite-variate product integrand for product weights:
// f(x) = prod_{j <= J} (1 + gamma_j k(x_j, y0)), truncated at the index J
// where the remaining factors are within the declared tail bound. Every
// factor integrates to 1, so the exact integral is 1 regardless of J.
inline Integrand make_infinite_product(const WeightModel& w, double y0,
                                       double eps = 1e-12, double anchor = default_anchor) {
  if (!w.is_product()) throw usage_error("infinite_product: product weights only");
  const double kabs = 1.0 / 3.0;  // max |k| over the unit square
  const std::uint64_t J = product_truncation_index(w, kabs, eps);
  const double kay = kernel_k(anchor, y0);
  auto gam = std::make_shared<std::vector<double>>(J + 1, 0.0);
  double base = 1.0;
  for (std::uint64_t j = 1; j <= J; ++j) {
    (*gam)[j] = w.gamma1(j);
    double fac = 1.0 + (*gam)[j] * kay;
    if (fac <= 0) throw usage_error("infinite_product: anchored factor not positive");
    base *= fac;
  }
  Integrand f;
  f.name = "infinite_product";
  f.exact_integral = 1.0;
  f.truncation_index = J;
  f.truncation_tail = w.c * kabs * std::pow(double(J), 1.0 - w.q) / (w.q - 1.0);
  f.fn = [gam, base, kay, y0, J](const PointView& p) {
    double prod = base;
    for (std::size_t i = 0; i < p.count; ++i) {
      std::uint32_t j = p.coord_at(i);
      if (j > J) continue;
      double g = (*gam)[j];
      prod *= (1.0 + g * kernel_k(p.values[i], y0)) / (1.0 + g * kay);
    }
    return prod;
  };
  return f;
}

// Anchored projection Psi_v f: evaluates f with every coordinate outside v
// replaced by the anchor. Shares the cost meter with f.
inline Integrand anchor_project(const Integrand& f, Coords v, double anchor = default_anchor) {
  if (!coords_valid(v)) throw usage_error("anchor_project: bad coordinate set");
  Integrand g;
  g.name = f.name + "|project";
  g.active = v;
  g.exact_integral = std::numeric_limits<double>::quiet_NaN();
  g.evals = f.evals;
  auto vv = std::make_shared<Coords>(std::move(v));
  auto inner = std::make_shared<std::function<double(const PointView&)>>(f.fn);
  g.fn = [vv, inner, anchor](const PointView& p) {
    std::vector<std::uint32_t> cs;
    std::vector<double> xs;
    cs.reserve(vv->size());
    xs.reserve(vv->size());
    for (std::size_t i = 0; i < p.count; ++i) {
      std::uint32_t j = p.coord_at(i);
      if (coords_contains(*vv, j)) {
        cs.push_back(j);
        xs.push_back(p.values[i]);
      }
    }
    PointView q;
    q.coords = cs.data();
    q.values = xs.data();
    q.count = cs.size();
    q.anchor = anchor;
    return (*inner)(q);
  };
  return g;
}

}  // namespace mlqmc
