#pragma once
// Randomized multilevel estimator over nested anchored subspaces, the
// single-subspace estimator, a plain Monte Carlo baseline, level schedules,
// budget-driven sample allocation, and a generating-vector cache.

#include <mlqmc/errors.hpp>
#include <mlqmc/integrand.hpp>
#include <mlqmc/lattice.hpp>
#include <mlqmc/rng.hpp>
#include <mlqmc/scramble.hpp>
#include <mlqmc/space.hpp>
#include <mlqmc/weights.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mlqmc {

// ---------------------------------------------------------------------------
// Level schedules
// ---------------------------------------------------------------------------

enum class SubspaceMode {
  union_sets,  // v_k = union of the first L_k supported sets (largest first)
  prefix,      // v_k = {1, ..., L_k}
};

enum class CostKind { fixed, variable };

// Evaluation cost nu^s for a point populated on a nu-dimensional subspace.
struct CostModel {
  CostKind kind = CostKind::variable;
  double s = 1.0;
  double eval_cost(std::size_t nu) const { return std::pow(double(nu), s); }
};

struct LevelSchedule {
  SubspaceMode mode = SubspaceMode::prefix;
  unsigned L = 1;
  double A = 2.0;
  unsigned m = 1;       // number of levels (may be truncated when sets saturate)
  double s = 1.0;       // cost exponent
  double alpha = 3.0;   // single-coordinate convergence rate parameter
  double delta = 0.1;
  bool product = false; // built from product weights (selects the allocation variant)
  double p = 0;         // prefix-mode decay parameter (decay estimate - delta*s)

  std::vector<std::uint32_t> Lk;                    // L_k = L*ceil(A^k)
  std::vector<std::vector<std::uint32_t>> vk;       // nested coordinate sets, sorted
  std::vector<std::vector<std::size_t>> Vk;         // table modes: entry indices newly covered
  std::vector<double> sigma;                        // per-level variance proxies
  std::vector<std::uint64_t> nk;                    // per-level sample counts (after allocation)
};

namespace detail {

// u subset of v for sorted unique coordinate lists. Table sets are small
// while subspaces grow wide, so binary-searching each element of u beats a
// linear merge; fall back to the merge when u is comparably long.
inline bool subset_of(const std::vector<std::uint32_t>& u,
                      const std::vector<std::uint32_t>& v) {
  if (u.size() >= 8 && u.size() * 4 >= v.size())
    return std::includes(v.begin(), v.end(), u.begin(), u.end());
  for (const std::uint32_t c : u)
    if (!std::binary_search(v.begin(), v.end(), c)) return false;
  return true;
}

}  // namespace detail

inline LevelSchedule build_schedule(const WeightModel& w, SubspaceMode mode, unsigned L,
                                    double A, unsigned m, double s, double alpha = 3.0,
                                    double delta = 0.1) {
  if (L < 1) throw usage_error("schedule: L must be at least 1");
  if (!(A > 1.0)) throw usage_error("schedule: A must exceed 1");
  if (m < 1) throw usage_error("schedule: need at least one level");
  if (!(s > 0)) throw usage_error("schedule: cost exponent must be positive");
  if (!(delta > 0) || !(alpha >= 1)) throw usage_error("schedule: need alpha >= 1, delta > 0");
  if (mode == SubspaceMode::union_sets && w.is_product())
    throw usage_error("schedule: product weights require the prefix mode");

  LevelSchedule sched;
  sched.mode = mode;
  sched.L = L;
  sched.A = A;
  sched.s = s;
  sched.alpha = alpha;
  sched.delta = delta;
  sched.product = w.is_product();

  for (unsigned k = 1; k <= m; ++k) {
    const double lk = double(L) * std::ceil(std::pow(A, double(k)));
    if (lk > 5e7) throw resource_error("schedule: level truncation exceeds resource bound");
    sched.Lk.push_back(std::uint32_t(lk));
  }

  if (mode == SubspaceMode::prefix) {
    sched.p = decay_estimate(w) - delta * s;
    if (!(sched.p > 1))
      throw usage_error("schedule: weights decay too slowly for the prefix schedule");
    for (unsigned k = 0; k < m; ++k) {
      std::vector<std::uint32_t> v(sched.Lk[k]);
      for (std::uint32_t j = 0; j < sched.Lk[k]; ++j) v[j] = j + 1;
      sched.vk.push_back(std::move(v));
      sched.sigma.push_back(k == 0 ? 1.0 : std::pow(double(sched.Lk[k - 1]), 1.0 - sched.p));
    }
    if (!w.is_product()) {
      // Record which table entries become covered at each level.
      std::vector<bool> covered(w.entries.size(), false);
      sched.Vk.assign(m, {});
      for (unsigned k = 0; k < m; ++k)
        for (std::size_t e = 0; e < w.entries.size(); ++e) {
          if (covered[e] || w.entries[e].gamma <= 0) continue;
          if (w.entries[e].u.back() <= sched.Lk[k]) {
            covered[e] = true;
            sched.Vk[k].push_back(e);
          }
        }
    }
    sched.m = m;
    return sched;
  }

  // union_sets: sets sorted by decreasing gamma_hat; v_k covers the first L_k.
  const auto order = entry_order_by_gamma_hat(w);
  if (order.empty()) throw usage_error("schedule: no supported sets");
  std::vector<double> ghat(order.size());
  for (std::size_t r = 0; r < order.size(); ++r)
    ghat[r] = gamma_hat(w, w.entries[order[r]].u);

  sched.Vk.assign(m, {});
  std::vector<std::uint32_t> prev;
  unsigned kept = 0;
  for (unsigned k = 0; k < m; ++k) {
    const std::size_t take = std::min<std::size_t>(sched.Lk[k], order.size());
    std::vector<std::uint32_t> v = prev;
    for (std::size_t r = 0; r < take; ++r)
      for (std::uint32_t c : w.entries[order[r]].u) v.push_back(c);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (k > 0 && v == prev) break;  // sets saturated: drop the useless tail levels
    // sigma_k: gamma_hat tail over sets not covered by v_{k-1}.
    double tail = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const auto& u = w.entries[order[r]].u;
      const bool inside = !prev.empty() && detail::subset_of(u, prev);
      if (!inside) tail += ghat[r];
    }
    sched.sigma.push_back(tail);
    // Entries newly covered by v_k.
    for (std::size_t e = 0; e < w.entries.size(); ++e) {
      if (w.entries[e].gamma <= 0) continue;
      const auto& u = w.entries[e].u;
      bool now = detail::subset_of(u, v);
      bool before = !prev.empty() && detail::subset_of(u, prev);
      if (now && !before) sched.Vk[kept].push_back(e);
    }
    prev = v;
    sched.vk.push_back(std::move(v));
    ++kept;
  }
  sched.m = kept;
  sched.Lk.resize(kept);
  sched.Vk.resize(kept);
  return sched;
}

// ---------------------------------------------------------------------------
// Sample allocation
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t pow_floor(std::uint64_t x, std::uint32_t b) {
  std::uint64_t p = 1;
  while (p <= x / b) p *= b;
  return p;
}

}  // namespace detail

// Lagrange-optimal per-level sample counts for budget S, rounded down to
// powers of b, clamped to at least b, and made nonincreasing.
inline std::vector<std::uint64_t> allocate_samples(const LevelSchedule& sched, double S,
                                                   std::uint32_t b = 2,
                                                   double tau = std::numeric_limits<double>::quiet_NaN()) {
  const unsigned m = sched.m;
  double floor_cost = 0;
  for (unsigned k = 0; k < m; ++k) floor_cost += std::pow(double(sched.Lk[k]), sched.s);
  if (!(S > floor_cost)) throw usage_error("allocation: budget below the level cost floor");

  std::vector<double> xs(m);
  if (sched.product) {
    // Product-weight variant: x_k = C * L_k^{(1-p-s)/(tau+1)}.
    const double p = sched.p;
    if (std::isnan(tau)) tau = std::min(sched.alpha, p + sched.delta * sched.s) - sched.delta;
    if (!(tau > 0)) throw usage_error("allocation: tau must be positive");
    double denom = 0;
    for (unsigned k = 0; k < m; ++k)
      denom += std::pow(double(sched.Lk[k]), (1.0 - p + sched.s * tau) / (tau + 1.0));
    const double C = S / denom;
    for (unsigned k = 0; k < m; ++k)
      xs[k] = C * std::pow(double(sched.Lk[k]), (1.0 - p - sched.s) / (tau + 1.0));
    for (unsigned k = 0; k < m; ++k) xs[k] = std::ceil(xs[k]) + 1;
  } else {
    // General variant: x_k = C * sigma_k^{1/e} * L_k^{-s/e}, e = alpha+1-delta.
    const double e = sched.alpha + 1.0 - sched.delta;
    double denom = 0;
    for (unsigned k = 0; k < m; ++k)
      denom += std::pow(sched.sigma[k], 1.0 / e) *
               std::pow(double(sched.Lk[k]), (sched.alpha - sched.delta) * sched.s / e);
    const double C = S / denom;
    for (unsigned k = 0; k < m; ++k)
      xs[k] = std::ceil(C * std::pow(sched.sigma[k], 1.0 / e) *
                        std::pow(double(sched.Lk[k]), -sched.s / e));
  }

  std::vector<std::uint64_t> nk(m);
  for (unsigned k = 0; k < m; ++k) {
    double x = std::min(xs[k], 9.0e18);
    std::uint64_t n = detail::pow_floor(std::uint64_t(std::max(x, 1.0)), b);
    if (n < b) n = b;
    // The lattice construction supports at most b^20 points.
    std::uint64_t cap = 1;
    for (int i = 0; i < 20; ++i) cap *= b;
    if (n > cap) n = cap;
    nk[k] = n;
  }
  for (unsigned k = 1; k < m; ++k) nk[k] = std::min(nk[k], nk[k - 1]);
  return nk;
}

// ---------------------------------------------------------------------------
// Generating-vector cache
// ---------------------------------------------------------------------------

// CBC vectors keyed by (base, M, column count, weight model). In-memory reuse
// extends cached narrower vectors coordinate-by-coordinate; the optional disk
// directory persists vectors across runs. With construction disabled a miss
// is a usage error.
class VectorCache {
 public:
  VectorCache() = default;
  explicit VectorCache(std::filesystem::path dir, bool allow_construct = true)
      : dir_(std::move(dir)), allow_construct_(allow_construct) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  const GeneratingVector& get(std::uint32_t b, unsigned M, unsigned width,
                              const WeightModel& w) {
    if (width == 0) throw usage_error("vector cache: need at least one column");
    const std::string wfmt = w.format();
    const Key key{b, M, width, wfmt};
    auto it = mem_.find(key);
    if (it != mem_.end()) return it->second;

    if (!dir_.empty()) {
      const auto path = dir_ / file_name(b, M, width, wfmt);
      std::ifstream in(path);
      if (in) {
        GeneratingVector g = load_vector(in);
        if (g.b != b || g.M != M || g.s() != width)
          throw usage_error("vector cache: file does not match its name");
        return mem_.emplace(key, std::move(g)).first->second;
      }
    }

    if (!allow_construct_)
      throw usage_error("vector cache: miss with construction disabled");

    // Prefer extending the widest cached prefix with the same base, M, weights.
    const Key* best = nullptr;
    for (const auto& [k, g] : mem_) {
      if (k.b != b || k.M != M || k.wfmt != wfmt || k.width >= width) continue;
      if (!best || k.width > best->width) best = &k;
    }
    GeneratingVector g;
    if (best) {
      g = cbc_extend(mem_.at(*best), width, w).g;
    } else {
      g = cbc_construct(b, M, default_modulus(b, M), width, w).g;
    }
    if (!dir_.empty()) {
      std::ofstream out(dir_ / file_name(b, M, width, wfmt));
      save_vector(out, g);
    }
    return mem_.emplace(key, std::move(g)).first->second;
  }

 private:
  struct Key {
    std::uint32_t b;
    unsigned M;
    unsigned width;
    std::string wfmt;
    bool operator<(const Key& o) const {
      return std::tie(b, M, width, wfmt) < std::tie(o.b, o.M, o.width, o.wfmt);
    }
  };

  static std::string file_name(std::uint32_t b, unsigned M, unsigned width,
                               const std::string& wfmt) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the weight spec
    for (unsigned char c : wfmt) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return "vec_b" + std::to_string(b) + "_M" + std::to_string(M) + "_s" +
           std::to_string(width) + "_" + hex + ".txt";
  }

  std::map<Key, GeneratingVector> mem_;
  std::filesystem::path dir_;
  bool allow_construct_ = true;
};

// ---------------------------------------------------------------------------
// Level point rules: mapping lattice columns onto subspace coordinates
// ---------------------------------------------------------------------------

// How the coordinates of an anchored subspace draw their values from the
// columns of one (scrambled) lattice point set:
//  - product weights: coordinate j reads column j, so the populated set must
//    be the prefix {1..L} for the column weights to line up;
//  - finite-order tables: coordinate rank r in the sorted set reads column r,
//    with the table weights remapped onto ranks;
//  - finite-intersection tables: coordinates read the column of their color
//    in the reuse map, so sets that never co-occur share columns and the
//    lattice dimension stays bounded by the color count.
struct LevelRule {
  std::vector<std::uint32_t> coords;  // sorted ascending, 1-based
  std::vector<unsigned> col_of;       // per coordinate: lattice column index
  unsigned width = 0;                 // number of lattice columns needed
  WeightModel cbc_weights;            // weights the CBC construction uses
};

inline LevelRule make_level_rule(const WeightModel& w, std::vector<std::uint32_t> coords) {
  if (coords.empty()) throw usage_error("level rule: empty coordinate set");
  if (!std::is_sorted(coords.begin(), coords.end()) ||
      std::adjacent_find(coords.begin(), coords.end()) != coords.end())
    throw usage_error("level rule: coordinates must be sorted and distinct");

  LevelRule rule;
  rule.coords = std::move(coords);

  if (w.is_product()) {
    for (std::size_t t = 0; t < rule.coords.size(); ++t)
      if (rule.coords[t] != t + 1)
        throw usage_error("level rule: product weights require prefix sets {1..L}");
    rule.width = unsigned(rule.coords.size());
    rule.col_of.resize(rule.coords.size());
    for (unsigned t = 0; t < rule.width; ++t) rule.col_of[t] = t;
    rule.cbc_weights = w;
    return rule;
  }

  if (!w.is_fiw()) {
    // Rank mapping: remap each covered set onto coordinate ranks.
    rule.width = unsigned(rule.coords.size());
    rule.col_of.resize(rule.coords.size());
    for (unsigned t = 0; t < rule.width; ++t) rule.col_of[t] = t;
    std::vector<WeightEntry> remapped;
    for (const auto& e : w.entries) {
      if (e.gamma <= 0) continue;
      if (!detail::subset_of(e.u, rule.coords)) continue;
      WeightEntry re = e;
      re.u.clear();
      for (std::uint32_t c : e.u) {
        auto it = std::lower_bound(rule.coords.begin(), rule.coords.end(), c);
        re.u.push_back(std::uint32_t(it - rule.coords.begin()) + 1);
      }
      remapped.push_back(std::move(re));
    }
    rule.cbc_weights = WeightModel::table(remapped, WeightKind::finite_order);
    return rule;
  }

  // Finite-intersection: columns are the colors of the coordinate reuse map.
  const auto phi = fiw_phi_map(w);
  rule.col_of.resize(rule.coords.size());
  unsigned next_free = 0;
  for (std::size_t t = 0; t < rule.coords.size(); ++t) {
    const std::uint32_t c = rule.coords[t];
    if (c < phi.size() && phi[c] != 0) {
      rule.col_of[t] = phi[c] - 1;
      next_free = std::max(next_free, phi[c]);
    } else {
      rule.col_of[t] = ~0u;  // coordinate in no supported set: resolved below
    }
  }
  for (auto& col : rule.col_of)
    if (col == ~0u) col = next_free++;
  rule.width = next_free == 0 ? 1 : next_free;

  // Remap covered sets onto color sets, accumulating weights that collide.
  std::map<Coords, WeightEntry> by_colors;
  for (const auto& e : w.entries) {
    if (e.gamma <= 0) continue;
    if (!detail::subset_of(e.u, rule.coords)) continue;
    Coords cu;
    for (std::uint32_t c : e.u) cu.push_back(phi[c]);
    std::sort(cu.begin(), cu.end());
    auto [it, fresh] = by_colors.try_emplace(cu);
    WeightEntry& re = it->second;
    if (fresh) {
      re.u = cu;
      re.gamma = e.gamma;
      re.gamma_exact = e.gamma_exact;
      re.exact = e.exact;
    } else {
      re.gamma += e.gamma;
      re.gamma_exact += e.gamma_exact;
      re.exact = re.exact && e.exact;
    }
  }
  std::vector<WeightEntry> remapped;
  remapped.reserve(by_colors.size());
  for (auto& [cu, e] : by_colors) remapped.push_back(std::move(e));
  rule.cbc_weights = WeightModel::table(remapped, WeightKind::finite_order);
  return rule;
}

// Scrambled point matrix for one rule: n rows, |coords| columns, row-major.
// n == 1 draws a single fully random point (no lattice structure needed);
// otherwise g must carry exactly rule.width generator columns, b^M = n points.
inline std::vector<double> level_points(const LevelRule& rule, const GeneratingVector* g,
                                        std::uint64_t n, std::uint32_t b,
                                        const ScrambleSpec& spec) {
  const std::size_t dim = rule.coords.size();
  std::vector<double> out(std::size_t(n) * dim);
  std::vector<double> col(n);
  // Coordinates grouped by lattice column (ascending within each column), so
  // wide rules stay linear in dim instead of scanning dim once per column.
  constexpr std::size_t none = std::size_t(-1);
  std::vector<std::size_t> head(rule.width, none), chain(dim, none);
  for (std::size_t t = dim; t-- > 0;) {
    chain[t] = head[rule.col_of[t]];
    head[rule.col_of[t]] = t;
  }
  for (unsigned c = 0; c < rule.width; ++c) {
    if (head[c] == none) continue;
    const std::uint64_t ck = column_key(spec, c);
    if (n == 1) {
      const std::uint64_t zero = 0;
      scramble_column(ck, &zero, col.data(), 1, 0, b, spec.depth, spec.identity);
    } else {
      if (!g || g->s() != rule.width || g->n() != n || g->b != b)
        throw usage_error("level points: generating vector does not match the rule");
      auto nums = plr_column(g->b, g->M, g->p, g->q[c]);
      scramble_column(ck, nums.data(), col.data(), n, g->M, b, spec.depth, spec.identity);
    }
    for (std::size_t t = head[c]; t != none; t = chain[t])
      for (std::uint64_t i = 0; i < n; ++i) out[i * dim + t] = col[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

struct EstimateResult {
  double value = 0;
  double cost = 0;
  std::vector<double> level_value;  // per-level contributions
  std::vector<double> level_cost;   // per-level deterministic costs
};

namespace detail {

inline unsigned exact_log(std::uint64_t n, std::uint32_t b) {
  unsigned M = 0;
  std::uint64_t p = 1;
  while (p < n) {
    p *= b;
    ++M;
    if (M > 20) break;
  }
  if (p != n || M == 0 || M > 20)
    throw usage_error("sample count must be b^M with 1 <= M <= 20");
  return M;
}

// One level's quadrature mean: scrambled points on `coords`, integrand
// restricted to `prev` (nullptr for none) subtracted pointwise.
inline double level_mean(const Integrand& f, const LevelRule& rule,
                         const GeneratingVector* g, std::uint64_t n, std::uint32_t b,
                         const ScrambleSpec& spec,
                         const std::vector<std::uint32_t>* prev, bool prefix_sets) {
  const auto pts = level_points(rule, g, n, b, spec);
  const std::size_t dim = rule.coords.size();

  std::vector<std::size_t> gather;
  std::vector<double> prev_vals;
  if (prev) {
    gather.reserve(prev->size());
    std::size_t t = 0;
    for (std::uint32_t c : *prev) {
      while (t < dim && rule.coords[t] < c) ++t;
      if (t == dim || rule.coords[t] != c)
        throw usage_error("level mean: previous set is not nested in the current one");
      gather.push_back(t);
    }
    prev_vals.resize(prev->size());
  }

  double sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    PointView view;
    view.coords = rule.coords.data();
    view.values = &pts[i * dim];
    view.count = dim;
    view.is_prefix = prefix_sets;
    double v = f(view);
    if (prev) {
      for (std::size_t t = 0; t < gather.size(); ++t)
        prev_vals[t] = pts[i * dim + gather[t]];
      PointView pview;
      pview.coords = prev->data();
      pview.values = prev_vals.data();
      pview.count = prev->size();
      pview.is_prefix = prefix_sets;
      v -= f(pview);
    }
    sum += v;
  }
  return sum / double(n);
}

}  // namespace detail

// Multilevel estimate: level 1 is the plain quadrature on v_1; level k >= 2
// adds the mean of f restricted to v_k minus f restricted to v_{k-1} on
// points scrambled with level-specific keys. Cost charges each evaluation at
// the dimension of the smallest scheduled subspace containing it.
inline EstimateResult ml_estimate(const Integrand& f, const LevelSchedule& sched,
                                  const WeightModel& w, VectorCache& cache,
                                  std::uint64_t master_seed, std::uint64_t replication,
                                  std::uint32_t b = 2, unsigned depth = 32) {
  if (sched.nk.size() != sched.m)
    throw usage_error("multilevel estimate: schedule has no sample allocation");
  EstimateResult res;
  const bool prefix_sets = sched.mode == SubspaceMode::prefix;
  for (unsigned k = 0; k < sched.m; ++k) {
    const std::uint64_t n = sched.nk[k];
    const auto rule = make_level_rule(w, sched.vk[k]);
    const GeneratingVector* g = nullptr;
    if (n > 1) g = &cache.get(b, detail::exact_log(n, b), rule.width, rule.cbc_weights);
    ScrambleSpec spec;
    spec.master_seed = master_seed;
    spec.replication = replication;
    spec.salt = k + 1;
    spec.depth = depth;
    const std::vector<std::uint32_t>* prev = k == 0 ? nullptr : &sched.vk[k - 1];
    const double mean = detail::level_mean(f, rule, g, n, b, spec, prev, prefix_sets);
    double cost = double(n) * std::pow(double(sched.vk[k].size()), sched.s);
    if (k > 0) cost += double(n) * std::pow(double(sched.vk[k - 1].size()), sched.s);
    res.level_value.push_back(mean);
    res.level_cost.push_back(cost);
    res.value += mean;
    res.cost += cost;
  }
  return res;
}

// Fixed-subspace estimate: one scrambled lattice rule on v with n points and
// equal weights; cost n * |v|^s. Uses the same key derivation as multilevel
// level 1, so a one-level schedule reproduces it exactly.
inline EstimateResult single_level_estimate(const Integrand& f,
                                            const std::vector<std::uint32_t>& v,
                                            std::uint64_t n, const WeightModel& w,
                                            VectorCache& cache, std::uint64_t master_seed,
                                            std::uint64_t replication, double s,
                                            std::uint32_t b = 2, unsigned depth = 32) {
  if (n == 0) throw usage_error("single-level estimate: need at least one point");
  const auto rule = make_level_rule(w, v);
  const GeneratingVector* g = nullptr;
  if (n > 1) g = &cache.get(b, detail::exact_log(n, b), rule.width, rule.cbc_weights);
  ScrambleSpec spec;
  spec.master_seed = master_seed;
  spec.replication = replication;
  spec.salt = 1;
  spec.depth = depth;
  bool prefix_sets = true;
  for (std::size_t t = 0; t < v.size(); ++t) prefix_sets = prefix_sets && v[t] == t + 1;
  EstimateResult res;
  res.value = detail::level_mean(f, rule, g, n, b, spec, nullptr, prefix_sets);
  res.cost = double(n) * std::pow(double(v.size()), s);
  res.level_value = {res.value};
  res.level_cost = {res.cost};
  return res;
}

// Plain Monte Carlo baseline: n i.i.d. uniform points on v, anchor elsewhere.
inline EstimateResult mc_estimate(const Integrand& f, const std::vector<std::uint32_t>& v,
                                  std::uint64_t n, std::uint64_t master_seed,
                                  std::uint64_t replication, double s) {
  if (v.empty() || n == 0) throw usage_error("baseline: need coordinates and points");
  if (!std::is_sorted(v.begin(), v.end()) ||
      std::adjacent_find(v.begin(), v.end()) != v.end())
    throw usage_error("baseline: coordinates must be sorted and distinct");
  const std::uint64_t key =
      key_child(key_child(mix64(master_seed), replication), 0x6d63ULL);
  const std::size_t dim = v.size();
  std::vector<double> vals(dim);
  bool prefix_sets = true;
  for (std::size_t t = 0; t < dim; ++t) prefix_sets = prefix_sets && v[t] == t + 1;
  double sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < dim; ++t)
      vals[t] = double(stream_at(key, i * dim + t + 1) >> 11) * 0x1.0p-53;
    PointView view;
    view.coords = v.data();
    view.values = vals.data();
    view.count = dim;
    view.is_prefix = prefix_sets;
    sum += f(view);
  }
  EstimateResult res;
  res.value = sum / double(n);
  res.cost = double(n) * std::pow(double(dim), s);
  res.level_value = {res.value};
  res.level_cost = {res.cost};
  return res;
}

}  // namespace mlqmc
