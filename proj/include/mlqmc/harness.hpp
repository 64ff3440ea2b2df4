#pragma once

// Experiment harness: predicted convergence exponents for the implemented
// estimators, budget planning (level growth balanced against the cost
// budget), replication loops with RMSE reporting, log-log slope fitting,
// and a deterministic CSV round trip.
//
// Reported RMSE is over fixed library integrands with known integrals; it
// lower-bounds the worst-case error over the unit ball, so slope agreement
// (not constants) is the meaningful check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "integrand.hpp"
#include "multilevel.hpp"
#include "rational.hpp"
#include "space.hpp"
#include "weights.hpp"

namespace mlqmc {

// ---------------------------------------------------------------------------
// Predicted squared-error exponents
// ---------------------------------------------------------------------------

enum class RateModel { variable_ml, fixed_single, mc };
enum class WeightsClass { product, finite_intersection };

struct ExponentSetting {
  WeightsClass weights = WeightsClass::product;
  Rational decay = 3;  // decay exponent of the ordered weight sequence
  Rational alpha = 3;  // single-rule variance convergence rate
  Rational s = 1;      // cost-per-point exponent in the coordinate count
  RateModel model = RateModel::variable_ml;
};

struct ExponentPrediction {
  Rational upper;  // squared-error cost exponent, arbitrarily small delta dropped
  Rational lower;  // matching lower-bound exponent
  bool sharp = false;  // upper == lower (the bound pair is tight)
  std::string regime;
};

// Exact regime table for the squared error e^2 as a function of the cost
// budget N. Upper bounds: multilevel variable-subspace sampling decays as
// N^{-alpha} once decay >= 1+alpha*s and as N^{-(decay-1)/s} for smaller
// decay; product weights with s < (alpha-1)/alpha switch regimes at
// decay = alpha and decay = 1/(1-s) with an intermediate N^{-decay} branch.
// Fixed-subspace sampling pays for its frozen coordinate set:
// N^{-alpha(decay-1)/(alpha s + decay - 1)}. Lower bounds: fixed-subspace
// matches its upper bound exactly; variable-subspace sampling cannot beat
// N^{-min(alpha, (decay-1)/s)}. Monte Carlo is N^{-1} both ways.
inline ExponentPrediction predicted_exponent(const ExponentSetting& st) {
  if (!(st.decay > 1))
    throw usage_error("predicted exponent: decay must exceed 1");
  if (!(st.s > 0))
    throw usage_error("predicted exponent: cost exponent must be positive");
  if (!(st.alpha >= 1))
    throw usage_error("predicted exponent: alpha must be at least 1");
  ExponentPrediction out;
  if (st.model == RateModel::mc) {
    out.upper = -1;
    out.lower = -1;
    out.sharp = true;
    out.regime = "mc";
    return out;
  }
  const Rational p = st.decay;
  const Rational a = st.alpha;
  const Rational s = st.s;
  if (st.model == RateModel::fixed_single) {
    const Rational e = -(a * (p - 1)) / (a * s + p - 1);
    out.upper = e;
    out.lower = e;
    out.sharp = true;
    out.regime = "fixed-subspace";
    return out;
  }
  // Variable-subspace multilevel.
  const Rational decay_rate = (p - 1) / s;
  out.lower = -std::min(a, decay_rate);
  const bool product_small_s =
      st.weights == WeightsClass::product && s < (a - 1) / a;
  if (!product_small_s) {
    if (p >= 1 + a * s) {
      out.upper = -a;
      out.regime = "smoothness-limited";
    } else {
      out.upper = -decay_rate;
      out.regime = "decay-limited";
    }
  } else if (p >= a) {
    out.upper = -a;
    out.regime = "smoothness-limited";
  } else if (p * (1 - s) > 1) {
    out.upper = -p;
    out.regime = "intermediate";
  } else {
    out.upper = -decay_rate;
    out.regime = "decay-limited";
  }
  out.sharp = out.upper == out.lower;
  return out;
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double halfwidth = 0;  // two standard errors of the slope
  std::size_t points = 0;
};

// Ordinary least squares of log(y) on log(x). The halfwidth is twice the
// slope's standard error computed from the residual standard error, so an
// exact power law reports halfwidth zero.
inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 4) throw usage_error("slope fit: need at least 4 points");
  const std::size_t n = pts.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pts[i].first > 0) || !(pts[i].second > 0))
      throw usage_error("slope fit: inputs must be positive");
    x[i] = std::log(pts[i].first);
    y[i] = std::log(pts[i].second);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw usage_error("slope fit: abscissae are all equal");
  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.halfwidth = 2.0 * std::sqrt(rss / double(n - 2) / sxx);
  return fit;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Flat key = value configuration for one experiment. '#' starts a comment
// line; unknown keys are rejected. `budgets` is a comma-separated list.
struct ExperimentConfig {
  std::string weights = "product:1,3";  // inline product spec or a table file
  std::string integrand = "kernel_section:1;0.3";
  std::string estimator = "ml";  // ml | single | mc
  double s = 1.0;                // cost exponent
  std::vector<double> budgets;
  std::uint64_t replications = 200;
  std::uint64_t master_seed = 1;
  double delta = 0.1;
  std::string output;  // CSV path; empty keeps the report in memory
  double alpha = 3.0;
  std::uint32_t b = 2;
  unsigned depth = 32;
  std::string mode = "auto";  // auto | prefix | union (level coordinate sets)
  unsigned L = 1;             // level-size base: L_k = L*ceil(A^k)
  double A = 2.0;             // level-size growth factor
  std::string cache_dir;      // generating-vector cache; empty = memory only
  bool build_vectors = true;  // false: cache misses become usage errors
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto z = s.find_last_not_of(" \t\r\n");
  return s.substr(a, z - a + 1);
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double_strict(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw usage_error("expected a number, got an empty field");
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw usage_error("not a number: '" + t + "'");
  }
  if (used != t.size()) throw usage_error("trailing characters in number '" + t + "'");
  if (!std::isfinite(v)) throw usage_error("number out of range: '" + t + "'");
  return v;
}

inline std::uint64_t parse_uint_strict(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw usage_error("expected a nonnegative integer, got '" + t + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw usage_error("integer out of range: '" + t + "'");
  }
}

inline bool parse_bool_strict(const std::string& s) {
  const std::string t = trim(s);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw usage_error("expected a boolean, got '" + t + "'");
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_on(s, ',')) out.push_back(parse_double_strict(tok));
  return out;
}

inline Coords parse_coord_list(const std::string& s) {
  Coords out;
  for (const auto& tok : split_on(s, ','))
    out.push_back(std::uint32_t(parse_uint_strict(tok)));
  return out;
}

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.estimator != "ml" && cfg.estimator != "single" && cfg.estimator != "mc")
    throw usage_error("config: estimator must be ml, single, or mc");
  if (cfg.mode != "auto" && cfg.mode != "prefix" && cfg.mode != "union")
    throw usage_error("config: mode must be auto, prefix, or union");
  if (cfg.budgets.empty()) throw usage_error("config: budgets must be nonempty");
  for (std::size_t i = 0; i < cfg.budgets.size(); ++i) {
    if (!(cfg.budgets[i] > 0)) throw usage_error("config: budgets must be positive");
    if (i > 0 && !(cfg.budgets[i] > cfg.budgets[i - 1]))
      throw usage_error("config: budgets must be strictly increasing");
  }
  if (cfg.replications < 1) throw usage_error("config: need at least one replication");
  if (!(cfg.s > 0)) throw usage_error("config: cost exponent must be positive");
  if (!(cfg.delta > 0)) throw usage_error("config: delta must be positive");
  if (!(cfg.alpha > cfg.delta)) throw usage_error("config: alpha must exceed delta");
  if (cfg.b < 2) throw usage_error("config: base must be at least 2");
  if (cfg.depth < 1 || cfg.depth > 64) throw usage_error("config: depth must be 1..64");
  if (cfg.L < 1) throw usage_error("config: L must be at least 1");
  if (!(cfg.A > 1)) throw usage_error("config: A must exceed 1");
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.budgets.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw usage_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    try {
      if (key == "weights") cfg.weights = val;
      else if (key == "integrand") cfg.integrand = val;
      else if (key == "estimator") cfg.estimator = val;
      else if (key == "s") cfg.s = detail::parse_double_strict(val);
      else if (key == "budgets") cfg.budgets = detail::parse_double_list(val);
      else if (key == "replications") cfg.replications = detail::parse_uint_strict(val);
      else if (key == "seed") cfg.master_seed = detail::parse_uint_strict(val);
      else if (key == "delta") cfg.delta = detail::parse_double_strict(val);
      else if (key == "output") cfg.output = val;
      else if (key == "alpha") cfg.alpha = detail::parse_double_strict(val);
      else if (key == "b") cfg.b = std::uint32_t(detail::parse_uint_strict(val));
      else if (key == "depth") cfg.depth = unsigned(detail::parse_uint_strict(val));
      else if (key == "mode") cfg.mode = val;
      else if (key == "L") cfg.L = unsigned(detail::parse_uint_strict(val));
      else if (key == "A") cfg.A = detail::parse_double_strict(val);
      else if (key == "cache_dir") cfg.cache_dir = val;
      else if (key == "build_vectors") cfg.build_vectors = detail::parse_bool_strict(val);
      else throw usage_error("unknown key '" + key + "'");
    } catch (const usage_error& e) {
      throw usage_error("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("config: cannot open '" + path + "'");
  return parse_config(in);
}

// Weight spec: "product:c,q" inline, anything else is a table file path.
inline WeightModel load_weights(const std::string& spec) {
  if (spec.starts_with("product:") || spec.starts_with("product "))
    return WeightModel::parse_spec(spec);
  std::ifstream in(spec);
  if (!in) throw usage_error("weights: cannot open '" + spec + "'");
  return WeightModel::parse(in);
}

// Integrand spec strings:
//   constant:VALUE
//   kernel_section:COORDS;Y      e.g. kernel_section:1,2;0.3 (Y broadcasts)
//   anova_pure:COORDS;Y
//   infinite_product:Y0
inline Integrand make_integrand_from_spec(const std::string& spec, const WeightModel& w) {
  const auto colon = spec.find(':');
  const std::string name = colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
  if (name == "constant") {
    if (rest.empty()) throw usage_error("integrand: constant needs a value");
    return make_constant(detail::parse_double_strict(rest));
  }
  if (name == "infinite_product") {
    if (rest.empty()) throw usage_error("integrand: infinite_product needs an anchor value y0");
    return make_infinite_product(w, detail::parse_double_strict(rest));
  }
  if (name == "kernel_section" || name == "anova_pure") {
    const auto semi = rest.find(';');
    if (semi == std::string::npos)
      throw usage_error("integrand: " + name + " needs 'coords;y'");
    Coords v = detail::parse_coord_list(rest.substr(0, semi));
    std::vector<double> y = detail::parse_double_list(rest.substr(semi + 1));
    if (y.size() == 1 && v.size() > 1) y.assign(v.size(), y[0]);
    if (name == "kernel_section") return make_kernel_section(w, std::move(v), std::move(y));
    return make_anova_pure(std::move(v), std::move(y));
  }
  throw usage_error("integrand: unknown spec '" + name +
                    "' (constant, kernel_section, anova_pure, infinite_product)");
}

// ---------------------------------------------------------------------------
// Budget planning
// ---------------------------------------------------------------------------

inline SubspaceMode resolve_mode(const std::string& mode, const WeightModel& w) {
  if (mode == "prefix") return SubspaceMode::prefix;
  if (mode == "union") return SubspaceMode::union_sets;
  if (mode == "auto")
    return w.is_product() ? SubspaceMode::prefix : SubspaceMode::union_sets;
  throw usage_error("experiment: mode must be auto, prefix, or union");
}

struct EstimatePlan {
  std::string estimator;
  LevelSchedule sched;                // ml only (with samples allocated)
  std::vector<std::uint32_t> v;       // single/mc coordinate set
  std::uint64_t n = 0;                // single/mc point count
  unsigned m = 1;
  std::vector<std::uint32_t> levels;  // L_k per level (single/mc: one entry)
};

namespace detail {

// Grow the level count until the top level saturates the balancing rule
// L_m^e <= S (e = s when the decay-limited branch governs, otherwise
// (p-1)/(alpha-delta)) or the budget can no longer cover the level floor.
inline LevelSchedule ml_schedule_for_budget(const WeightModel& w, SubspaceMode mode,
                                            unsigned L, double A, double s, double alpha,
                                            double delta, double S, std::uint32_t b,
                                            double e_bal) {
  LevelSchedule best = build_schedule(w, mode, L, A, 1, s, alpha, delta);
  best.nk = allocate_samples(best, S, b);
  for (unsigned m = 2; m <= 64; ++m) {
    LevelSchedule next;
    try {
      next = build_schedule(w, mode, L, A, m, s, alpha, delta);
    } catch (const resource_error&) {
      break;
    }
    if (next.m <= best.m) break;  // coordinate sets saturated
    if (std::pow(double(next.Lk.back()), e_bal) > S) break;
    try {
      next.nk = allocate_samples(next, S, b);
    } catch (const usage_error&) {
      break;  // budget below the larger level floor
    }
    best = std::move(next);
    if (best.m < m) break;
  }
  return best;
}

// Union of the first L supported sets in the canonical (decreasing weight)
// enumeration.
inline Coords union_of_leading_sets(const WeightModel& w, unsigned L) {
  const auto order = entry_order_by_gamma_hat(w);
  Coords v;
  for (std::size_t j = 0; j < order.size() && j < L; ++j)
    for (auto c : w.entries[order[j]].u) v.push_back(c);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

// Turn one budget into a concrete sampling plan for the configured
// estimator. Multilevel grows m per the balancing rule; the fixed-subspace
// estimator balances the coordinate count against the point count
// (L ~ n^{(alpha-delta)/(p-1)}); Monte Carlo spends the budget on points.
inline EstimatePlan plan_estimate(const ExperimentConfig& cfg, const WeightModel& w,
                                  const Integrand& f, double S) {
  validate_config(cfg);
  if (!(S > 0)) throw usage_error("experiment: budget must be positive");
  EstimatePlan plan;
  plan.estimator = cfg.estimator;
  if (cfg.estimator == "mc") {
    plan.v = f.active.empty() ? Coords{1} : f.active;
    const double unit = std::pow(double(plan.v.size()), cfg.s);
    const double nd = std::floor(S / unit);
    if (!(nd >= 1)) throw usage_error("experiment: budget below one baseline point");
    plan.n = std::uint64_t(std::min(nd, 1e15));
    plan.levels = {std::uint32_t(plan.v.size())};
    return plan;
  }
  const SubspaceMode mode = resolve_mode(cfg.mode, w);
  const double decay = decay_estimate(w);
  const double p_bal = decay - cfg.delta * cfg.s;
  if (!(p_bal > 1))
    throw usage_error("experiment: weight decay too weak to balance levels");
  if (cfg.estimator == "ml") {
    const double e_bal = decay >= 1.0 + cfg.alpha * cfg.s
                             ? (p_bal - 1.0) / (cfg.alpha - cfg.delta)
                             : cfg.s;
    plan.sched = detail::ml_schedule_for_budget(w, mode, cfg.L, cfg.A, cfg.s, cfg.alpha,
                                                cfg.delta, S, cfg.b, e_bal);
    plan.m = plan.sched.m;
    plan.levels = plan.sched.Lk;
    return plan;
  }
  // Fixed-subspace single level.
  const double grow = (cfg.alpha - cfg.delta) / (p_bal - 1.0);
  for (unsigned M = 1; M <= 20; ++M) {
    const double n = std::pow(double(cfg.b), double(M));
    const double Ld = std::ceil(std::pow(n, grow));
    if (!(Ld <= 5e7)) break;
    const unsigned L = std::max(1u, unsigned(Ld));
    Coords v;
    if (w.is_product()) {
      v.resize(L);
      std::iota(v.begin(), v.end(), 1u);
    } else {
      v = detail::union_of_leading_sets(w, L);
    }
    if (n * std::pow(double(v.size()), cfg.s) > S) break;
    plan.n = std::uint64_t(n);
    plan.v = std::move(v);
    plan.levels = {L};
  }
  if (plan.n == 0)
    throw usage_error("experiment: budget below one single-level rule");
  return plan;
}

inline EstimateResult execute_plan(const EstimatePlan& plan, const ExperimentConfig& cfg,
                                   const WeightModel& w, const Integrand& f,
                                   VectorCache& cache, std::uint64_t replication) {
  if (plan.estimator == "ml")
    return ml_estimate(f, plan.sched, w, cache, cfg.master_seed, replication, cfg.b,
                       cfg.depth);
  if (plan.estimator == "single")
    return single_level_estimate(f, plan.v, plan.n, w, cache, cfg.master_seed,
                                 replication, cfg.s, cfg.b, cfg.depth);
  return mc_estimate(f, plan.v, plan.n, cfg.master_seed, replication, cfg.s);
}

// ---------------------------------------------------------------------------
// Experiment driver and report
// ---------------------------------------------------------------------------

struct BudgetRow {
  double budget = 0;
  double realized_cost = 0;
  double rmse = 0;
  double std_error = 0;  // standard error of the RMSE (delta method)
  std::uint64_t replications = 0;
  unsigned m = 0;
  std::vector<std::uint32_t> levels;
};

struct RateReport {
  std::vector<BudgetRow> rows;
  SlopeFit fit;  // log RMSE against log realized cost
  double predicted_rmse_slope = 0;
  std::string regime;
  bool sharp = false;
  std::vector<std::string> metadata;  // "key: value" lines
};

inline void write_csv(std::ostream& out, const RateReport& r);

namespace detail {

inline Rational approx_rational(double x) {
  return Rational(std::llround(x * 4096.0), 4096);
}

inline Rational decay_of(const WeightModel& w) {
  if (w.is_product() && w.q_is_int) return Rational(w.q_int);
  if (w.is_product()) return approx_rational(w.q);
  return approx_rational(decay_estimate(w));
}

inline std::vector<std::string> build_metadata(const ExperimentConfig& cfg,
                                               const WeightModel& w, const Integrand& f) {
  std::vector<std::string> md;
  auto add = [&](const std::string& k, const std::string& v) { md.push_back(k + ": " + v); };
  add("weights", cfg.weights);
  add("integrand", cfg.integrand);
  add("estimator", cfg.estimator);
  add("s", fmt_g17(cfg.s));
  add("alpha", fmt_g17(cfg.alpha));
  add("delta", fmt_g17(cfg.delta));
  add("seed", std::to_string(cfg.master_seed));
  add("b", std::to_string(cfg.b));
  add("depth", std::to_string(cfg.depth));
  add("mode", cfg.mode);
  add("decay_estimate", fmt_g17(decay_estimate(w)));
  add("integrand_truncation", std::to_string(f.truncation_index));
  add("weight_truncation", "128");
  add("rounding", "IEEE-754 binary64, round to nearest even");
  add("key_derivation",
      "counter tree; level salt = level index; replication branches the root key");
  add("cost_convention", "level_pair");
  return md;
}

}  // namespace detail

// Runs the configured estimator over the budget grid, reporting per-budget
// realized cost and RMSE plus a fitted log-log slope. Deterministic: the
// same configuration and seed reproduce the report (and its CSV) bitwise.
inline RateReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.budgets.size() < 4)
    throw usage_error("experiment: need at least 4 budgets for a slope fit");
  if (cfg.replications < 100)
    throw usage_error("experiment: slope experiments need at least 100 replications");
  const WeightModel w = load_weights(cfg.weights);
  const Integrand f = make_integrand_from_spec(cfg.integrand, w);
  VectorCache cache(cfg.cache_dir, cfg.build_vectors);
  RateReport report;
  for (const double S : cfg.budgets) {
    const EstimatePlan plan = plan_estimate(cfg, w, f, S);
    BudgetRow row;
    row.budget = S;
    row.replications = cfg.replications;
    row.m = plan.m;
    row.levels = plan.levels;
    std::vector<double> sq(cfg.replications);
    double mse = 0;
    for (std::uint64_t r = 0; r < cfg.replications; ++r) {
      const EstimateResult res = execute_plan(plan, cfg, w, f, cache, r);
      if (r == 0) row.realized_cost = res.cost;
      const double err = res.value - f.exact_integral;
      sq[r] = err * err;
      mse += err * err;
    }
    mse /= double(cfg.replications);
    row.rmse = std::sqrt(mse);
    double varsq = 0;
    for (const double q : sq) varsq += (q - mse) * (q - mse);
    varsq /= double(cfg.replications - 1);
    const double se_mse = std::sqrt(varsq / double(cfg.replications));
    row.std_error = row.rmse > 0 ? se_mse / (2.0 * row.rmse) : 0.0;
    report.rows.push_back(std::move(row));
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : report.rows) pts.emplace_back(r.realized_cost, r.rmse);
  report.fit = fit_slope(pts);
  ExponentSetting st;
  st.weights = w.is_product() ? WeightsClass::product : WeightsClass::finite_intersection;
  st.decay = detail::decay_of(w);
  st.alpha = detail::approx_rational(cfg.alpha);
  st.s = detail::approx_rational(cfg.s);
  st.model = cfg.estimator == "ml"       ? RateModel::variable_ml
             : cfg.estimator == "single" ? RateModel::fixed_single
                                         : RateModel::mc;
  const ExponentPrediction pred = predicted_exponent(st);
  report.predicted_rmse_slope = to_double(pred.upper) / 2.0;
  report.regime = pred.regime;
  report.sharp = pred.sharp;
  report.metadata = detail::build_metadata(cfg, w, f);
  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw resource_error("experiment: cannot write '" + cfg.output + "'");
    write_csv(out, report);
  }
  return report;
}

// One estimate at the first configured budget (CLI `integrate`).
struct IntegrateResult {
  double value = 0;
  double cost = 0;
  unsigned m = 1;
  std::vector<std::uint32_t> levels;
};

inline IntegrateResult run_integrate(const ExperimentConfig& cfg,
                                     std::uint64_t replication = 0) {
  validate_config(cfg);
  const WeightModel w = load_weights(cfg.weights);
  const Integrand f = make_integrand_from_spec(cfg.integrand, w);
  VectorCache cache(cfg.cache_dir, cfg.build_vectors);
  const EstimatePlan plan = plan_estimate(cfg, w, f, cfg.budgets.front());
  const EstimateResult res = execute_plan(plan, cfg, w, f, cache, replication);
  return {res.value, res.cost, plan.m, plan.levels};
}

// ---------------------------------------------------------------------------
// CSV round trip
// ---------------------------------------------------------------------------

inline constexpr const char* csv_version_line = "# mlqmc-experiment-v1";
inline constexpr const char* csv_header_line =
    "budget,realized_cost,rmse,stderr,replications,m,levels";

inline void write_csv(std::ostream& out, const RateReport& r) {
  out << csv_version_line << "\n";
  for (const auto& m : r.metadata) out << "# " << m << "\n";
  out << "# predicted_rmse_slope: " << detail::fmt_g17(r.predicted_rmse_slope) << "\n";
  out << "# regime: " << r.regime << "\n";
  out << "# sharp: " << (r.sharp ? 1 : 0) << "\n";
  out << csv_header_line << "\n";
  for (const auto& row : r.rows) {
    out << detail::fmt_g17(row.budget) << ',' << detail::fmt_g17(row.realized_cost) << ','
        << detail::fmt_g17(row.rmse) << ',' << detail::fmt_g17(row.std_error) << ','
        << row.replications << ',' << row.m << ',';
    for (std::size_t i = 0; i < row.levels.size(); ++i)
      out << (i ? "|" : "") << row.levels[i];
    out << "\n";
  }
  out << "# fitted_slope: " << detail::fmt_g17(r.fit.slope) << "\n";
  out << "# fitted_intercept: " << detail::fmt_g17(r.fit.intercept) << "\n";
  out << "# fitted_halfwidth: " << detail::fmt_g17(r.fit.halfwidth) << "\n";
  out << "# fitted_points: " << r.fit.points << "\n";
}

inline std::string csv_string(const RateReport& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

inline RateReport parse_csv(std::istream& in) {
  RateReport r;
  std::string line;
  if (!std::getline(in, line) || line != csv_version_line)
    throw usage_error("experiment csv: missing version line");
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = detail::trim(line.substr(1));
      const auto pos = body.find(": ");
      if (pos == std::string::npos) {
        r.metadata.push_back(body);
        continue;
      }
      const std::string key = body.substr(0, pos);
      const std::string val = body.substr(pos + 2);
      if (key == "predicted_rmse_slope")
        r.predicted_rmse_slope = detail::parse_double_strict(val);
      else if (key == "regime") r.regime = val;
      else if (key == "sharp") r.sharp = val == "1";
      else if (key == "fitted_slope") r.fit.slope = detail::parse_double_strict(val);
      else if (key == "fitted_intercept") r.fit.intercept = detail::parse_double_strict(val);
      else if (key == "fitted_halfwidth") r.fit.halfwidth = detail::parse_double_strict(val);
      else if (key == "fitted_points")
        r.fit.points = std::size_t(detail::parse_uint_strict(val));
      else r.metadata.push_back(body);
      continue;
    }
    if (!seen_header) {
      if (line != csv_header_line)
        throw usage_error("experiment csv: unexpected header '" + line + "'");
      seen_header = true;
      continue;
    }
    const auto cells = detail::split_on(line, ',');
    if (cells.size() != 7)
      throw usage_error("experiment csv: expected 7 columns, got row '" + line + "'");
    BudgetRow row;
    row.budget = detail::parse_double_strict(cells[0]);
    row.realized_cost = detail::parse_double_strict(cells[1]);
    row.rmse = detail::parse_double_strict(cells[2]);
    row.std_error = detail::parse_double_strict(cells[3]);
    row.replications = detail::parse_uint_strict(cells[4]);
    row.m = unsigned(detail::parse_uint_strict(cells[5]));
    for (const auto& tok : detail::split_on(cells[6], '|'))
      row.levels.push_back(std::uint32_t(detail::parse_uint_strict(tok)));
    r.rows.push_back(std::move(row));
  }
  if (!seen_header) throw usage_error("experiment csv: missing column header");
  return r;
}

}  // namespace mlqmc
