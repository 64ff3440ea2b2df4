// Command-line front end: CBC vector construction, point emission,
// one-shot integration, convergence experiments, and predicted rates.
//
// Exit codes: 0 success, 2 usage error (bad arguments, malformed inputs,
// infeasible requests), 3 resource error (I/O failures, size limits).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <mlqmc/harness.hpp>
#include <mlqmc/lattice.hpp>
#include <mlqmc/scramble.hpp>

namespace {

using namespace mlqmc;

QualityMode mode_from(const std::string& name) {
  if (name == "auto") return QualityMode::automatic;
  if (name == "exact") return QualityMode::exact;
  if (name == "floating") return QualityMode::floating;
  throw usage_error("cbc: mode must be auto, exact, or floating");
}

void run_cbc(std::uint32_t b, unsigned M, unsigned s, const std::string& weights,
             const std::string& out_path, const std::string& mode) {
  const WeightModel w = load_weights(weights);
  const CbcResult res = cbc_construct(b, M, default_modulus(b, M), s, w, mode_from(mode));
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw resource_error("cbc: cannot write '" + out_path + "'");
  save_vector(out, res.g);
  if (!out) throw resource_error("cbc: write failed for '" + out_path + "'");
  std::printf("b=%u M=%u s=%u points=%llu arithmetic=%s\n", b, M, s,
              (unsigned long long)res.g.n(), res.exact ? "exact" : "floating");
  std::printf("criterion per coordinate:");
  for (double v : res.step_values) std::printf(" %.12g", v);
  std::printf("\n");
  std::printf("saved %s\n", out_path.c_str());
}

void run_points(const std::string& vec_path, bool scramble, std::uint64_t seed,
                std::uint64_t rep, unsigned depth) {
  std::ifstream in(vec_path);
  if (!in) throw usage_error("points: cannot open '" + vec_path + "'");
  const GeneratingVector g = load_vector(in);
  const std::uint64_t n = g.n();
  const unsigned s = g.s();
  std::vector<std::vector<double>> cols(s, std::vector<double>(n));
  ScrambleSpec spec;
  spec.master_seed = seed;
  spec.replication = rep;
  spec.salt = 1;
  spec.depth = depth;
  const double scale = std::pow(double(g.b), -double(g.M));
  for (unsigned c = 0; c < s; ++c) {
    const auto nums = plr_column(g.b, g.M, g.p, g.q[c]);
    if (scramble) {
      scramble_column(column_key(spec, c), nums.data(), cols[c].data(), n, g.M, g.b,
                      spec.depth, spec.identity);
    } else {
      for (std::uint64_t h = 0; h < n; ++h) cols[c][h] = double(nums[h]) * scale;
    }
  }
  for (std::uint64_t h = 0; h < n; ++h) {
    for (unsigned c = 0; c < s; ++c)
      std::printf("%s%.17g", c ? "\t" : "", cols[c][h]);
    std::printf("\n");
  }
}

void run_integrate_cmd(const std::string& config_path, std::uint64_t rep) {
  const ExperimentConfig cfg = parse_config_file(config_path);
  const IntegrateResult res = run_integrate(cfg, rep);
  std::printf("value %.17g\n", res.value);
  std::printf("cost %.17g\n", res.cost);
  std::printf("estimator %s\n", cfg.estimator.c_str());
  std::printf("levels %u:", res.m);
  for (auto L : res.levels) std::printf(" %u", L);
  std::printf("\n");
}

void run_experiment_cmd(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig cfg = parse_config_file(config_path);
  if (!out_override.empty()) cfg.output = out_override;
  const RateReport report = run_experiment(cfg);
  for (const auto& row : report.rows)
    std::printf("budget %.6g cost %.6g rmse %.6g (se %.2g) m=%u\n", row.budget,
                row.realized_cost, row.rmse, row.std_error, row.m);
  std::printf("fitted rmse slope %.4f +/- %.4f over %zu budgets\n", report.fit.slope,
              report.fit.halfwidth, report.fit.points);
  std::printf("predicted rmse slope %.4f (%s%s)\n", report.predicted_rmse_slope,
              report.regime.c_str(), report.sharp ? ", sharp" : "");
  if (!cfg.output.empty()) std::printf("wrote %s\n", cfg.output.c_str());
}

void run_rates(const std::string& weights, const std::string& decay_str,
               const std::string& alpha_str, const std::string& s_str,
               const std::string& model_str) {
  ExponentSetting st;
  if (model_str == "ml") st.model = RateModel::variable_ml;
  else if (model_str == "single") st.model = RateModel::fixed_single;
  else if (model_str == "mc") st.model = RateModel::mc;
  else throw usage_error("rates: model must be ml, single, or mc");
  st.alpha = parse_rational(alpha_str);
  st.s = parse_rational(s_str);
  bool have_decay = false;
  if (!decay_str.empty()) {
    st.decay = parse_rational(decay_str);
    have_decay = true;
  }
  if (!weights.empty()) {
    const WeightModel w = load_weights(weights);
    st.weights =
        w.is_product() ? WeightsClass::product : WeightsClass::finite_intersection;
    if (!have_decay) {
      if (w.is_product() && w.q_is_int) st.decay = Rational(w.q_int);
      else st.decay = Rational(std::llround(decay_estimate(w) * 4096.0), 4096);
      have_decay = true;
    }
  }
  if (!have_decay)
    throw usage_error("rates: give --decay or --weights to determine the decay");
  const ExponentPrediction pred = predicted_exponent(st);
  std::printf("weights %s\n",
              st.weights == WeightsClass::product ? "product" : "finite-intersection");
  std::printf("decay %s alpha %s s %s model %s\n", to_string(st.decay).c_str(),
              to_string(st.alpha).c_str(), to_string(st.s).c_str(), model_str.c_str());
  std::printf("squared-error exponent: upper %s (%.6g), lower %s (%.6g)\n",
              to_string(pred.upper).c_str(), to_double(pred.upper),
              to_string(pred.lower).c_str(), to_double(pred.lower));
  std::printf("rmse slope %.6g, regime %s, %s\n", to_double(pred.upper) / 2.0,
              pred.regime.c_str(), pred.sharp ? "sharp" : "not sharp");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilevel scrambled polynomial-lattice quadrature toolkit"};
  app.require_subcommand(1);

  // cbc
  std::uint64_t cbc_b = 2;
  unsigned cbc_M = 0, cbc_s = 0;
  std::string cbc_weights, cbc_out, cbc_mode = "auto";
  auto* cbc = app.add_subcommand("cbc", "construct a generating vector");
  cbc->add_option("--b", cbc_b, "digit base")->capture_default_str();
  cbc->add_option("--M", cbc_M, "points per rule = b^M")->required();
  cbc->add_option("--s", cbc_s, "number of coordinates")->required();
  cbc->add_option("--weights", cbc_weights, "product:c,q or a table file")->required();
  cbc->add_option("--out", cbc_out, "output vector file")->required();
  cbc->add_option("--mode", cbc_mode, "auto|exact|floating")->capture_default_str();

  // points
  std::string pts_vec;
  std::uint64_t pts_seed = 0, pts_rep = 0;
  unsigned pts_depth = 32;
  bool pts_have_seed = false;
  auto* pts = app.add_subcommand("points", "emit the rule's points as text");
  pts->add_option("--vec", pts_vec, "generating vector file")->required();
  auto* seed_opt =
      pts->add_option("--scramble", pts_seed, "master seed; omit for raw points");
  pts->add_option("--rep", pts_rep, "replication index")->capture_default_str();
  pts->add_option("--depth", pts_depth, "scrambled digit depth")->capture_default_str();

  // integrate
  std::string int_config;
  std::uint64_t int_rep = 0;
  auto* integ = app.add_subcommand("integrate", "one estimate at the first budget");
  integ->add_option("--config", int_config, "flat key = value config file")->required();
  integ->add_option("--rep", int_rep, "replication index")->capture_default_str();

  // experiment
  std::string exp_config, exp_out;
  auto* exp = app.add_subcommand("experiment", "budget sweep with slope fit and CSV");
  exp->add_option("--config", exp_config, "flat key = value config file")->required();
  exp->add_option("--out", exp_out, "CSV output path (overrides the config)");

  // rates
  std::string rt_weights, rt_decay, rt_alpha = "3", rt_s = "1", rt_model = "ml";
  auto* rt = app.add_subcommand("rates", "print predicted error exponents");
  rt->add_option("--weights", rt_weights, "product:c,q or a table file");
  rt->add_option("--decay", rt_decay, "decay exponent as a rational, e.g. 7/2");
  rt->add_option("--alpha", rt_alpha, "variance rate parameter")->capture_default_str();
  rt->add_option("--s", rt_s, "cost exponent")->capture_default_str();
  rt->add_option("--model", rt_model, "ml|single|mc")->capture_default_str();

  try {
    app.parse(argc, argv);
    pts_have_seed = seed_opt->count() > 0;
    if (*cbc) {
      run_cbc(std::uint32_t(cbc_b), cbc_M, cbc_s, cbc_weights, cbc_out, cbc_mode);
    } else if (*pts) {
      run_points(pts_vec, pts_have_seed, pts_seed, pts_rep, pts_depth);
    } else if (*integ) {
      run_integrate_cmd(int_config, int_rep);
    } else if (*exp) {
      run_experiment_cmd(exp_config, exp_out);
    } else if (*rt) {
      run_rates(rt_weights, rt_decay, rt_alpha, rt_s, rt_model);
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const mlqmc::usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const mlqmc::resource_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
