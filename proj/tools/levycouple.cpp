// Command-line driver: computes contraction constants for Levy-driven SDEs
// under the mirror coupling, simulates coupled ensembles, and verifies the
// exponential-contraction and corollary envelopes.
//
// Exit codes: 0 success, 2 feasibility (assumption) failure,
//             3 verification failure, 1 anything else.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levycouple/levycouple.hpp"

namespace lc = levycouple;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> k_convention;
};

lc::RunConfig load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) {
    throw lc::ConfigError("--config is required for this subcommand");
  }
  lc::RunConfig rc = lc::load_run_config(args.config_path);
  if (args.seed) rc.base_seed = *args.seed;
  if (args.threads) rc.threads = *args.threads;
  if (args.k_convention) {
    if (*args.k_convention == "proof") {
      rc.distance.k_convention = lc::KConvention::Proof;
    } else if (*args.k_convention == "statement") {
      rc.distance.k_convention = lc::KConvention::Statement;
    } else {
      throw lc::ConfigError("--k-convention must be 'proof' or 'statement'");
    }
  }
  if (!args.out_dir.empty()) rc.output.dir = args.out_dir;
  return rc;
}

void write_manifest(const lc::RunConfig& rc, const std::string& subcommand) {
  lc::write_json_file(rc.output.dir + "/manifest.json", lc::manifest_json(rc, subcommand));
}

void print_constants(const lc::DistanceFunction& df) {
  std::printf("C_eps      = %.10g\n", df.c_eps);
  std::printf("C_delta    = %.10g  (truncated at m: %.10g)\n", df.c_delta, df.c_delta_m);
  std::printf("m, eta     = %.10g, %.10g\n", df.m, df.eta);
  std::printf("R0, R1     = %.10g, %.10g\n", df.r0, df.r1);
  std::printf("c1         = %.10g\n", df.c1);
  std::printf("phi(R0)    = %.10g\n", df.phi_r0);
  std::printf("K, a       = %.10g, %.10g\n", df.K, df.a);
  std::printf("c          = %.10g\n", df.c);
  std::printf("prefactors : TV %.10g, W1 %.10g\n", df.prefactor_tv, df.prefactor_w1);
}

int cmd_constants(const GlobalArgs& args, bool with_table) {
  const lc::RunConfig rc = load_config(args);
  write_manifest(rc, with_table ? "build-distance" : "constants");
  const lc::DistanceFunction df = lc::build_distance(rc.measure, rc.drift, rc.distance);
  lc::json j = lc::constants_to_json(df);
  if (rc.scan.enabled()) {
    const auto scan = lc::scan_epsilon_delta(rc.measure, rc.drift, rc.scan.lo, rc.scan.hi,
                                             rc.scan.points, rc.distance);
    lc::json rows = lc::json::array();
    for (const auto& p : scan) {
      rows.push_back({{"eps_delta", p.eps_delta}, {"c", p.c}, {"feasible", p.feasible}});
    }
    j["scan"] = rows;
  }
  lc::write_json_file(rc.output.dir + "/constants.json", j);
  if (with_table && rc.output.write_distance_csv) {
    lc::write_distance_csv(rc.output.dir + "/distance.csv", df);
    std::printf("distance table -> %s/distance.csv\n", rc.output.dir.c_str());
  }
  print_constants(df);
  std::printf("constants -> %s/constants.json\n", rc.output.dir.c_str());
  return 0;
}

void warn_if_huge_run(const lc::SimConfig& cfg) {
  const double rate = cfg.measure.tail_mass(cfg.trunc.eta);
  const double expected_jumps = rate * cfg.horizon * static_cast<double>(cfg.n_paths);
  if (expected_jumps > 1e9) {
    std::fprintf(stderr,
                 "warning: ~%.2g jump events expected; raise "
                 "[distance] variance_budget_rel or [simulation] eta if this is unintended\n",
                 expected_jumps);
  }
}

int cmd_simulate(const GlobalArgs& args, bool single) {
  const lc::RunConfig rc = load_config(args);
  write_manifest(rc, single ? "simulate-single" : "simulate");
  const lc::TruncationParams trunc = lc::resolve_truncation(rc);
  const lc::SimConfig cfg = lc::make_sim_config(rc, trunc);
  warn_if_huge_run(cfg);
  const lc::EnsembleSummary ens =
      single ? lc::run_single_ensemble(cfg, rc.threads) : lc::run_ensemble(cfg, rc.threads);
  lc::write_json_file(rc.output.dir + "/ensemble.json", lc::ensemble_to_json(ens));
  for (int i = 0; i < rc.output.trace_paths; ++i) {
    const lc::CouplingPath trace = single
                                       ? lc::simulate_single(cfg, static_cast<std::size_t>(i))
                                       : lc::simulate_coupled_pair(cfg, static_cast<std::size_t>(i));
    lc::write_trace_csv(rc.output.dir + "/trace_" + std::to_string(i) + ".csv", trace,
                        cfg.dimension());
  }
  std::printf("%zu paths, %zu excluded -> %s/ensemble.json\n", ens.n_paths, ens.n_blown,
              rc.output.dir.c_str());
  if (ens.flagged) {
    std::fprintf(stderr, "warning: more than 0.1%% of paths hit the blow-up guard\n");
  }
  return 0;
}

int cmd_verify(const GlobalArgs& args, double rate_scale) {
  const lc::RunConfig rc = load_config(args);
  write_manifest(rc, "verify");
  lc::DistanceFunction df = lc::build_distance(rc.measure, rc.drift, rc.distance);
  df.c *= rate_scale;  // sensitivity knob; 1.0 is the assembled rate
  lc::TruncationParams trunc{df.m, df.eta};
  if (rc.m_override) trunc.m = *rc.m_override;
  if (rc.eta_override) trunc.eta = *rc.eta_override;
  lc::SimConfig cfg = lc::make_sim_config(rc, trunc);
  warn_if_huge_run(cfg);
  if (cfg.initial.x0 == cfg.initial.y0) {
    std::fprintf(stderr, "note: x0 == y0 starts the pair coupled; envelopes are trivial\n");
  }
  const lc::EnsembleSummary ens = lc::run_ensemble(cfg, rc.threads);
  std::vector<double> z0(cfg.dimension());
  for (int i = 0; i < cfg.dimension(); ++i) z0[i] = cfg.initial.x0[i] - cfg.initial.y0[i];
  const double w_f_init = df.f_at(lc::norm(z0));
  const lc::ContractionReport rep = lc::build_contraction_report(ens, df, w_f_init);
  lc::write_json_file(rc.output.dir + "/report.json", lc::report_to_json(rep));
  if (rc.output.write_decay_csv) {
    lc::write_decay_csv(rc.output.dir + "/decay.csv", rep);
  }
  std::printf("contraction envelope: %s\n", rep.contraction_pass ? "pass" : "FAIL");
  std::printf("fitted rate %.6g vs %.2g x c = %.6g: %s\n", rep.fit.rate, rep.rate_fraction,
              rep.rate_fraction * rep.c, rep.rate_pass ? "pass" : "FAIL");
  std::printf("corollary envelopes: %s\n", rep.corollaries_pass ? "pass" : "FAIL");
  std::printf("report -> %s/report.json\n", rc.output.dir.c_str());
  return rep.all_pass() ? 0 : 3;
}

int cmd_reproduce_example(const std::string& out_dir) {
  // Reference regime: one-dimensional stable noise with alpha = 3/2, drift
  // dissipative with strength 2 sqrt(2) outside the unit ball, eps = delta
  // chosen at the rate-optimal point (2 - alpha) R / (2 alpha - 2) = 1/2.
  const double alpha = 1.5;
  const double R = 1.0;
  const double sqrt2 = std::sqrt(2.0);
  const double eps0 = (2.0 - alpha) * R / (2.0 * alpha - 2.0);

  lc::RunConfig rc;
  rc.measure = lc::RadialLevyMeasure::alpha_stable(1, alpha);
  rc.drift = lc::DriftSpec::step_profile(2.0 * sqrt2, R);
  rc.distance.epsilon = eps0;
  rc.distance.delta = eps0;
  rc.output.dir = out_dir;
  write_manifest(rc, "reproduce-example");

  const lc::DistanceFunction df = lc::build_distance(rc.measure, rc.drift, rc.distance);

  struct Row {
    const char* name;
    double got, expected, tol;
  };
  const Row rows[] = {
      {"eps0", eps0, 0.5, 0.0},
      {"C_eps", df.c_eps, sqrt2, 1e-12},
      {"C_delta", df.c_delta, 32.0 / 3.0, 1e-9},
      {"R0", df.r0, 0.0, 1e-9},
      {"R1", df.r1, 1.0, 1e-3},
      {"c1", df.c1, 0.5 * sqrt2, 1e-3},
      {"K", df.K, 1.0, 1e-12},
      {"a", df.a, 0.4583333333333333, 1e-3},
      {"c", df.c, 0.25 * sqrt2, 1e-3},
  };
  bool ok = true;
  lc::json out;
  for (const Row& r : rows) {
    const bool pass = std::fabs(r.got - r.expected) <= r.tol + 1e-15;
    ok = ok && pass;
    std::printf("%-8s got %.10g expected %.10g  %s\n", r.name, r.got, r.expected,
                pass ? "ok" : "MISMATCH");
    out[r.name] = {{"got", r.got}, {"expected", r.expected}, {"pass", pass}};
  }
  const bool floor_ok = df.c >= sqrt2 / 8.0;
  std::printf("%-8s got %.10g floor    %.10g  %s\n", "c_floor", df.c, sqrt2 / 8.0,
              floor_ok ? "ok" : "MISMATCH");
  out["c_floor"] = {{"got", df.c}, {"floor", sqrt2 / 8.0}, {"pass", floor_ok}};
  ok = ok && floor_ok;
  out["all_pass"] = ok;
  lc::write_json_file(out_dir + "/reproduce_example.json", out);
  return ok ? 0 : 3;
}

int cmd_kappa_oracle(const GlobalArgs& args, double r_min, double r_max, int n) {
  const lc::RunConfig rc = load_config(args);
  write_manifest(rc, "kappa-oracle");
  if (rc.measure.dimension != 1 || rc.drift.dimension != 1) {
    throw lc::ConfigError("kappa-oracle: profile validation is one-dimensional");
  }
  if (!rc.drift.has_field()) {
    throw lc::ConfigError("kappa-oracle: the configured drift has no vector field");
  }
  const auto b = [&](double x) {
    double out;
    rc.drift.field(std::span<const double>(&x, 1), std::span<double>(&out, 1));
    return out;
  };
  std::ostringstream csv;
  csv << "r,kappa_analytic,kappa_oracle\n";
  csv.precision(17);
  double max_err = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double r = r_min + (r_max - r_min) * static_cast<double>(i) / n;
    const double analytic = rc.drift.kappa(r);
    const double oracle = lc::kappa_oracle_1d(b, r, -12.0, 12.0, 200001);
    max_err = std::max(max_err, std::fabs(analytic - oracle));
    csv << r << ',' << analytic << ',' << oracle << "\n";
  }
  lc::write_text_file(rc.output.dir + "/kappa_oracle.csv", csv.str());
  std::printf("max |analytic - oracle| = %.3g over %d radii -> %s/kappa_oracle.csv\n",
              max_err, n, rc.output.dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mirror-coupling contraction toolkit for Levy-driven SDEs"};
  app.require_subcommand(1);

  GlobalArgs args;
  double rate_scale = 1.0;
  double kr_min = 0.01, kr_max = 10.0;
  int kr_n = 100;
  bool simulate_single = false;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", args.config_path, "TOML configuration file")->required();
    }
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "override the base seed");
    sub->add_option("--threads", args.threads, "worker threads for ensembles");
    sub->add_option("--k-convention", args.k_convention, "'proof' or 'statement'");
  };

  CLI::App* constants = app.add_subcommand("constants", "compute contraction constants");
  add_common(constants, true);
  CLI::App* build_dist =
      app.add_subcommand("build-distance", "constants plus the cost-table CSV");
  add_common(build_dist, true);
  CLI::App* simulate = app.add_subcommand("simulate", "run a coupled ensemble");
  add_common(simulate, true);
  simulate->add_flag("--single", simulate_single, "simulate the first marginal only");
  CLI::App* verify =
      app.add_subcommand("verify", "simulate and check the contraction envelopes");
  add_common(verify, true);
  verify->add_option("--rate-scale", rate_scale,
                     "scale the assembled rate before checking (sensitivity)");
  CLI::App* repro =
      app.add_subcommand("reproduce-example", "reproduce the alpha = 3/2 reference constants");
  add_common(repro, false);
  CLI::App* kor = app.add_subcommand("kappa-oracle", "validate a drift profile in d = 1");
  add_common(kor, true);
  kor->add_option("--r-min", kr_min, "smallest radius");
  kor->add_option("--r-max", kr_max, "largest radius");
  kor->add_option("--n", kr_n, "number of radii");

  CLI11_PARSE(app, argc, argv);

  try {
    if (constants->parsed()) return cmd_constants(args, false);
    if (build_dist->parsed()) return cmd_constants(args, true);
    if (simulate->parsed()) return cmd_simulate(args, simulate_single);
    if (verify->parsed()) return cmd_verify(args, rate_scale);
    if (repro->parsed()) return cmd_reproduce_example(args.out_dir);
    if (kor->parsed()) return cmd_kappa_oracle(args, kr_min, kr_max, kr_n);
  } catch (const lc::FeasibilityError& e) {
    std::fprintf(stderr, "feasibility error: %s\n", e.what());
    return 2;
  } catch (const lc::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
