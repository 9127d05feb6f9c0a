// Acceptance suite: end-to-end checks of the contraction pipeline at the
// tolerances the project commits to. One line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "levycouple/levycouple.hpp"

namespace lc = levycouple;

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

int g_failures = 0;

void run_criterion(int id, const char* label, double time_budget_s,
                   const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.note(std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_budget_s > 0.0 && secs > time_budget_s) {
    out.pass = false;
    out.note("runtime " + std::to_string(secs) + "s exceeds budget " +
             std::to_string(time_budget_s) + "s");
  }
  if (!out.pass) ++g_failures;
  std::printf("[%s] C%d %-38s (%.2fs)%s%s\n", out.pass ? "PASS" : "FAIL", id, label, secs,
              out.detail.empty() ? "" : " -- ", out.detail.c_str());
  std::fflush(stdout);
}

bool close_rel(double got, double want, double rel) {
  return std::fabs(got - want) <= rel * std::fabs(want);
}

bool close_abs(double got, double want, double abs) { return std::fabs(got - want) <= abs; }

const lc::RadialLevyMeasure kMeasure = lc::RadialLevyMeasure::alpha_stable(1, 1.5);

lc::DistanceOptions reference_options() {
  lc::DistanceOptions opts;
  opts.epsilon = 0.5;
  opts.delta = 0.5;
  opts.trunc.variance_budget_rel = 0.3;  // keeps the jump rate tractable
  return opts;
}

/// Simulation setup shared by criteria 3-6 and 9: d = 1 stable noise with
/// alpha = 3/2, b(x) = -x, started from (2, -2).
lc::SimConfig simulation_config(const lc::DistanceFunction& df) {
  lc::SimConfig cfg;
  cfg.measure = kMeasure;
  cfg.trunc.m = df.m;
  cfg.trunc.eta = df.eta;
  cfg.drift = lc::DriftSpec::linear(1, 1.0);
  cfg.time_step = 1e-3;
  cfg.base_seed = 20240517;
  cfg.initial.x0 = {2.0};
  cfg.initial.y0 = {-2.0};
  return cfg;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  // Constants for the simulated drift b(x) = -x (kappa == 1), reused by 3-6.
  lc::DistanceFunction df_linear;
  // Ensemble shared by criteria 4, 5 and 6.
  lc::EnsembleSummary horizon20;

  run_criterion(1, "constants reproduction (alpha = 3/2)", 1.0, [&](Outcome& out) {
    const lc::DriftSpec drift = lc::DriftSpec::step_profile(2.0 * kSqrt2, 1.0);
    const lc::DistanceFunction df = lc::build_distance(kMeasure, drift, reference_options());
    out.require(std::fabs(df.c_eps - kSqrt2) < 1e-14, "C_eps closed form");
    const lc::MarginalMeasure marg = lc::marginal_density(kMeasure, lc::kInf);
    const double c_eps_quad = 2.0 * marg.second_moment(0.0, 0.125);
    out.require(close_rel(c_eps_quad, kSqrt2, 1e-4), "C_eps quadrature 1e-4");
    out.require(close_rel(df.c_delta, 32.0 / 3.0, 1e-3), "C_delta = 32/3");
    const double eps0 = (2.0 - 1.5) * 1.0 / (2.0 * 1.5 - 2.0);
    out.require(eps0 == 0.5, "eps0 formula");
    out.require(df.r0 == 0.0, "R0 = 0");
    out.require(close_abs(df.r1, 1.0, 1e-3), "R1 = 1");
    out.require(close_abs(df.c1, 0.5 * kSqrt2, 1e-3), "c1 = sqrt2/2");
    out.require(df.K == 1.0, "K = 1");
    out.require(close_abs(df.c, 0.25 * kSqrt2, 1e-3), "c = sqrt2/4");
    out.require(df.c >= kSqrt2 / 8.0, "c above the conservative floor sqrt2/8");
    char buf[128];
    std::snprintf(buf, sizeof buf, "c = %.7g, a = %.7g, m = %.3g, eta = %.3g", df.c, df.a,
                  df.m, df.eta);
    out.note(buf);
  });

  run_criterion(2, "functional inequality on 2000 grid points", 5.0, [&](Outcome& out) {
    const lc::DriftSpec step = lc::DriftSpec::step_profile(2.0 * kSqrt2, 1.0);
    const lc::DistanceFunction df1 = lc::build_distance(kMeasure, step, reference_options());
    const auto rep1 =
        lc::verify_functional_inequality(df1, step.kappa_fn(), 10.0 * df1.r1, 2000);
    out.require(rep1.max_violation <= 1e-8,
                "step profile violation " + std::to_string(rep1.max_violation));

    const lc::DriftSpec dw = lc::DriftSpec::double_well();
    const lc::DistanceFunction df2 = lc::build_distance(kMeasure, dw, reference_options());
    out.require(dw.c_l == 1.0, "double-well C_L = 1");
    const auto rep2 = lc::verify_functional_inequality(df2, dw.kappa_fn(), 10.0 * df2.r1, 2000);
    out.require(rep2.max_violation <= 1e-8,
                "double-well violation " + std::to_string(rep2.max_violation));
  });

  df_linear = lc::build_distance(kMeasure, lc::DriftSpec::linear(1, 1.0), reference_options());

  run_criterion(3, "marginal law of the coupled pair (KS)", 120.0, [&](Outcome& out) {
    lc::SimConfig cfg = simulation_config(df_linear);
    cfg.horizon = 1.0;
    cfg.n_paths = 10000;
    cfg.snapshot_times = {1.0};
    const lc::EnsembleSummary coupled = lc::run_ensemble(cfg);
    lc::SimConfig ref = cfg;  // reference started from Y's initial point
    ref.initial.x0 = cfg.initial.y0;
    const lc::EnsembleSummary single = lc::run_single_ensemble(ref);
    const auto ys = lc::snapshot_positions(coupled, 0, true);
    const auto xs = lc::snapshot_positions(single, 0, false);
    const double d = lc::ks_statistic_two_sample(ys, xs);
    out.require(d < 0.025, "KS statistic " + std::to_string(d));
    out.note("KS = " + std::to_string(d));
  });

  run_criterion(4, "exponential contraction envelope and rate", 300.0, [&](Outcome& out) {
    lc::SimConfig cfg = simulation_config(df_linear);
    cfg.horizon = 20.0;
    cfg.n_paths = 10000;
    cfg.snapshot_times = {0.5, 1.0, 2.0, 4.0};
    cfg.stop_coupled_after_snapshots = true;
    horizon20 = lc::run_ensemble(cfg);
    const double w_f_init = df_linear.f_at(4.0);
    const lc::ContractionReport rep =
        lc::build_contraction_report(horizon20, df_linear, w_f_init);
    for (std::size_t k = 0; k < rep.ef_curve.size(); ++k) {
      out.require(rep.ef_curve[k].mean <= rep.ef_envelope[k],
                  "envelope at t = " + std::to_string(rep.time_grid[k]));
    }
    out.require(rep.fit.rate >= 0.9 * df_linear.c,
                "fitted rate " + std::to_string(rep.fit.rate) + " vs 0.9c");
    char buf[96];
    std::snprintf(buf, sizeof buf, "rate %.4g vs c %.4g", rep.fit.rate, df_linear.c);
    out.note(buf);
  });

  run_criterion(5, "coupling success by t = 20", 60.0, [&](Outcome& out) {
    if (horizon20.paths.empty()) {
      out.require(false, "horizon-20 ensemble missing");
      return;
    }
    std::size_t coupled = 0;
    for (const auto& p : horizon20.paths) {
      if (p.coupling_time <= 20.0) ++coupled;
    }
    const double frac = static_cast<double>(coupled) / static_cast<double>(horizon20.n_paths);
    out.require(frac >= 0.99, "P(T <= 20) = " + std::to_string(frac));
    out.note("P(T <= 20) = " + std::to_string(frac));
  });

  run_criterion(6, "corollary envelopes at t in {1,2,4}", 60.0, [&](Outcome& out) {
    if (horizon20.paths.empty()) {
      out.require(false, "horizon-20 ensemble missing");
      return;
    }
    const double w_f_init = df_linear.f_at(4.0);
    const auto checks = lc::check_corollaries(horizon20, df_linear, w_f_init, 0.2);
    for (const auto& chk : checks) {
      if (chk.t < 1.0) continue;
      out.require(chk.tv_pass, "TV surrogate at t = " + std::to_string(chk.t));
      out.require(chk.w1_pass, "W1 envelope at t = " + std::to_string(chk.t));
    }
  });

  run_criterion(7, "assumption feasibility on shell supports", 30.0, [&](Outcome& out) {
    const auto shell25 = lc::RadialLevyMeasure::shell_uniform(1.0, 2.5);
    lc::DistanceOptions opts;
    opts.epsilon = 0.7;
    opts.delta = 0.7;
    bool threw = false;
    try {
      (void)lc::build_distance(shell25, lc::DriftSpec::linear(1, 2.0), opts);
    } catch (const lc::FeasibilityError& e) {
      threw = true;
      out.note(std::string("beta=2.5 rejected: ") + e.what());
    }
    out.require(threw, "beta = 2.5 must be infeasible");

    const auto shell4 = lc::RadialLevyMeasure::shell_uniform(1.0, 4.0);
    lc::DistanceOptions opts4;
    opts4.epsilon = 1.2;
    opts4.delta = 1.2;
    const lc::DistanceFunction df =
        lc::build_distance(shell4, lc::DriftSpec::linear(1, 2.0), opts4);
    out.require(df.c_delta > 0.0, "beta = 4 overlap constant positive");
    out.require(df.c_eps > 0.0, "beta = 4 C_eps positive");
    out.require(df.c > 0.0, "beta = 4 contraction rate positive");
  });

  run_criterion(8, "oracle equivalences", 60.0, [&](Outcome& out) {
    // profile oracle vs analytic profiles on 100 radii
    const lc::DriftSpec lin = lc::DriftSpec::linear(1, 2.0);
    const lc::DriftSpec dw = lc::DriftSpec::double_well();
    const auto b_lin = [&](double x) {
      double o;
      lin.field(std::span<const double>(&x, 1), std::span<double>(&o, 1));
      return o;
    };
    const auto b_dw = [&](double x) {
      double o;
      dw.field(std::span<const double>(&x, 1), std::span<double>(&o, 1));
      return o;
    };
    double max_err = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double r = 0.05 * i;
      max_err = std::max(max_err,
                         std::fabs(lc::kappa_oracle_1d(b_lin, r, -12.0, 12.0, 101) - 2.0));
      max_err = std::max(max_err, std::fabs(lc::kappa_oracle_1d(b_dw, r, -12.0, 12.0, 200001) -
                                            dw.kappa(r)));
    }
    out.require(max_err < 1e-6, "kappa oracle max err " + std::to_string(max_err));

    // sorted vs assignment transport cost on the line
    lc::RngStream rng(515);
    std::vector<double> a(200), b(200);
    std::vector<std::vector<double>> av(200), bv(200);
    for (int i = 0; i < 200; ++i) {
      a[i] = 3.0 * rng.u01() - 1.0;
      b[i] = 2.0 * rng.u01();
      av[i] = {a[i]};
      bv[i] = {b[i]};
    }
    const double sorted = lc::empirical_w1_1d(a, b);
    const double assigned = lc::empirical_w1_assignment(av, bv);
    out.require(std::fabs(sorted - assigned) <= 1e-12, "sorted vs assignment W1");

    // quadrature vs closed forms for the stable measure
    const lc::MarginalMeasure marg = lc::marginal_density(kMeasure, lc::kInf);
    const double c_eps_quad = 2.0 * marg.second_moment(0.0, 0.125);
    out.require(close_rel(c_eps_quad, kSqrt2, 1e-6), "C_eps quadrature 1e-6");
    const double ov_quad = lc::overlap_at(kMeasure, 0.5, 1.0, {}, /*force_quadrature=*/true);
    out.require(close_rel(ov_quad, 28.0 / 3.0, 1e-6), "overlap quadrature 1e-6");
  });

  run_criterion(9, "bitwise determinism across thread counts", 60.0, [&](Outcome& out) {
    lc::SimConfig cfg = simulation_config(df_linear);
    cfg.horizon = 2.0;
    cfg.n_paths = 500;
    cfg.snapshot_times = {1.0, 2.0};
    const std::string one = lc::ensemble_to_json(lc::run_ensemble(cfg, 1)).dump();
    const std::string four = lc::ensemble_to_json(lc::run_ensemble(cfg, 4)).dump();
    const std::string sixteen = lc::ensemble_to_json(lc::run_ensemble(cfg, 16)).dump();
    out.require(one == four, "1 vs 4 threads");
    out.require(one == sixteen, "1 vs 16 threads");
  });

  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
