#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/drift.hpp"
#include "levycouple/levy_measure.hpp"
#include "levycouple/quadrature.hpp"

namespace levycouple {

enum class KConvention { Proof, Statement };

struct DistanceOptions {
  double epsilon = 0.5;
  double delta = 0.5;
  KConvention k_convention = KConvention::Proof;
  int grid_points = 4097;             // starting table resolution
  double stabilization_rel_tol = 1e-8;
  int max_refinements = 7;
  double span_factor = 10.0;          // tables cover at least span_factor * R1
  double r_max = 0.0;                 // kappa search bound; 0 selects 100 * max(1, R0)
  QuadratureOptions quad{};
  TruncationOptions trunc{};
};

struct ContractionConstants {
  double K = 1.0;
  double a = 0.0;
  double c = 0.0;
};

/// The concave transport cost f = f1 + a 1_(0,inf) together with every
/// constant of the contraction estimate. Immutable once built.
struct DistanceFunction {
  double epsilon = 0.0, delta = 0.0;
  double m = 0.0, eta = 0.0;
  double c_eps = 0.0;
  double c_delta = 0.0;    // untruncated overlap constant
  double c_delta_m = 0.0;  // overlap constant truncated at m
  double r0 = 0.0, r1 = 0.0;
  double c1 = 0.0;
  double phi_r0 = 1.0;
  double c_l = 0.0;
  KConvention k_convention = KConvention::Proof;
  double K = 1.0, a = 0.0, c = 0.0;
  double prefactor_tv = 0.0;  // 2 / a
  double prefactor_w1 = 0.0;  // 2 / phi(R0)

  // Tables on a uniform grid over [0, grid_max()].
  double step = 0.0;
  std::vector<double> h_bar, phi, Phi, g, f1, f1pp;  // f1pp holds the left value at R1
  double refine_residual = 0.0;  // last relative change seen by the ladder
  std::size_t table_points = 0;

  double grid_max() const { return step * static_cast<double>(f1.size() - 1); }

  double interp(const std::vector<double>& tab, double r) const {
    if (r <= 0.0) return tab.front();
    const double u = r / step;
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= tab.size()) return tab.back();
    const double t = u - static_cast<double>(i);
    return tab[i] + t * (tab[i + 1] - tab[i]);
  }

  double phi_at(double r) const { return r >= grid_max() ? phi.back() : interp(phi, r); }
  double Phi_at(double r) const {
    if (r <= grid_max()) return interp(Phi, r);
    return Phi.back() + (r - grid_max()) * phi.back();
  }
  double g_at(double r) const { return r >= r1 ? 0.5 : interp(g, r); }

  double f1_at(double r) const {
    if (r < 0.0) throw std::domain_error("f1_at: negative separation");
    if (r <= grid_max()) return interp(f1, r);
    return f1.back() + (r - grid_max()) * 0.5 * phi_r0;  // affine extension
  }

  double f1_prime_at(double r) const { return phi_at(r) * g_at(r); }

  double f1pp_at(double r) const {
    if (r >= r1 || r >= grid_max()) return 0.0;
    return interp(f1pp, r);
  }

  /// sup of f1'' over the window (r - eps, r), taken over a closed sub-grid
  /// of 1000 steps.
  double fbar_eps(double r) const {
    const double lo = std::max(0.0, r - epsilon);
    double sup = -kInf;
    constexpr int kSub = 1000;
    for (int k = 0; k <= kSub; ++k) {
      const double x = lo + (r - lo) * static_cast<double>(k) / kSub;
      sup = std::max(sup, f1pp_at(x));
    }
    return sup;
  }

  double f_at(double r) const {
    if (r < 0.0) throw std::domain_error("f_at: negative separation");
    if (r == 0.0) return 0.0;
    return f1_at(r) + a;
  }
};

/// h_bar(r) = sup over t in (r, r + eps) of t kappa^-(t), from samples at
/// resolution eps/1000 (sliding-window maximum) plus exact evaluations at
/// both window endpoints. The endpoint terms matter: without them the
/// quantization error is first order in the sample spacing whenever the
/// supremum sits at a window edge.
inline std::vector<double> build_h_bar(const std::function<double(double)>& kappa, double eps,
                                       std::span<const double> grid) {
  const auto w_at = [&kappa](double t) {
    const double k = kappa(t);
    return k < 0.0 ? -t * k : 0.0;
  };
  const double fine_step = eps / 1000.0;
  const double top = grid.back() + eps;
  const auto n_fine = static_cast<std::size_t>(std::ceil(top / fine_step)) + 2;
  std::vector<double> w(n_fine);
  for (std::size_t j = 0; j < n_fine; ++j) w[j] = w_at(fine_step * static_cast<double>(j));
  std::vector<double> out(grid.size());
  std::deque<std::size_t> window;  // indices with decreasing w
  std::size_t lo = 0, hi = 0;      // fine indices currently inside the window
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    // strictly interior samples only; the open-interval endpoints are
    // evaluated exactly below
    const auto want_lo = static_cast<std::size_t>(std::floor(r / fine_step)) + 1;
    const auto hi_edge = static_cast<std::size_t>(std::ceil((r + eps) / fine_step));
    const std::size_t want_hi = std::min(n_fine - 1, hi_edge > 0 ? hi_edge - 1 : 0);
    while (hi <= want_hi) {
      while (!window.empty() && w[window.back()] <= w[hi]) window.pop_back();
      window.push_back(hi);
      ++hi;
    }
    while (lo < want_lo) {
      if (!window.empty() && window.front() == lo) window.pop_front();
      ++lo;
    }
    const double interior = window.empty() ? 0.0 : w[window.front()];
    out[i] = std::max({interior, w_at(r), w_at(r + eps)});
  }
  return out;
}

/// phi = exp(-cumulative(h_bar)/C_eps), Phi = cumulative(phi). Trapezoid
/// cumulatives keep phi nonincreasing and Phi strictly increasing by
/// construction; accuracy comes from the refinement ladder.
inline std::pair<std::vector<double>, std::vector<double>> build_phi_Phi(
    std::span<const double> grid, std::span<const double> h_bar, double c_eps) {
  if (!(c_eps > 0.0)) {
    throw FeasibilityError(Assumption::SmallJumpActivity,
                           "C_eps must be positive to build the distance function");
  }
  std::vector<double> scaled(h_bar.size());
  for (std::size_t i = 0; i < h_bar.size(); ++i) scaled[i] = h_bar[i] / c_eps;
  std::vector<double> inner = cumulative_trapezoid(grid, scaled);
  if (inner.back() > 700.0) {
    throw std::domain_error(
        "build_phi_Phi: integral of h_bar overflows exp; kappa is too negative for this "
        "C_eps");
  }
  std::vector<double> phi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) phi[i] = std::exp(-inner[i]);
  std::vector<double> Phi = cumulative_trapezoid(grid, phi);
  return {std::move(phi), std::move(Phi)};
}

struct GF1Result {
  std::vector<double> g, f1, f1pp;
  double c1 = 0.0;
};

/// g per the closed formula (constant 1/2 past R1), f1 = int phi g, the rate
/// constant c1 = C_eps / (2 int_0^{R1} Phi(t+eps)/phi(t) dt), and the
/// analytic one-sided second derivative of f1.
inline GF1Result build_g_f1_c1(std::span<const double> grid, std::span<const double> phi,
                               std::span<const double> Phi, std::span<const double> h_bar,
                               double eps, double r1, double c_eps) {
  const std::size_t n = grid.size();
  const double step = grid[1] - grid[0];
  const auto interp = [&](std::span<const double> tab, double r) {
    if (r <= 0.0) return tab.front();
    const double u = r / step;
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= tab.size()) return tab.back();
    const double t = u - static_cast<double>(i);
    return tab[i] + t * (tab[i + 1] - tab[i]);
  };

  // I(t) = Phi(t + eps) / phi(t), integrated up to R1 (partial last cell).
  std::vector<double> ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid[i];
    const double num = t + eps <= grid.back()
                           ? interp(Phi, t + eps)
                           : Phi.back() + (t + eps - grid.back()) * phi.back();
    ratio[i] = num / phi[i];
  }
  std::vector<double> cum = cumulative_trapezoid(grid, ratio);
  const auto j1 = static_cast<std::size_t>(r1 / step);
  double k_r1;
  if (j1 + 1 >= n) {
    k_r1 = cum.back();
  } else {
    const double r_at = interp(std::span<const double>(ratio), r1);
    k_r1 = cum[j1] + 0.5 * (ratio[j1] + r_at) * (r1 - grid[j1]);
  }
  if (!(k_r1 > 0.0)) throw std::domain_error("build_g_f1_c1: degenerate g normalizer");
  const double c1 = 0.5 * c_eps / k_r1;

  GF1Result out;
  out.c1 = c1;
  out.g.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.g[i] = grid[i] >= r1 ? 0.5 : 1.0 - 0.5 * cum[i] / k_r1;
  }
  // Trapezoid for f1: its increments are means of the nonincreasing
  // integrand phi*g, which keeps the tabulated f1 exactly concave.
  std::vector<double> fg(n);
  for (std::size_t i = 0; i < n; ++i) fg[i] = phi[i] * out.g[i];
  out.f1 = cumulative_trapezoid(grid, fg);

  // f1'' = phi' g + phi g' with phi' = -h_bar phi / C_eps and
  // g' = -(c1/C_eps) Phi(.+eps)/phi below R1, zero above.
  out.f1pp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (grid[i] >= r1) {
      out.f1pp[i] = 0.0;
    } else {
      out.f1pp[i] = -(h_bar[i] * phi[i] * out.g[i] + c1 * ratio[i] * phi[i]) / c_eps;
    }
  }
  return out;
}

/// K, a and the contraction rate c from the assembled ingredients.
/// The proof convention uses the /4 split, the statement convention /2;
/// they agree whenever C_L = 0.
inline ContractionConstants assemble_constants(double f1_delta, double delta, double c_delta,
                                               double c_l, double c1,
                                               KConvention conv = KConvention::Proof) {
  if (!(c_delta > 0.0)) {
    throw FeasibilityError(Assumption::Overlap,
                           "overlap constant is zero; contraction constants are undefined");
  }
  if (!(f1_delta > 0.0)) throw std::domain_error("assemble_constants: f1(delta) must be positive");
  const double divisor = conv == KConvention::Proof ? 4.0 : 2.0;
  ContractionConstants out;
  out.K = 1.0 + c_l * delta / (c_delta * f1_delta / divisor);
  out.a = out.K * f1_delta;
  out.c = std::min(c1 / (2.0 * out.K), 0.25 * c_delta);
  return out;
}

struct InequalityReport {
  double max_violation = -kInf;
  double argmax_r = 0.0;
  int points = 0;
  double slack = 1e-8;
  bool pass = false;
};

/// Grid check of the drift/cost balance
///   -f1'(r) kappa(r) r + C_eps fbar_eps(r) + c1 f1(r) <= slack
/// on (delta, r_max].
inline InequalityReport verify_functional_inequality(const DistanceFunction& df,
                                                     const std::function<double(double)>& kappa,
                                                     double r_max, int points = 2000,
                                                     double slack = 1e-8) {
  InequalityReport rep;
  rep.points = points;
  rep.slack = slack;
  for (int k = 1; k <= points; ++k) {
    const double r = df.delta + (r_max - df.delta) * static_cast<double>(k) / points;
    const double lhs =
        -df.f1_prime_at(r) * kappa(r) * r + df.c_eps * df.fbar_eps(r) + df.c1 * df.f1_at(r);
    if (lhs > rep.max_violation) {
      rep.max_violation = lhs;
      rep.argmax_r = r;
    }
  }
  rep.pass = rep.max_violation <= slack;
  return rep;
}

namespace detail {

struct ProfileTables {
  std::vector<double> grid, h_bar, phi, Phi, g, f1, f1pp;
  double c1 = 0.0;
  double phi_r0 = 1.0;
};

inline ProfileTables build_tables(const std::function<double(double)>& kappa, double eps,
                                  double r0, double r1, double c_eps, double span,
                                  std::size_t n) {
  ProfileTables t;
  t.grid.resize(n);
  const double step = span / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t.grid[i] = step * static_cast<double>(i);
  t.h_bar = build_h_bar(kappa, eps, t.grid);
  auto [phi, Phi] = build_phi_Phi(t.grid, t.h_bar, c_eps);
  t.phi = std::move(phi);
  t.Phi = std::move(Phi);
  auto gf = build_g_f1_c1(t.grid, t.phi, t.Phi, t.h_bar, eps, r1, c_eps);
  t.g = std::move(gf.g);
  t.f1 = std::move(gf.f1);
  t.f1pp = std::move(gf.f1pp);
  t.c1 = gf.c1;
  // phi is constant past R0; read it off at the first grid point beyond.
  const auto i0 = std::min(n - 1, static_cast<std::size_t>(std::ceil(r0 / step)));
  t.phi_r0 = t.phi[i0];
  return t;
}

}  // namespace detail

/// Distance function from a contraction profile plus externally supplied
/// measure constants. Refines the table grid until c1, phi(R0) and f1(delta)
/// stabilize.
inline DistanceFunction build_distance_from_profile(
    const std::function<double(double)>& kappa, double c_l, double c_eps, double c_delta,
    double c_delta_m, const TruncationParams& trunc, const DistanceOptions& opts) {
  if (!(opts.epsilon > 0.0) || !(opts.delta >= opts.epsilon)) {
    throw ConfigError("distance: need 0 < epsilon <= delta");
  }
  if (!(c_eps > 0.0)) {
    throw FeasibilityError(Assumption::SmallJumpActivity,
                           "C_eps = 0; no usable small-jump second moment below eps/4");
  }

  const double r_pre = opts.r_max > 0.0 ? opts.r_max : 100.0;
  const double r0 = radius_R0(kappa, r_pre);
  const double r_max = opts.r_max > 0.0 ? opts.r_max : 100.0 * std::max(1.0, r0);
  const double r1 = radius_R1(kappa, r0, opts.epsilon, c_eps, r_max);

  const double span = std::max({opts.span_factor * r1, r1 + 2.0 * opts.epsilon,
                                opts.delta + 2.0 * opts.epsilon, 1.0});
  std::size_t n = static_cast<std::size_t>(std::max(257, opts.grid_points));
  detail::ProfileTables tables = detail::build_tables(kappa, opts.epsilon, r0, r1, c_eps, span, n);
  const auto f1_delta_of = [&](const detail::ProfileTables& t) {
    const double step = t.grid[1] - t.grid[0];
    const double u = opts.delta / step;
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= t.f1.size()) return t.f1.back();
    return t.f1[i] + (u - static_cast<double>(i)) * (t.f1[i + 1] - t.f1[i]);
  };
  double residual = kInf;
  for (int pass = 0; pass < opts.max_refinements; ++pass) {
    detail::ProfileTables next =
        detail::build_tables(kappa, opts.epsilon, r0, r1, c_eps, span, 2 * (n - 1) + 1);
    const double dc1 = std::fabs(next.c1 - tables.c1) / std::max(1e-300, std::fabs(next.c1));
    const double dphi = std::fabs(next.phi_r0 - tables.phi_r0) / next.phi_r0;
    const double df1 = std::fabs(f1_delta_of(next) - f1_delta_of(tables)) /
                       std::max(1e-300, f1_delta_of(next));
    n = 2 * (n - 1) + 1;
    tables = std::move(next);
    residual = std::max({dc1, dphi, df1});
    if (residual < opts.stabilization_rel_tol) break;
  }

  log_info("distance build: R0 = " + std::to_string(r0) + ", R1 = " + std::to_string(r1) +
           ", c1 = " + std::to_string(tables.c1) + ", tables at " + std::to_string(n) +
           " points (residual " + std::to_string(residual) + ")");

  DistanceFunction df;
  df.refine_residual = residual;
  df.table_points = n;
  df.epsilon = opts.epsilon;
  df.delta = opts.delta;
  df.m = trunc.m;
  df.eta = trunc.eta;
  df.c_eps = c_eps;
  df.c_delta = c_delta;
  df.c_delta_m = c_delta_m;
  df.r0 = r0;
  df.r1 = r1;
  df.c1 = tables.c1;
  df.phi_r0 = tables.phi_r0;
  df.c_l = c_l;
  df.k_convention = opts.k_convention;
  df.step = tables.grid[1] - tables.grid[0];
  df.h_bar = std::move(tables.h_bar);
  df.phi = std::move(tables.phi);
  df.Phi = std::move(tables.Phi);
  df.g = std::move(tables.g);
  df.f1 = std::move(tables.f1);
  df.f1pp = std::move(tables.f1pp);

  const double f1_delta = df.f1_at(opts.delta);
  const ContractionConstants cc =
      assemble_constants(f1_delta, opts.delta, c_delta, c_l, df.c1, opts.k_convention);
  df.K = cc.K;
  df.a = cc.a;
  df.c = cc.c;
  df.prefactor_tv = 2.0 / df.a;
  df.prefactor_w1 = 2.0 / df.phi_r0;
  return df;
}

/// Full pipeline: measure constants, truncation selection, then the profile
/// construction against the drift's kappa.
inline DistanceFunction build_distance(const RadialLevyMeasure& measure, const DriftSpec& drift,
                                       const DistanceOptions& opts) {
  const double c_eps = c_epsilon(measure, opts.epsilon, opts.quad);
  if (!(c_eps > 0.0)) {
    throw FeasibilityError(Assumption::SmallJumpActivity,
                           "C_eps = 0 for eps = " + std::to_string(opts.epsilon) +
                               "; all small-jump mass sits above eps/4");
  }
  OverlapOptions oopts = opts.trunc.overlap;
  const double c_delta = overlap_infimum(measure, opts.delta, kInf, oopts);
  if (!(c_delta > 0.0)) {
    throw FeasibilityError(Assumption::Overlap,
                           "overlap constant vanishes for delta = " +
                               std::to_string(opts.delta));
  }
  TruncationOptions topts = opts.trunc;
  const TruncationParams trunc = select_truncation(measure, opts.epsilon, opts.delta, topts);
  const double c_delta_m = overlap_infimum(measure, opts.delta, trunc.m, oopts);
  return build_distance_from_profile(drift.kappa_fn(), drift.c_l, c_eps, c_delta, c_delta_m,
                                     trunc, opts);
}

struct ScanPoint {
  double eps_delta = 0.0;
  double c = 0.0;
  bool feasible = false;
};

/// 1D scan over eps = delta maximizing the contraction rate. Exploratory
/// only; infeasible candidates are kept in the table with feasible = false.
inline std::vector<ScanPoint> scan_epsilon_delta(const RadialLevyMeasure& measure,
                                                 const DriftSpec& drift, double lo, double hi,
                                                 int n, DistanceOptions opts) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw ConfigError("scan_epsilon_delta: need 0 < lo < hi and n >= 2");
  }
  std::vector<ScanPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ScanPoint p;
    p.eps_delta = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    opts.epsilon = p.eps_delta;
    opts.delta = p.eps_delta;
    try {
      const DistanceFunction df = build_distance(measure, drift, opts);
      p.c = df.c;
      p.feasible = true;
    } catch (const FeasibilityError&) {
      p.c = 0.0;
      p.feasible = false;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace levycouple
