#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/coupling.hpp"
#include "levycouple/distance.hpp"
#include "levycouple/quadrature.hpp"

namespace levycouple {

struct DecayPoint {
  double t = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

namespace detail {

inline std::pair<double, double> mean_and_stderr(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean_and_stderr: empty sample");
  const double n = static_cast<double>(v.size());
  const double mean = pairwise_sum(v) / n;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = v.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace detail

/// Values of |Z| at snapshot index k over paths that finished cleanly.
inline std::vector<double> snapshot_z_norms(const EnsembleSummary& ens, std::size_t k) {
  std::vector<double> out;
  out.reserve(ens.paths.size());
  for (const auto& p : ens.paths) {
    if (p.blown_up || k >= p.z_norm_at.size()) continue;
    out.push_back(p.z_norm_at[k]);
  }
  return out;
}

/// Scalar positions at snapshot index k (d = 1 only), first or second marginal.
inline std::vector<double> snapshot_positions(const EnsembleSummary& ens, std::size_t k,
                                              bool second_marginal) {
  if (ens.dimension != 1) {
    throw std::invalid_argument("snapshot_positions: scalar extraction needs d = 1");
  }
  std::vector<double> out;
  out.reserve(ens.paths.size());
  for (const auto& p : ens.paths) {
    const auto& src = second_marginal ? p.y_at : p.x_at;
    if (p.blown_up || k >= src.size()) continue;
    out.push_back(src[k]);
  }
  return out;
}

inline double uncoupled_fraction(const EnsembleSummary& ens, double t) {
  std::size_t total = 0, uncoupled = 0;
  for (const auto& p : ens.paths) {
    if (p.blown_up) continue;
    ++total;
    if (!(p.coupling_time <= t)) ++uncoupled;
  }
  if (total == 0) throw std::invalid_argument("uncoupled_fraction: no usable paths");
  return static_cast<double>(uncoupled) / static_cast<double>(total);
}

/// Monte Carlo curve of E f(|Z_t|) over the ensemble's snapshot grid.
inline std::vector<DecayPoint> ef_decay_curve(const EnsembleSummary& ens,
                                              const DistanceFunction& df) {
  if (ens.paths.empty()) throw std::invalid_argument("ef_decay_curve: empty ensemble");
  std::vector<DecayPoint> out;
  out.reserve(ens.snapshot_times.size());
  for (std::size_t k = 0; k < ens.snapshot_times.size(); ++k) {
    std::vector<double> vals;
    vals.reserve(ens.paths.size());
    for (const auto& p : ens.paths) {
      if (p.blown_up || k >= p.z_norm_at.size()) continue;
      vals.push_back(df.f_at(p.z_norm_at[k]));
    }
    if (vals.empty()) throw std::invalid_argument("ef_decay_curve: no usable paths");
    const auto [mean, se] = detail::mean_and_stderr(vals);
    out.push_back({ens.snapshot_times[k], mean, se, vals.size()});
  }
  return out;
}

struct RateFit {
  double rate = 0.0;       // decay rate (positive for a decaying curve)
  double intercept = 0.0;  // fitted value at t = 0
  double residual = 0.0;   // rms residual of log values
  std::size_t points_used = 0;
};

/// Log-linear least squares on the strictly positive part of the curve,
/// dropping points whose relative standard error exceeds the cutoff.
inline RateFit fit_rate(std::span<const DecayPoint> curve, double max_rel_stderr = 0.25) {
  std::vector<double> ts, logs;
  for (const auto& p : curve) {
    if (!(p.mean > 0.0)) continue;
    if (p.stderr_ > 0.0 && p.stderr_ / p.mean > max_rel_stderr) continue;
    ts.push_back(p.t);
    logs.push_back(std::log(p.mean));
  }
  if (ts.size() < 3) {
    throw std::invalid_argument("fit_rate: need >= 3 usable positive points");
  }
  const double n = static_cast<double>(ts.size());
  double st = 0.0, sl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += logs[i];
  }
  const double tbar = st / n, lbar = sl / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxx += (ts[i] - tbar) * (ts[i] - tbar);
    sxy += (ts[i] - tbar) * (logs[i] - lbar);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: degenerate time grid");
  const double slope = sxy / sxx;
  RateFit fit;
  fit.rate = -slope;
  fit.intercept = std::exp(lbar - slope * tbar);
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = logs[i] - (lbar + slope * (ts[i] - tbar));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.points_used = ts.size();
  return fit;
}

/// Sorted-sample (quantile coupling) W1 in d = 1; optimal on the line.
inline double empirical_w1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("empirical_w1_1d: need equal nonempty sample sizes");
  }
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> diffs(sa.size());
  for (std::size_t i = 0; i < sa.size(); ++i) diffs[i] = std::fabs(sa[i] - sb[i]);
  return pairwise_sum(diffs) / static_cast<double>(sa.size());
}

/// W1 between two empirical measures on the line with arbitrary sizes:
/// integral of |F_a - F_b| over the merged support.
inline double empirical_w1_1d_general(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("empirical_w1_1d_general: empty sample");
  }
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double w1 = 0.0;
  std::size_t ia = 0, ib = 0;
  double prev = std::min(sa[0], sb[0]);
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  while (ia < sa.size() || ib < sb.size()) {
    const double xa = ia < sa.size() ? sa[ia] : kInf;
    const double xb = ib < sb.size() ? sb[ib] : kInf;
    const double x = std::min(xa, xb);
    w1 += std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) * (x - prev);
    prev = x;
    while (ia < sa.size() && sa[ia] == x) ++ia;
    while (ib < sb.size() && sb[ib] == x) ++ib;
  }
  return w1;
}

/// Exact minimum-cost perfect matching (shortest augmenting paths with
/// potentials, O(n^3)). Intended for n <= 2000.
inline double min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) throw std::invalid_argument("min_cost_assignment: empty cost matrix");
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
  return total;
}

/// Assignment-based W1 for point clouds in R^d (Euclidean cost / n).
inline double empirical_w1_assignment(const std::vector<std::vector<double>>& a,
                                      const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("empirical_w1_assignment: need equal nonempty sizes");
  }
  if (a.size() > 2000) {
    throw std::invalid_argument("empirical_w1_assignment: n > 2000 not supported");
  }
  const std::size_t n = a.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a[i].size(); ++k) {
        s += (a[i][k] - b[j][k]) * (a[i][k] - b[j][k]);
      }
      cost[i][j] = std::sqrt(s);
    }
  }
  return min_cost_assignment(cost) / static_cast<double>(n);
}

inline double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks two-sample: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  while (ia < sa.size() && ib < sb.size()) {
    const double x = std::min(sa[ia], sb[ib]);
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return d;
}

template <typename Cdf>
inline double ks_statistic_one_sample(std::span<const double> samples, const Cdf& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks one-sample: empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  return d;
}

/// Asymptotic Kolmogorov critical value; pass m = 0 for the one-sample case.
inline double ks_critical_value(double alpha, std::size_t n, std::size_t m = 0) {
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  if (m == 0) return c / std::sqrt(static_cast<double>(n));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

struct CorollaryCheck {
  double t = 0.0;
  double tv_lhs = 0.0, tv_rhs = 0.0;    // 2 P(X != Y)  vs  (2/a) e^{-ct} W_f
  double w1_lhs = 0.0, w1_rhs = 0.0;    // empirical W1 vs (2/phi(R0)) e^{-ct} W_f
  bool tv_pass = false, w1_pass = false;
};

/// Total-variation and W1 envelope checks against the coupled ensemble.
/// w_f_init must be the exact transport cost of the initial laws (for a
/// fixed starting pair it is f(|x0 - y0|)).
inline std::vector<CorollaryCheck> check_corollaries(const EnsembleSummary& ens,
                                                     const DistanceFunction& df,
                                                     double w_f_init, double tol = 0.2) {
  std::vector<CorollaryCheck> out;
  for (std::size_t k = 0; k < ens.snapshot_times.size(); ++k) {
    CorollaryCheck chk;
    chk.t = ens.snapshot_times[k];
    const double decay = std::exp(-df.c * chk.t) * w_f_init;
    chk.tv_lhs = 2.0 * uncoupled_fraction(ens, chk.t);
    chk.tv_rhs = df.prefactor_tv * decay * (1.0 + tol);
    chk.tv_pass = chk.tv_lhs <= chk.tv_rhs;
    if (ens.dimension == 1) {
      const std::vector<double> xs = snapshot_positions(ens, k, false);
      const std::vector<double> ys = snapshot_positions(ens, k, true);
      chk.w1_lhs = empirical_w1_1d(xs, ys);
    } else {
      std::vector<double> zs = snapshot_z_norms(ens, k);
      chk.w1_lhs = pairwise_sum(zs) / static_cast<double>(zs.size());  // coupled bound
    }
    chk.w1_rhs = df.prefactor_w1 * decay * (1.0 + tol);
    chk.w1_pass = chk.w1_lhs <= chk.w1_rhs;
    out.push_back(chk);
  }
  return out;
}

struct ContractionReport {
  std::vector<double> time_grid;
  std::vector<DecayPoint> ef_curve;
  std::vector<double> ef_envelope;          // (1+tol) e^{-ct} f(|z0|)
  std::vector<double> uncoupled;
  std::vector<CorollaryCheck> corollaries;
  RateFit fit;
  double c = 0.0, a = 0.0, phi_r0 = 1.0;
  double w_f_init = 0.0;
  double envelope_tol = 0.1, corollary_tol = 0.2, rate_fraction = 0.9;
  bool contraction_pass = false;
  bool rate_pass = false;
  bool corollaries_pass = false;
  double coupled_fraction_at_horizon = 0.0;
  bool all_pass() const { return contraction_pass && rate_pass && corollaries_pass; }
};

struct ReportOptions {
  double envelope_tol = 0.1;
  double corollary_tol = 0.2;
  double rate_fraction = 0.9;
};

inline ContractionReport build_contraction_report(const EnsembleSummary& ens,
                                                  const DistanceFunction& df, double w_f_init,
                                                  const ReportOptions& opts = {}) {
  ContractionReport rep;
  rep.time_grid = ens.snapshot_times;
  rep.ef_curve = ef_decay_curve(ens, df);
  rep.c = df.c;
  rep.a = df.a;
  rep.phi_r0 = df.phi_r0;
  rep.w_f_init = w_f_init;
  rep.envelope_tol = opts.envelope_tol;
  rep.corollary_tol = opts.corollary_tol;
  rep.rate_fraction = opts.rate_fraction;

  rep.contraction_pass = true;
  for (const auto& p : rep.ef_curve) {
    const double env = (1.0 + opts.envelope_tol) * std::exp(-df.c * p.t) * w_f_init;
    rep.ef_envelope.push_back(env);
    if (p.mean > env) rep.contraction_pass = false;
  }
  for (double t : ens.snapshot_times) rep.uncoupled.push_back(uncoupled_fraction(ens, t));

  rep.fit = fit_rate(rep.ef_curve);
  rep.rate_pass = rep.fit.rate >= opts.rate_fraction * df.c;

  rep.corollaries = check_corollaries(ens, df, w_f_init, opts.corollary_tol);
  rep.corollaries_pass = true;
  for (const auto& chk : rep.corollaries) {
    if (!chk.tv_pass || !chk.w1_pass) rep.corollaries_pass = false;
  }
  rep.coupled_fraction_at_horizon = 1.0 - uncoupled_fraction(ens, ens.horizon);
  return rep;
}

inline bool drift_preserves_moments(const DriftSpec& drift) {
  switch (drift.kind) {
    case DriftKind::Linear: return drift.strength >= 0.0;
    case DriftKind::DoubleWell: return true;  // dissipative outside the wells
    case DriftKind::StepProfile: return false;
  }
  return false;
}

struct InvariantProbeResult {
  std::vector<double> times;
  std::vector<double> w1_to_longrun;
  RateFit fit;
  bool monotone_tail = false;  // later distances below the first one
  bool rate_ok = false;        // fitted rate >= 0.5 c
  std::size_t longrun_samples = 0;
};

/// Occupation-measure probe: a long single path after burn-in stands in for
/// the invariant law; an ensemble started from the configured initial law is
/// compared against it at dyadic times.
inline InvariantProbeResult invariant_measure_probe(const SimConfig& cfg,
                                                    const DistanceFunction& df, double burn_in,
                                                    double horizon, double stride,
                                                    std::size_t n_paths, int threads = 1) {
  if (cfg.dimension() != 1) {
    throw ConfigError("invariant_measure_probe: implemented for d = 1");
  }
  if (!drift_preserves_moments(cfg.drift)) {
    throw ConfigError("invariant_measure_probe: drift does not preserve first moments");
  }
  if (!(burn_in > 0.0) || !(stride > 0.0) || !(horizon > 0.0)) {
    throw ConfigError("invariant_measure_probe: burn_in, stride, horizon must be positive");
  }

  // Long-run occupation sample.
  SimConfig longrun = cfg;
  longrun.n_paths = 1;
  longrun.base_seed = cfg.base_seed ^ 0xACCE55ED5EEDULL;
  const double collect = std::max(horizon * 8.0, 64.0 * stride);
  longrun.horizon = burn_in + collect;
  longrun.snapshot_times.clear();
  for (double t = burn_in; t <= longrun.horizon + 1e-12; t += stride) {
    longrun.snapshot_times.push_back(t);
  }
  const EnsembleSummary occupation = run_single_ensemble(longrun, threads);
  std::vector<double> longrun_sample;
  for (std::size_t k = 0; k < longrun.snapshot_times.size(); ++k) {
    const auto vals = snapshot_positions(occupation, k, false);
    longrun_sample.insert(longrun_sample.end(), vals.begin(), vals.end());
  }
  for (double v : longrun_sample) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("invariant_measure_probe: non-finite long-run sample");
    }
  }

  // Dyadic-time ensemble from the configured initial law.
  SimConfig probe = cfg;
  probe.n_paths = n_paths;
  probe.horizon = horizon;
  probe.snapshot_times.clear();
  for (double t = 1.0; t <= horizon + 1e-12; t *= 2.0) probe.snapshot_times.push_back(t);
  const EnsembleSummary ens = run_single_ensemble(probe, threads);

  InvariantProbeResult res;
  res.longrun_samples = longrun_sample.size();
  std::vector<DecayPoint> curve;
  for (std::size_t k = 0; k < probe.snapshot_times.size(); ++k) {
    const auto xs = snapshot_positions(ens, k, false);
    const double w1 = empirical_w1_1d_general(xs, longrun_sample);
    res.times.push_back(probe.snapshot_times[k]);
    res.w1_to_longrun.push_back(w1);
    curve.push_back({probe.snapshot_times[k], w1, 0.0, xs.size()});
  }
  if (res.w1_to_longrun.size() >= 2) {
    res.monotone_tail = true;
    for (std::size_t i = 1; i < res.w1_to_longrun.size(); ++i) {
      if (res.w1_to_longrun[i] >= res.w1_to_longrun.front()) res.monotone_tail = false;
    }
  }
  try {
    res.fit = fit_rate(curve);
    res.rate_ok = res.fit.rate >= 0.5 * df.c;
  } catch (const std::invalid_argument&) {
    res.rate_ok = false;  // curve already at the noise floor
  }
  return res;
}

}  // namespace levycouple
