#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "levycouple/common.hpp"
#include "levycouple/config.hpp"
#include "levycouple/coupling.hpp"
#include "levycouple/distance.hpp"
#include "levycouple/metrics.hpp"

namespace levycouple {

using json = nlohmann::json;

inline json constants_to_json(const DistanceFunction& df) {
  json j;
  j["epsilon"] = df.epsilon;
  j["delta"] = df.delta;
  j["m"] = df.m;
  j["eta"] = df.eta;
  j["c_eps"] = df.c_eps;
  j["c_delta"] = df.c_delta;
  j["c_delta_m"] = df.c_delta_m;
  j["r0"] = df.r0;
  j["r1"] = df.r1;
  j["c1"] = df.c1;
  j["phi_r0"] = df.phi_r0;
  j["c_l"] = df.c_l;
  j["k_convention"] = df.k_convention == KConvention::Proof ? "proof" : "statement";
  j["K"] = df.K;
  j["a"] = df.a;
  j["c"] = df.c;
  j["prefactor_tv"] = df.prefactor_tv;
  j["prefactor_w1"] = df.prefactor_w1;
  j["f1_delta"] = df.f1_at(df.delta);
  return j;
}

/// Per-time aggregates of an ensemble; deterministic for a fixed seed and
/// config regardless of thread count.
inline json ensemble_to_json(const EnsembleSummary& ens) {
  json j;
  j["mode"] = ens.coupled_mode ? "coupled" : "single";
  j["n_paths"] = ens.n_paths;
  j["base_seed"] = ens.base_seed;
  j["dimension"] = ens.dimension;
  j["horizon"] = ens.horizon;
  j["time_step"] = ens.time_step;
  j["eta"] = ens.eta;
  j["m"] = ens.m;
  j["n_excluded"] = ens.n_blown;
  j["flagged"] = ens.flagged;
  j["snapshot_times"] = ens.snapshot_times;

  json per_time = json::array();
  for (std::size_t k = 0; k < ens.snapshot_times.size(); ++k) {
    json row;
    row["t"] = ens.snapshot_times[k];
    std::vector<double> zs = snapshot_z_norms(ens, k);
    if (!zs.empty()) {
      const auto [mean, se] = detail::mean_and_stderr(zs);
      row["mean_abs_z"] = mean;
      row["stderr_abs_z"] = se;
      row["n"] = zs.size();
      if (ens.coupled_mode) row["uncoupled_fraction"] = uncoupled_fraction(ens, ens.snapshot_times[k]);
    }
    per_time.push_back(row);
  }
  j["per_time"] = per_time;

  if (ens.coupled_mode && !ens.paths.empty()) {
    std::vector<double> finite_T;
    std::uint64_t n_coalesce = 0, n_reflect = 0, n_large = 0;
    double max_reflect_err = 0.0, max_gap = 0.0;
    std::size_t usable = 0;
    for (const auto& p : ens.paths) {
      if (p.blown_up) continue;
      ++usable;
      if (std::isfinite(p.coupling_time)) finite_T.push_back(p.coupling_time);
      n_coalesce += p.n_coalesce;
      n_reflect += p.n_reflect;
      n_large += p.n_large;
      max_reflect_err = std::max(max_reflect_err, p.max_reflect_norm_err);
      max_gap = std::max(max_gap, p.max_post_coupling_gap);
    }
    std::sort(finite_T.begin(), finite_T.end());
    json coupling;
    coupling["coupled_fraction"] =
        usable > 0 ? static_cast<double>(finite_T.size()) / static_cast<double>(usable) : 0.0;
    const auto q = [&](double p) -> json {
      if (finite_T.empty()) return nullptr;
      const auto idx = static_cast<std::size_t>(p * static_cast<double>(finite_T.size() - 1));
      return finite_T[idx];
    };
    coupling["t_p50"] = q(0.5);
    coupling["t_p90"] = q(0.9);
    coupling["t_p99"] = q(0.99);
    j["coupling"] = coupling;
    j["jump_counts"] = {{"coalesce", n_coalesce},
                        {"reflect", n_reflect},
                        {"synchronous_large", n_large}};
    j["max_reflect_norm_err"] = max_reflect_err;
    j["max_post_coupling_gap"] = max_gap;
  }
  return j;
}

inline json report_to_json(const ContractionReport& rep) {
  json j;
  j["c"] = rep.c;
  j["a"] = rep.a;
  j["phi_r0"] = rep.phi_r0;
  j["w_f_init"] = rep.w_f_init;
  j["envelope_tol"] = rep.envelope_tol;
  j["corollary_tol"] = rep.corollary_tol;
  j["rate_fraction"] = rep.rate_fraction;
  json curve = json::array();
  for (std::size_t k = 0; k < rep.ef_curve.size(); ++k) {
    const auto& p = rep.ef_curve[k];
    curve.push_back({{"t", p.t},
                     {"mean_f_z", p.mean},
                     {"stderr", p.stderr_},
                     {"n", p.n},
                     {"envelope", rep.ef_envelope[k]},
                     {"uncoupled_fraction", rep.uncoupled[k]}});
  }
  j["curve"] = curve;
  j["fit"] = {{"rate", rep.fit.rate},
              {"intercept", rep.fit.intercept},
              {"residual", rep.fit.residual},
              {"points_used", rep.fit.points_used}};
  json cors = json::array();
  for (const auto& c : rep.corollaries) {
    cors.push_back({{"t", c.t},
                    {"tv_lhs", c.tv_lhs},
                    {"tv_rhs", c.tv_rhs},
                    {"tv_pass", c.tv_pass},
                    {"w1_lhs", c.w1_lhs},
                    {"w1_rhs", c.w1_rhs},
                    {"w1_pass", c.w1_pass}});
  }
  j["corollaries"] = cors;
  j["coupled_fraction_at_horizon"] = rep.coupled_fraction_at_horizon;
  j["verdicts"] = {{"contraction", rep.contraction_pass},
                   {"rate", rep.rate_pass},
                   {"corollaries", rep.corollaries_pass},
                   {"all", rep.all_pass()}};
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

/// CSV of the assembled cost tables: r, phi, Phi, g, f1, f.
inline void write_distance_csv(const std::string& path, const DistanceFunction& df,
                               std::size_t max_rows = 2048) {
  std::ostringstream out;
  out << "r,phi,Phi,g,f1,f\n";
  const std::size_t n = df.f1.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_rows);
  out.precision(17);
  for (std::size_t i = 0; i < n; i += stride) {
    const double r = df.step * static_cast<double>(i);
    out << r << ',' << df.phi[i] << ',' << df.Phi[i] << ',' << df.g[i] << ',' << df.f1[i]
        << ',' << (i == 0 ? 0.0 : df.f1[i] + df.a) << "\n";
  }
  write_text_file(path, out.str());
}

/// CSV of the decay curve: time, value, stderr, envelope.
inline void write_decay_csv(const std::string& path, const ContractionReport& rep) {
  std::ostringstream out;
  out << "time,value,stderr,envelope,uncoupled_fraction\n";
  out.precision(17);
  for (std::size_t k = 0; k < rep.ef_curve.size(); ++k) {
    const auto& p = rep.ef_curve[k];
    out << p.t << ',' << p.mean << ',' << p.stderr_ << ',' << rep.ef_envelope[k] << ','
        << rep.uncoupled[k] << "\n";
  }
  write_text_file(path, out.str());
}

/// CSV trace of one path: time, x..., y..., |z|, event.
inline void write_trace_csv(const std::string& path, const CouplingPath& trace, int dimension) {
  std::ostringstream out;
  out << "time";
  for (int i = 0; i < dimension; ++i) out << ",x" << i;
  const bool has_y = !trace.y.empty();
  if (has_y) {
    for (int i = 0; i < dimension; ++i) out << ",y" << i;
    out << ",abs_z";
  }
  out << ",event\n";
  out.precision(17);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out << trace.times[k];
    for (int i = 0; i < dimension; ++i) out << ',' << trace.x[k * dimension + i];
    if (has_y) {
      double z2 = 0.0;
      for (int i = 0; i < dimension; ++i) {
        const double zi = trace.x[k * dimension + i] - trace.y[k * dimension + i];
        out << ',' << trace.y[k * dimension + i];
        z2 += zi * zi;
      }
      out << ',' << std::sqrt(z2);
    }
    out << ',' << trace.events[k] << "\n";
  }
  write_text_file(path, out.str());
}

/// Manifest echoing the resolved configuration so a run can be replayed.
inline json manifest_json(const RunConfig& rc, const std::string& subcommand) {
  json j;
  j["subcommand"] = subcommand;
  json measure;
  switch (rc.measure.kind) {
    case MeasureKind::AlphaStable:
      measure["kind"] = "alpha-stable";
      measure["alpha"] = rc.measure.alpha;
      break;
    case MeasureKind::ShellUniform:
      measure["kind"] = "shell-uniform";
      measure["theta"] = rc.measure.theta;
      measure["beta"] = rc.measure.beta;
      break;
    case MeasureKind::TabulatedRadial:
      measure["kind"] = "tabulated-radial";
      measure["radii"] = rc.measure.radial_table.xs();
      measure["densities"] = rc.measure.radial_table.ys();
      break;
  }
  measure["dimension"] = rc.measure.dimension;
  j["measure"] = measure;
  json drift;
  switch (rc.drift.kind) {
    case DriftKind::Linear: drift["kind"] = "linear"; break;
    case DriftKind::DoubleWell: drift["kind"] = "double-well"; break;
    case DriftKind::StepProfile: drift["kind"] = "step-profile"; break;
  }
  drift["strength"] = rc.drift.strength;
  drift["radius"] = rc.drift.radius;
  drift["c_l"] = rc.drift.c_l;
  j["drift"] = drift;
  j["distance"] = {{"epsilon", rc.distance.epsilon},
                   {"delta", rc.distance.delta},
                   {"k_convention",
                    rc.distance.k_convention == KConvention::Proof ? "proof" : "statement"},
                   {"grid_points", rc.distance.grid_points},
                   {"span_factor", rc.distance.span_factor},
                   {"r_max", rc.distance.r_max},
                   {"variance_budget_rel", rc.distance.trunc.variance_budget_rel}};
  j["simulation"] = {{"time_step", rc.time_step},
                     {"horizon", rc.horizon},
                     {"n_paths", rc.n_paths},
                     {"base_seed", rc.base_seed},
                     {"x0", rc.x0},
                     {"y0", rc.y0},
                     {"snapshot_times", rc.snapshot_times},
                     {"blowup_guard", rc.blowup_guard},
                     {"threads", rc.threads}};
  j["output"] = {{"dir", rc.output.dir},
                 {"write_distance_csv", rc.output.write_distance_csv},
                 {"write_decay_csv", rc.output.write_decay_csv},
                 {"trace_paths", rc.output.trace_paths}};
  return j;
}

}  // namespace levycouple
