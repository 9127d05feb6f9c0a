#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/drift.hpp"
#include "levycouple/levy_measure.hpp"
#include "levycouple/rng.hpp"

namespace levycouple {

/// Initial law of the pair: a fixed pair of points, or independent draws
/// from two finite sample sets.
struct InitialLaw {
  enum class Kind { Points, Samples } kind = Kind::Points;
  std::vector<double> x0, y0;
  std::vector<std::vector<double>> x_samples, y_samples;
};

struct SimConfig {
  RadialLevyMeasure measure;
  TruncationParams trunc;
  DriftSpec drift;
  double time_step = 1e-3;  // drift Euler step between jump epochs
  double horizon = 1.0;
  std::size_t n_paths = 0;
  std::uint64_t base_seed = 0;
  InitialLaw initial;
  std::vector<double> snapshot_times;  // sorted, within [0, horizon]
  double blowup_guard = 1e9;
  // Coupled paths evolve synchronously and their coupling time is final, so
  // once every snapshot is recorded they may stop early. Summaries then
  // count jump decisions only up to that point.
  bool stop_coupled_after_snapshots = false;

  int dimension() const { return measure.dimension; }

  void validate() const {
    if (!(time_step > 0.0)) throw ConfigError("simulation: time_step must be positive");
    if (horizon < 0.0) throw ConfigError("simulation: horizon must be nonnegative");
    if (!(trunc.eta > 0.0) || !(trunc.eta < trunc.m)) {
      throw ConfigError("simulation: need 0 < eta < m");
    }
    if (!drift.has_field()) {
      throw ConfigError("simulation: the configured drift has no vector field");
    }
    for (std::size_t i = 1; i < snapshot_times.size(); ++i) {
      if (snapshot_times[i] < snapshot_times[i - 1]) {
        throw ConfigError("simulation: snapshot times must be sorted");
      }
    }
    if (!snapshot_times.empty() &&
        (snapshot_times.front() < 0.0 || snapshot_times.back() > horizon)) {
      throw ConfigError("simulation: snapshot times must lie in [0, horizon]");
    }
  }
};

enum class JumpDecision { Coalesce, Reflect, SynchronousLarge, OmittedSmall };

inline const char* jump_decision_name(JumpDecision d) {
  switch (d) {
    case JumpDecision::Coalesce: return "coalesce";
    case JumpDecision::Reflect: return "reflect";
    case JumpDecision::SynchronousLarge: return "synchronous-large";
    case JumpDecision::OmittedSmall: return "omitted-small";
  }
  return "?";
}

struct JumpLogEntry {
  double time = 0.0;
  std::vector<double> v;
  JumpDecision decision = JumpDecision::Reflect;
};

struct PathSummary {
  double coupling_time = kInf;
  std::vector<double> x_at, y_at;  // flattened d * n_snapshots
  std::vector<double> z_norm_at;   // n_snapshots
  std::uint32_t n_coalesce = 0;
  std::uint32_t n_reflect = 0;
  std::uint32_t n_large = 0;
  bool blown_up = false;
  double max_reflect_norm_err = 0.0;
  double max_post_coupling_gap = 0.0;
};

/// Full trace of one coupled realization (jump log plus sampled states).
struct CouplingPath {
  std::vector<double> times;
  std::vector<double> x, y;  // flattened rows matching times
  std::vector<std::string> events;
  std::vector<JumpLogEntry> jumps;
  PathSummary summary;
};

namespace detail {

struct SummaryRecorder {
  PathSummary* s = nullptr;
  int d = 1;
  void state(double, const double*, const double*, const char*) {}
  void snapshot(const double* x, const double* y, double z_norm) {
    s->x_at.insert(s->x_at.end(), x, x + d);
    if (y != nullptr) s->y_at.insert(s->y_at.end(), y, y + d);
    s->z_norm_at.push_back(z_norm);
  }
  void jump(double, const double*, JumpDecision) {}
};

struct TraceRecorder {
  CouplingPath* p = nullptr;
  int d = 1;
  void state(double t, const double* x, const double* y, const char* tag) {
    p->times.push_back(t);
    p->x.insert(p->x.end(), x, x + d);
    if (y != nullptr) p->y.insert(p->y.end(), y, y + d);
    p->events.emplace_back(tag);
  }
  void snapshot(const double* x, const double* y, double z_norm) {
    p->summary.x_at.insert(p->summary.x_at.end(), x, x + d);
    if (y != nullptr) p->summary.y_at.insert(p->summary.y_at.end(), y, y + d);
    p->summary.z_norm_at.push_back(z_norm);
  }
  void jump(double t, const double* v, JumpDecision dec) {
    JumpLogEntry e;
    e.time = t;
    e.v.assign(v, v + d);
    e.decision = dec;
    p->jumps.push_back(e);
  }
};

inline void resolve_initial(const SimConfig& cfg, RngStream& rng, std::vector<double>& x,
                            std::vector<double>& y) {
  const int d = cfg.dimension();
  if (cfg.initial.kind == InitialLaw::Kind::Points) {
    if (static_cast<int>(cfg.initial.x0.size()) != d ||
        static_cast<int>(cfg.initial.y0.size()) != d) {
      throw ConfigError("initial law: x0/y0 must have the configured dimension");
    }
    x = cfg.initial.x0;
    y = cfg.initial.y0;
    return;
  }
  if (cfg.initial.x_samples.empty() || cfg.initial.y_samples.empty()) {
    throw ConfigError("initial law: sample sets must be nonempty");
  }
  const auto ix = static_cast<std::size_t>(rng.u01() *
                                           static_cast<double>(cfg.initial.x_samples.size()));
  const auto iy = static_cast<std::size_t>(rng.u01() *
                                           static_cast<double>(cfg.initial.y_samples.size()));
  x = cfg.initial.x_samples[std::min(ix, cfg.initial.x_samples.size() - 1)];
  y = cfg.initial.y_samples[std::min(iy, cfg.initial.y_samples.size() - 1)];
}

/// One realization of the coupled pair. Between jump epochs both coordinates
/// advance by explicit Euler (sub-stepped to hit jump and snapshot epochs
/// exactly). At a jump (t, v):
///   - the first marginal always gains v;
///   - once coupled, the second copies the first (coalescence is exact);
///   - |v| > m: synchronous jump, the displacement is unchanged;
///   - |v| <= m: with probability rho(v, Z-) the second marginal jumps onto
///     the first's post-jump position, otherwise it gains v mirrored across
///     the hyperplane orthogonal to Z-.
/// One uniform draw is consumed per jump with |v| <= m, coupled or not, so
/// the stream layout does not depend on the coupling state.
template <typename Recorder>
inline PathSummary run_coupled_path(const SimConfig& cfg, std::size_t path_index,
                                    Recorder& rec) {
  const int d = cfg.dimension();
  PathSummary summary;
  RngStream rng = RngStream::for_path(cfg.base_seed, path_index, /*purpose=*/0);

  std::vector<double> x, y;
  resolve_initial(cfg, rng, x, y);
  std::vector<double> bx(d), by(d), v(d), dir(d);

  bool coupled = std::equal(x.begin(), x.end(), y.begin());
  if (coupled) summary.coupling_time = 0.0;

  const JumpSampler sampler(cfg.measure, cfg.trunc.eta);
  const double rate = sampler.rate();
  const double m = cfg.trunc.m;
  const double h = cfg.time_step;

  double t = 0.0;
  std::size_t si = 0;
  const auto record_due_snapshots = [&](double now) {
    while (si < cfg.snapshot_times.size() && cfg.snapshot_times[si] <= now + 1e-15) {
      double zn = 0.0;
      if (!coupled) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        zn = std::sqrt(s);
      }
      rec.snapshot(x.data(), y.data(), zn);
      rec.state(cfg.snapshot_times[si], x.data(), y.data(), "snapshot");
      ++si;
    }
  };

  rec.state(0.0, x.data(), y.data(), "init");
  record_due_snapshots(0.0);

  const auto drift_to = [&](double target) {
    const double tol = 1e-12 * (1.0 + std::fabs(target));
    while (t < target - tol) {
      const double dt = std::min(h, target - t);
      cfg.drift.field(x, bx);
      if (coupled) {
        for (int i = 0; i < d; ++i) {
          x[i] += dt * bx[i];
          y[i] = x[i];
        }
      } else {
        cfg.drift.field(y, by);
        for (int i = 0; i < d; ++i) {
          x[i] += dt * bx[i];
          y[i] += dt * by[i];
        }
      }
      t += dt;
    }
    t = target;
  };

  double next_jump = rate > 0.0 ? rng.exponential(rate) : kInf;
  while (true) {
    const double segment_end = std::min(next_jump, cfg.horizon);
    const double seg_tol = 1e-12 * (1.0 + std::fabs(segment_end));
    // Drift segments broken at snapshot times so they are hit exactly.
    while (t < segment_end - seg_tol) {
      double target = segment_end;
      if (si < cfg.snapshot_times.size() && cfg.snapshot_times[si] < segment_end) {
        target = std::max(cfg.snapshot_times[si], t);
      }
      drift_to(target);
      record_due_snapshots(t);
      if (squared_norm(x) > cfg.blowup_guard * cfg.blowup_guard) {
        summary.blown_up = true;
        return summary;
      }
    }
    if (next_jump > cfg.horizon) break;

    // Jump epoch.
    const double r = sampler.sample_radius(rng);
    rng.unit_vector(d, dir.data());
    for (int i = 0; i < d; ++i) v[i] = r * dir[i];

    JumpDecision decision;
    if (coupled) {
      for (int i = 0; i < d; ++i) {
        x[i] += v[i];
        y[i] = x[i];
      }
      if (r <= m) {
        (void)rng.u01();  // matches the per-jump uniform of the uncoupled branch
        ++summary.n_coalesce;
        decision = JumpDecision::Coalesce;
      } else {
        ++summary.n_large;
        decision = JumpDecision::SynchronousLarge;
      }
    } else if (r > m) {
      for (int i = 0; i < d; ++i) {
        x[i] += v[i];
        y[i] += v[i];
      }
      ++summary.n_large;
      decision = JumpDecision::SynchronousLarge;
    } else {
      // Pre-jump displacement drives both the coalescence probability and
      // the mirror.
      double z2 = 0.0, vz2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double zi = x[i] - y[i];
        const double wi = v[i] + zi;
        z2 += zi * zi;
        vz2 += wi * wi;
      }
      const double u = rng.u01();
      const double rho = coalescence_probability_radii(cfg.measure, r, std::sqrt(vz2), m);
      if (u < rho) {
        for (int i = 0; i < d; ++i) {
          x[i] += v[i];
          y[i] = x[i];
        }
        coupled = true;
        summary.coupling_time = t;
        ++summary.n_coalesce;
        decision = JumpDecision::Coalesce;
      } else {
        const double zn = std::sqrt(z2);
        const double ev = [&] {
          double s = 0.0;
          for (int i = 0; i < d; ++i) s += (x[i] - y[i]) / zn * v[i];
          return s;
        }();
        double rv2 = 0.0;
        for (int i = 0; i < d; ++i) {
          const double e = (x[i] - y[i]) / zn;
          const double rv = v[i] - 2.0 * ev * e;
          y[i] += rv;
          x[i] += v[i];
          rv2 += rv * rv;
        }
        summary.max_reflect_norm_err =
            std::max(summary.max_reflect_norm_err, std::fabs(std::sqrt(rv2) - r));
        ++summary.n_reflect;
        decision = JumpDecision::Reflect;
      }
    }
    rec.jump(t, v.data(), decision);
    rec.state(t, x.data(), y.data(), jump_decision_name(decision));
    if (coupled) {
      double gap = 0.0;
      for (int i = 0; i < d; ++i) gap = std::max(gap, std::fabs(x[i] - y[i]));
      summary.max_post_coupling_gap = std::max(summary.max_post_coupling_gap, gap);
    }
    record_due_snapshots(t);
    if (coupled && cfg.stop_coupled_after_snapshots && si >= cfg.snapshot_times.size()) {
      return summary;
    }
    if (squared_norm(x) > cfg.blowup_guard * cfg.blowup_guard) {
      summary.blown_up = true;
      return summary;
    }
    next_jump = t + (rate > 0.0 ? rng.exponential(rate) : kInf);
  }
  rec.state(cfg.horizon, x.data(), y.data(), "end");
  return summary;
}

/// Single-marginal reference dynamics: same scheme, no coupling logic, and a
/// disjoint seed space.
template <typename Recorder>
inline PathSummary run_single_path(const SimConfig& cfg, std::size_t path_index,
                                   Recorder& rec) {
  const int d = cfg.dimension();
  PathSummary summary;
  summary.coupling_time = kInf;
  RngStream rng = RngStream::for_path(cfg.base_seed, path_index, /*purpose=*/1);

  std::vector<double> x, y_unused;
  resolve_initial(cfg, rng, x, y_unused);
  std::vector<double> bx(d), v(d), dir(d);

  const JumpSampler sampler(cfg.measure, cfg.trunc.eta);
  const double rate = sampler.rate();
  const double h = cfg.time_step;

  double t = 0.0;
  std::size_t si = 0;
  const auto record_due_snapshots = [&](double now) {
    while (si < cfg.snapshot_times.size() && cfg.snapshot_times[si] <= now + 1e-15) {
      rec.snapshot(x.data(), nullptr, 0.0);
      rec.state(cfg.snapshot_times[si], x.data(), nullptr, "snapshot");
      ++si;
    }
  };
  rec.state(0.0, x.data(), nullptr, "init");
  record_due_snapshots(0.0);

  double next_jump = rate > 0.0 ? rng.exponential(rate) : kInf;
  while (true) {
    const double segment_end = std::min(next_jump, cfg.horizon);
    const double seg_tol = 1e-12 * (1.0 + std::fabs(segment_end));
    while (t < segment_end - seg_tol) {
      double target = segment_end;
      if (si < cfg.snapshot_times.size() && cfg.snapshot_times[si] < segment_end) {
        target = std::max(cfg.snapshot_times[si], t);
      }
      const double tol = 1e-12 * (1.0 + std::fabs(target));
      while (t < target - tol) {
        const double dt = std::min(h, target - t);
        cfg.drift.field(x, bx);
        for (int i = 0; i < d; ++i) x[i] += dt * bx[i];
        t += dt;
      }
      t = target;
      record_due_snapshots(t);
      if (squared_norm(x) > cfg.blowup_guard * cfg.blowup_guard) {
        summary.blown_up = true;
        return summary;
      }
    }
    if (next_jump > cfg.horizon) break;
    const double r = sampler.sample_radius(rng);
    rng.unit_vector(d, dir.data());
    for (int i = 0; i < d; ++i) x[i] += r * dir[i];
    rec.state(t, x.data(), nullptr, "jump");
    record_due_snapshots(t);
    next_jump = t + (rate > 0.0 ? rng.exponential(rate) : kInf);
  }
  rec.state(cfg.horizon, x.data(), nullptr, "end");
  return summary;
}

}  // namespace detail

/// One coupled realization with a full jump log and state trace.
inline CouplingPath simulate_coupled_pair(const SimConfig& cfg, std::size_t path_index) {
  cfg.validate();
  CouplingPath path;
  detail::TraceRecorder rec{&path, cfg.dimension()};
  PathSummary s = detail::run_coupled_path(cfg, path_index, rec);
  s.x_at = std::move(path.summary.x_at);
  s.y_at = std::move(path.summary.y_at);
  s.z_norm_at = std::move(path.summary.z_norm_at);
  path.summary = std::move(s);
  return path;
}

/// Marginal trace of the first coordinate only (independent seed space).
inline CouplingPath simulate_single(const SimConfig& cfg, std::size_t path_index) {
  cfg.validate();
  CouplingPath path;
  detail::TraceRecorder rec{&path, cfg.dimension()};
  PathSummary s = detail::run_single_path(cfg, path_index, rec);
  s.x_at = std::move(path.summary.x_at);
  s.z_norm_at = std::move(path.summary.z_norm_at);
  path.summary = std::move(s);
  return path;
}

struct EnsembleSummary {
  bool coupled_mode = true;
  std::size_t n_paths = 0;
  std::uint64_t base_seed = 0;
  int dimension = 1;
  double horizon = 0.0, time_step = 0.0, eta = 0.0, m = 0.0;
  std::vector<double> snapshot_times;
  std::vector<PathSummary> paths;
  std::size_t n_blown = 0;
  bool flagged = false;  // more than 0.1% of paths excluded
};

namespace detail {

template <typename RunOne>
inline EnsembleSummary run_ensemble_impl(const SimConfig& cfg, int threads, bool coupled_mode,
                                         RunOne&& run_one) {
  cfg.validate();
  EnsembleSummary out;
  out.coupled_mode = coupled_mode;
  out.n_paths = cfg.n_paths;
  out.base_seed = cfg.base_seed;
  out.dimension = cfg.dimension();
  out.horizon = cfg.horizon;
  out.time_step = cfg.time_step;
  out.eta = cfg.trunc.eta;
  out.m = cfg.trunc.m;
  out.snapshot_times = cfg.snapshot_times;
  out.paths.resize(cfg.n_paths);
  if (cfg.n_paths == 0) return out;

  const int n_workers = std::max(1, threads);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.n_paths) return;
      out.paths[i] = run_one(i);
    }
  };
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& p : out.paths) {
    if (p.blown_up) ++out.n_blown;
  }
  out.flagged = static_cast<double>(out.n_blown) > 1e-3 * static_cast<double>(cfg.n_paths);
  log_info("ensemble: " + std::to_string(cfg.n_paths) + " paths on " +
           std::to_string(n_workers) + " thread(s), " + std::to_string(out.n_blown) +
           " excluded");
  return out;
}

}  // namespace detail

/// Ensemble of coupled paths with per-path deterministic substreams; results
/// are identical for any thread count because path i always consumes stream
/// (base_seed, i).
inline EnsembleSummary run_ensemble(const SimConfig& cfg, int threads = 1) {
  return detail::run_ensemble_impl(cfg, threads, /*coupled=*/true, [&](std::size_t i) {
    detail::SummaryRecorder rec;
    PathSummary s;
    rec.s = &s;
    rec.d = cfg.dimension();
    PathSummary run = detail::run_coupled_path(cfg, i, rec);
    run.x_at = std::move(s.x_at);
    run.y_at = std::move(s.y_at);
    run.z_norm_at = std::move(s.z_norm_at);
    return run;
  });
}

/// Ensemble of independent single-marginal paths (purpose-separated streams).
inline EnsembleSummary run_single_ensemble(const SimConfig& cfg, int threads = 1) {
  return detail::run_ensemble_impl(cfg, threads, /*coupled=*/false, [&](std::size_t i) {
    detail::SummaryRecorder rec;
    PathSummary s;
    rec.s = &s;
    rec.d = cfg.dimension();
    PathSummary run = detail::run_single_path(cfg, i, rec);
    run.x_at = std::move(s.x_at);
    run.z_norm_at = std::move(s.z_norm_at);
    return run;
  });
}

}  // namespace levycouple
