#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/interpolation.hpp"
#include "levycouple/quadrature.hpp"
#include "levycouple/rng.hpp"

namespace levycouple {

enum class MeasureKind { AlphaStable, ShellUniform, TabulatedRadial };

/// Rotationally invariant pure-jump measure on R^d with density q(v) that
/// depends on v only through |v|.
///
/// Kinds:
///   alpha-stable      q(v) = |v|^{-d-alpha}, alpha in (0, 2)
///   shell-uniform     d = 1, q = 1 on [-theta, -theta/beta] u [theta/beta, theta]
///   tabulated-radial  shape-preserving cubic through (radius, density) samples,
///                     zero outside the sampled range
struct RadialLevyMeasure {
  int dimension = 1;
  MeasureKind kind = MeasureKind::AlphaStable;
  double alpha = 1.5;
  double theta = 1.0;
  double beta = 2.0;
  MonotoneCubic radial_table;

  static RadialLevyMeasure alpha_stable(int d, double alpha) {
    if (d < 1) throw ConfigError("alpha_stable: dimension must be >= 1");
    if (!(alpha > 0.0 && alpha < 2.0)) {
      throw ConfigError("alpha_stable: alpha must lie in (0, 2)");
    }
    RadialLevyMeasure m;
    m.dimension = d;
    m.kind = MeasureKind::AlphaStable;
    m.alpha = alpha;
    return m;
  }

  static RadialLevyMeasure shell_uniform(double theta, double beta) {
    if (!(theta > 0.0)) throw ConfigError("shell_uniform: theta must be positive");
    if (!(beta > 1.0)) throw ConfigError("shell_uniform: beta must exceed 1");
    RadialLevyMeasure m;
    m.dimension = 1;
    m.kind = MeasureKind::ShellUniform;
    m.theta = theta;
    m.beta = beta;
    return m;
  }

  static RadialLevyMeasure tabulated(int d, std::vector<double> radii,
                                     std::vector<double> densities) {
    if (d < 1) throw ConfigError("tabulated: dimension must be >= 1");
    if (radii.size() < 4 || radii.size() != densities.size()) {
      throw ConfigError("tabulated: need >= 4 matching (radius, density) samples");
    }
    if (radii.front() < 0.0) throw ConfigError("tabulated: radii must be nonnegative");
    for (double q : densities) {
      if (!std::isfinite(q) || q < 0.0) {
        throw ConfigError("tabulated: densities must be finite and nonnegative");
      }
    }
    RadialLevyMeasure m;
    m.dimension = d;
    m.kind = MeasureKind::TabulatedRadial;
    m.radial_table = MonotoneCubic(std::move(radii), std::move(densities));
    // Levy integrability int (|v|^2 ^ 1) q dv: automatic for a bounded
    // density supported on a bounded range, but guard against bad tables.
    const double check = m.levy_integrability();
    if (!std::isfinite(check) || check < 0.0) {
      throw ConfigError("tabulated: jump measure fails the integrability check");
    }
    return m;
  }

  /// q evaluated at radius r > 0.
  double radial_density(double r) const {
    switch (kind) {
      case MeasureKind::AlphaStable:
        return std::pow(r, -static_cast<double>(dimension) - alpha);
      case MeasureKind::ShellUniform:
        return (r >= theta / beta && r <= theta) ? 1.0 : 0.0;
      case MeasureKind::TabulatedRadial: {
        const double q = radial_table(r);
        return q > 0.0 ? q : 0.0;
      }
    }
    return 0.0;
  }

  double density(std::span<const double> v) const { return radial_density(norm(v)); }

  /// Upper end of the radial support (inf for alpha-stable).
  double support_radius() const {
    switch (kind) {
      case MeasureKind::AlphaStable: return kInf;
      case MeasureKind::ShellUniform: return theta;
      case MeasureKind::TabulatedRadial: return radial_table.x_max();
    }
    return kInf;
  }

  /// Lower end of the radial support; positive for measures whose jumps are
  /// bounded away from zero.
  double support_inner_radius() const {
    switch (kind) {
      case MeasureKind::AlphaStable: return 0.0;
      case MeasureKind::ShellUniform: return theta / beta;
      case MeasureKind::TabulatedRadial: return radial_table.x_min();
    }
    return 0.0;
  }

  /// nu({|v| > r}).
  double tail_mass(double r) const {
    const double surf = sphere_surface(dimension);
    switch (kind) {
      case MeasureKind::AlphaStable:
        if (r <= 0.0) return kInf;
        return surf / alpha * std::pow(r, -alpha);
      case MeasureKind::ShellUniform:
        return 2.0 * std::max(0.0, theta - std::max(r, theta / beta));
      case MeasureKind::TabulatedRadial: {
        const double lo = std::max(r, radial_table.x_min());
        const double hi = radial_table.x_max();
        if (lo >= hi) return 0.0;
        const int d = dimension;
        return integrate(
            [&](double s) { return surf * std::pow(s, d - 1) * radial_density(s); }, lo, hi);
      }
    }
    return 0.0;
  }

  /// nu({|v| <= r}); infinite for infinite-activity measures.
  double ball_mass(double r) const {
    switch (kind) {
      case MeasureKind::AlphaStable: return r > 0.0 ? kInf : 0.0;
      case MeasureKind::ShellUniform:
        return 2.0 * std::max(0.0, std::min(r, theta) - theta / beta);
      case MeasureKind::TabulatedRadial: {
        const double lo = radial_table.x_min();
        const double hi = std::min(r, radial_table.x_max());
        if (hi <= lo) return 0.0;
        const double surf = sphere_surface(dimension);
        const int d = dimension;
        return integrate(
            [&](double s) { return surf * std::pow(s, d - 1) * radial_density(s); },
            std::max(lo, 1e-300), hi);
      }
    }
    return 0.0;
  }

  /// int_{lo < |v| <= hi} |v|^2 nu(dv).
  double shell_second_moment(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    const double surf = sphere_surface(dimension);
    switch (kind) {
      case MeasureKind::AlphaStable: {
        const double p = 2.0 - alpha;
        const double top = std::isinf(hi) ? kInf : std::pow(hi, p);
        return surf * (top - std::pow(lo, p)) / p;
      }
      case MeasureKind::ShellUniform: {
        const double a = std::max(lo, theta / beta);
        const double b = std::min(hi, theta);
        if (b <= a) return 0.0;
        return 2.0 * (b * b * b - a * a * a) / 3.0;
      }
      case MeasureKind::TabulatedRadial: {
        const double a = std::max(lo, radial_table.x_min());
        const double b = std::min(hi, radial_table.x_max());
        if (b <= a) return 0.0;
        const int d = dimension;
        return integrate(
            [&](double s) { return surf * std::pow(s, d + 1) * radial_density(s); },
            std::max(a, 1e-300), b);
      }
    }
    return 0.0;
  }

  double levy_integrability() const {
    const double near = shell_second_moment(0.0, 1.0);
    const double far = tail_mass(1.0);
    return near + far;
  }
};

/// One-dimensional marginal of the (optionally truncated) measure: the law of
/// <w, .> under nu restricted to {|v| <= m}, for any unit vector w. Symmetric
/// about zero by rotational invariance.
struct MarginalMeasure {
  std::function<double(double)> density;  // evaluator at y != 0
  double trunc_m = kInf;
  QuadratureOptions quad{};

  /// int_{a <= y <= b} y^2 nu_1(dy) for 0 <= a < b (one side only).
  double second_moment(double a, double b) const {
    if (b <= a) return 0.0;
    const auto f = [this](double y) { return y * y * density(y); };
    if (a <= 0.0) return integrate_left_singular(f, b, quad);
    return integrate(f, a, b, quad);
  }
};

/// Marginal density of the truncated measure along any fixed direction.
/// d = 1: q itself cut at m. d >= 2: integral of q over the orthogonal
/// coordinates inside the truncation ball.
inline MarginalMeasure marginal_density(const RadialLevyMeasure& measure, double m,
                                        QuadratureOptions quad = {}) {
  if (!(m > 0.0)) throw std::domain_error("marginal_density: m must be positive (or inf)");
  MarginalMeasure out;
  out.trunc_m = m;
  out.quad = quad;
  if (measure.kind == MeasureKind::TabulatedRadial) {
    const double cover = std::min(m, measure.radial_table.x_max());
    if (cover <= measure.radial_table.x_min()) {
      throw std::domain_error(
          "marginal_density: tabulated radial grid does not cover the truncation ball");
    }
  }
  if (measure.dimension == 1) {
    out.density = [measure, m](double y) {
      const double r = std::fabs(y);
      return r <= m ? measure.radial_density(r) : 0.0;
    };
    return out;
  }
  // Radial form: with s the orthogonal radius and r = sqrt(y^2 + s^2) the
  // jump radius,
  //   p(y) = S_{d-2} int_{|y|}^{reach} (r^2 - y^2)^{(d-3)/2} r q(r) dr.
  // For d = 2 the integrand has an inverse-square-root singularity at the
  // lower endpoint; shifting it to zero lets the dyadic descent resolve it
  // at any scale of |y|.
  const int d = measure.dimension;
  const double cross_surf = sphere_surface(d - 1);
  const double support = measure.support_radius();
  out.density = [measure, m, d, cross_surf, support, quad](double y) {
    const double ay = std::fabs(y);
    if (!(ay > 0.0)) throw std::domain_error("marginal density: evaluate at y != 0");
    const double reach = std::min(m, support);
    if (ay >= reach) return 0.0;
    const double expo = 0.5 * (d - 3);
    const auto g = [&](double u) {  // u = r - |y|
      const double r = ay + u;
      return cross_surf * std::pow(u * (r + ay), expo) * r * measure.radial_density(r);
    };
    if (std::isinf(reach)) {
      const auto tail = [&](double r) {
        return cross_surf * std::pow(r * r - ay * ay, expo) * r * measure.radial_density(r);
      };
      return integrate_left_singular(g, 1.0, quad) + integrate_to_infinity(tail, ay + 1.0, quad);
    }
    return integrate_left_singular(g, reach - ay, quad);
  };
  return out;
}

/// C_eps = 2 int_{-eps/4}^{0} y^2 nu_1(dy) with nu_1 the untruncated marginal.
/// Closed form for the one-dimensional alpha-stable kind, quadrature otherwise.
/// Throws a feasibility error when there is no jump activity below eps/2 at
/// all; returns 0 (without error) when activity exists but none below eps/4.
inline double c_epsilon(const RadialLevyMeasure& measure, double eps,
                        QuadratureOptions quad = {}) {
  if (!(eps > 0.0)) throw std::domain_error("c_epsilon: eps must be positive");
  const double activity = measure.ball_mass(0.5 * eps);
  if (!(activity > 0.0)) {
    throw FeasibilityError(Assumption::SmallJumpActivity,
                           "no jump mass below eps/2 = " + std::to_string(0.5 * eps) +
                               "; increase eps or change the measure");
  }
  if (measure.kind == MeasureKind::AlphaStable && measure.dimension == 1) {
    return 2.0 / (2.0 - measure.alpha) * std::pow(0.25 * eps, 2.0 - measure.alpha);
  }
  // In d = 1 the marginal is q itself, so a support gap below eps/4 makes
  // the integral exactly zero.
  if (measure.dimension == 1 && 0.25 * eps <= measure.support_inner_radius()) {
    return 0.0;
  }
  const MarginalMeasure marg = marginal_density(measure, kInf, quad);
  return 2.0 * marg.second_moment(0.0, 0.25 * eps);
}

namespace detail {

/// Total length of the set S n (S - x) n [-m, m - x] where S is the support
/// of the one-dimensional shell-uniform density. Exact interval arithmetic.
inline double shell_overlap_length(double theta, double beta, double x, double m) {
  const double inner = theta / beta;
  const std::pair<double, double> comps[2] = {{-theta, -inner}, {inner, theta}};
  double total = 0.0;
  for (const auto& a : comps) {
    for (const auto& b : comps) {
      double lo = std::max(a.first, b.first - x);
      double hi = std::min(a.second, b.second - x);
      if (!std::isinf(m)) {
        lo = std::max(lo, -m);
        hi = std::min(hi, m - x);
      }
      total += std::max(0.0, hi - lo);
    }
  }
  return total;
}

}  // namespace detail

/// Overlap mass int_{{|v|<=m} n {|v+x|<=m}} q(v) ^ q(v+x) dv for a
/// displacement of magnitude x > 0 (the value depends on the displacement
/// only through its magnitude).
inline double overlap_at(const RadialLevyMeasure& measure, double x, double m,
                         QuadratureOptions quad = {}, bool force_quadrature = false) {
  if (!(x > 0.0)) throw std::domain_error("overlap_at: displacement must be positive");
  if (!std::isinf(m) && 2.0 * m <= x) return 0.0;

  if (!force_quadrature) {
    if (measure.kind == MeasureKind::AlphaStable && measure.dimension == 1) {
      // 2 int_{x/2}^{m} r^{-1-alpha} dr
      const double a = measure.alpha;
      const double tail = std::isinf(m) ? 0.0 : std::pow(m, -a);
      return std::max(0.0, 2.0 / a * (std::pow(0.5 * x, -a) - tail));
    }
    if (measure.kind == MeasureKind::ShellUniform) {
      return detail::shell_overlap_length(measure.theta, measure.beta, x,
                                          std::isinf(m) ? kInf : m);
    }
  }

  const double support = measure.support_radius();
  const double reach = std::isinf(m) ? support : std::min(m, support);
  if (std::isinf(reach)) {
    throw std::domain_error("overlap_at: quadrature path needs a finite truncation radius");
  }

  if (measure.dimension == 1) {
    // min(q(|v|), q(|v+x|)) on [-reach, reach - x]; finite everywhere because
    // the smaller branch stays bounded at the two density poles.
    const auto f = [&](double v) {
      return std::min(measure.radial_density(std::fabs(v)),
                      measure.radial_density(std::fabs(v + x)));
    };
    const double lo = -reach;
    const double hi = reach - x;
    if (hi <= lo) return 0.0;
    double breaks[4] = {lo, -x, -0.5 * x, hi};
    std::sort(std::begin(breaks), std::end(breaks));
    double total = 0.0;
    for (int i = 0; i + 1 < 4; ++i) {
      const double a = std::max(lo, breaks[i]);
      const double b = std::min(hi, breaks[i + 1]);
      if (b > a + 1e-15) {
        const double pad = 1e-12 * (b - a);  // step inside the density poles
        total += integrate(f, a + pad, b - pad, quad);
      }
    }
    return total;
  }

  // d >= 2: write v = (v1, w) with the displacement along the first axis;
  // the integrand depends on w only through s = |w|.
  const int d = measure.dimension;
  const double cross_surf = sphere_surface(d - 1);
  const auto inner = [&](double v1) {
    const double s1 = reach * reach - v1 * v1;
    const double s2 = reach * reach - (v1 + x) * (v1 + x);
    const double s_max2 = std::min(s1, s2);
    if (s_max2 <= 0.0) return 0.0;
    const double s_max = std::sqrt(s_max2);
    const auto f = [&](double s) {
      const double r1 = std::hypot(v1, s);
      const double r2 = std::hypot(v1 + x, s);
      return cross_surf * std::pow(s, d - 2) *
             std::min(measure.radial_density(r1), measure.radial_density(r2));
    };
    QuadratureOptions inner_quad = quad;
    inner_quad.abs_tol = std::max(quad.abs_tol, 1e-12);
    inner_quad.rel_tol = std::max(quad.rel_tol, 1e-7);
    if (d == 2) return integrate(f, 0.0, s_max, inner_quad);
    return integrate_left_singular(f, s_max, inner_quad);
  };
  const double lo = -reach;
  const double hi = reach - x;
  if (hi <= lo) return 0.0;
  QuadratureOptions outer_quad = quad;
  outer_quad.rel_tol = std::max(quad.rel_tol, 1e-6);
  const double pad = 1e-10 * (hi - lo);
  return integrate(inner, lo + pad, hi - pad, outer_quad);
}

struct OverlapOptions {
  int grid_points = 64;         // geometric displacement grid below delta
  double grid_span = 1024.0;    // smallest displacement = delta / grid_span
  QuadratureOptions quad{};
  bool force_quadrature = false;
};

/// Overlap constant: inf over displacements 0 < |x| <= delta of the overlap
/// mass, truncated at m (pass m = inf for the untruncated constant). By
/// rotational invariance this is a one-parameter infimum over |x|; it is
/// evaluated on a geometric grid plus the endpoint, with a local ternary
/// refinement around the grid minimum. Returns 0 (no error) when the
/// infimum vanishes; downstream constants report that as an overlap
/// feasibility failure.
inline double overlap_infimum(const RadialLevyMeasure& measure, double delta, double m,
                              const OverlapOptions& opts = {}) {
  if (!(delta > 0.0)) throw std::domain_error("overlap_infimum: delta must be positive");
  if (!std::isinf(m) && !(delta < 2.0 * m)) return 0.0;

  if (!opts.force_quadrature && measure.kind == MeasureKind::AlphaStable &&
      measure.dimension == 1) {
    // overlap is decreasing in the displacement, so the infimum sits at delta
    return overlap_at(measure, delta, m);
  }

  const auto eval = [&](double x) {
    return overlap_at(measure, x, m, opts.quad, opts.force_quadrature);
  };

  const int n = std::max(2, opts.grid_points);
  const double ratio = std::pow(opts.grid_span, 1.0 / static_cast<double>(n - 1));
  double best = eval(delta);
  double best_x = delta;
  double x = delta;
  for (int i = 1; i < n; ++i) {
    x /= ratio;
    const double val = eval(x);
    if (val < best) {
      best = val;
      best_x = x;
    }
    if (best == 0.0) return 0.0;
  }
  // Ternary refinement around the grid minimum.
  double lo = best_x / ratio;
  double hi = std::min(delta, best_x * ratio);
  for (int it = 0; it < 60 && hi - lo > 1e-12 * delta; ++it) {
    const double x1 = lo + (hi - lo) / 3.0;
    const double x2 = hi - (hi - lo) / 3.0;
    const double f1 = eval(x1);
    const double f2 = eval(x2);
    best = std::min({best, f1, f2});
    if (f1 < f2) {
      hi = x2;
    } else {
      lo = x1;
    }
  }
  return std::max(0.0, best);
}

/// Probability of coalescence for a jump v of the first marginal when the
/// pair displacement is z: q(v) ^ q(v+z) 1{|v+z| <= m} / q(v), with the
/// convention 1 when q(v) = 0.
inline double coalescence_probability_radii(const RadialLevyMeasure& measure, double v_norm,
                                            double v_plus_z_norm, double m) {
  const double qv = measure.radial_density(v_norm);
  if (qv == 0.0) return 1.0;
  if (v_plus_z_norm > m) return 0.0;
  const double qvz = measure.radial_density(v_plus_z_norm);
  return qvz >= qv ? 1.0 : qvz / qv;
}

inline double coalescence_probability(const RadialLevyMeasure& measure,
                                      std::span<const double> v, std::span<const double> z,
                                      double m) {
  std::vector<double> vz(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) vz[i] = v[i] + z[i];
  return coalescence_probability_radii(measure, norm(v), norm(vz), m);
}

struct TruncationParams {
  double m = 1.0;   // mirror/synchronous split radius
  double eta = 0.0; // small-jump simulation cutoff, 0 < eta < m
};

struct TruncationOptions {
  double variance_budget_rel = 1e-3;  // residual small-jump variance / C_eps
  int max_doublings = 16;
  QuadratureOptions quad{};
  OverlapOptions overlap{};
};

/// Residual variance of the omitted small jumps, int_{|v| < eta} |v|^2 nu(dv).
inline double residual_small_jump_variance(const RadialLevyMeasure& measure, double eta) {
  return measure.shell_second_moment(0.0, eta);
}

/// Picks the truncation radius m by a doubling search from max(1, 2 delta):
/// m must retain at least the untruncated small-jump second moment
///   int_{-eps/2}^{0} y^2 nu_1^m(dy) >= int_{-eps/4}^{0} y^2 nu_1(dy)
/// and at least half of the untruncated overlap constant. The simulation
/// cutoff eta is then set from the small-jump variance budget.
inline TruncationParams select_truncation(const RadialLevyMeasure& measure, double eps,
                                          double delta, const TruncationOptions& opts = {}) {
  if (!(eps > 0.0) || !(delta > 0.0) || eps > delta) {
    throw std::domain_error("select_truncation: need 0 < eps <= delta");
  }
  const double c_eps = c_epsilon(measure, eps, opts.quad);  // Assumption-4 gate
  const double moment_target = 0.5 * c_eps;                 // int_{-eps/4}^0 y^2 nu_1
  const double overlap_full = overlap_infimum(measure, delta, kInf, opts.overlap);
  if (!(overlap_full > 0.0)) {
    throw FeasibilityError(Assumption::Overlap,
                           "overlap constant vanishes for delta = " + std::to_string(delta));
  }

  const double m0 = std::max(1.0, 2.0 * delta);
  double m = m0;
  bool moment_ok = false;
  bool overlap_ok = false;
  for (int k = 0; k <= opts.max_doublings; ++k, m *= 2.0) {
    const MarginalMeasure marg_m = marginal_density(measure, m, opts.quad);
    const double retained = marg_m.second_moment(0.0, 0.5 * eps);
    moment_ok = retained >= moment_target * (1.0 - 1e-9);
    overlap_ok =
        overlap_infimum(measure, delta, m, opts.overlap) >= 0.5 * overlap_full * (1.0 - 1e-9);
    if (moment_ok && overlap_ok) {
      TruncationParams out;
      out.m = m;
      out.eta = [&] {
        const double budget = opts.variance_budget_rel * c_eps;
        if (residual_small_jump_variance(measure, 1e-12) > budget) return 1e-12;
        if (measure.kind == MeasureKind::AlphaStable) {
          const double p = 2.0 - measure.alpha;
          return std::pow(budget * p / sphere_surface(measure.dimension), 1.0 / p);
        }
        // Finite-activity or tabulated kinds: grow eta while the residual
        // stays within budget.
        double lo = 0.0;
        double hi = m;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (residual_small_jump_variance(measure, mid) <= budget) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        return lo;
      }();
      out.eta = std::min(out.eta, 0.5 * m);
      if (!(out.eta > 0.0)) out.eta = std::min(0.5 * m, 1e-12);
      log_info("select_truncation: m = " + std::to_string(out.m) +
               ", eta = " + std::to_string(out.eta) +
               " (jump rate " + std::to_string(measure.tail_mass(out.eta)) + ")");
      return out;
    }
  }
  if (!moment_ok) {
    throw FeasibilityError(
        Assumption::SmallJumpActivity,
        "no truncation radius up to " + std::to_string(m / 2.0) +
            " retains the small-jump second moment target (truncated marginal too thin)");
  }
  throw FeasibilityError(Assumption::Overlap,
                         "no truncation radius up to " + std::to_string(m / 2.0) +
                             " retains half of the untruncated overlap constant");
}

/// Radius sampler for the compound-Poisson part {|v| > eta}.
class JumpSampler {
 public:
  JumpSampler(const RadialLevyMeasure& measure, double eta) : measure_(measure), eta_(eta) {
    if (!(eta > 0.0)) throw ConfigError("JumpSampler: eta must be positive");
    rate_ = measure.tail_mass(eta);
    if (!std::isfinite(rate_)) {
      throw ConfigError("JumpSampler: jump rate above eta is not finite");
    }
    if (measure.kind == MeasureKind::TabulatedRadial && rate_ > 0.0) {
      build_tabulated_inverse();
    }
  }

  double rate() const { return rate_; }

  double sample_radius(RngStream& rng) const {
    switch (measure_.kind) {
      case MeasureKind::AlphaStable:
        return eta_ * std::pow(rng.u01_open(), -1.0 / measure_.alpha);
      case MeasureKind::ShellUniform: {
        const double lo = std::max(eta_, measure_.theta / measure_.beta);
        return lo + (measure_.theta - lo) * rng.u01();
      }
      case MeasureKind::TabulatedRadial: {
        const double target = rng.u01() * rate_;
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        std::size_t i = static_cast<std::size_t>(it - cum_.begin());
        if (i == 0) i = 1;
        if (i >= cum_.size()) i = cum_.size() - 1;
        const double seg_mass = cum_[i] - cum_[i - 1];
        const double frac = seg_mass > 0.0 ? (target - cum_[i - 1]) / seg_mass : 0.5;
        return grid_[i - 1] + frac * (grid_[i] - grid_[i - 1]);
      }
    }
    return eta_;
  }

 private:
  void build_tabulated_inverse() {
    const double lo = std::max(eta_, measure_.radial_table.x_min());
    const double hi = measure_.radial_table.x_max();
    const int n = 4096;
    grid_.resize(n + 1);
    cum_.assign(n + 1, 0.0);
    const double surf = sphere_surface(measure_.dimension);
    const int d = measure_.dimension;
    for (int i = 0; i <= n; ++i) {
      grid_[i] = lo + (hi - lo) * static_cast<double>(i) / n;
    }
    for (int i = 1; i <= n; ++i) {
      const double mass = integrate(
          [&](double s) { return surf * std::pow(s, d - 1) * measure_.radial_density(s); },
          grid_[i - 1], grid_[i]);
      cum_[i] = cum_[i - 1] + std::max(0.0, mass);
    }
    rate_ = cum_.back();
  }

  RadialLevyMeasure measure_;
  double eta_;
  double rate_ = 0.0;
  std::vector<double> grid_, cum_;  // tabulated-radial inverse-CDF data
};

struct TimedJump {
  double time;
  std::vector<double> v;
};

/// Jumps of the process on (0, horizon]: Poisson times at rate nu({|v|>eta}),
/// radii from the normalized radial tail, directions uniform on the sphere.
/// Deterministic given the stream.
inline std::vector<TimedJump> sample_jumps(const RadialLevyMeasure& measure,
                                           const TruncationParams& trunc, double horizon,
                                           RngStream& rng) {
  std::vector<TimedJump> out;
  if (horizon <= 0.0) return out;
  const JumpSampler sampler(measure, trunc.eta);
  if (sampler.rate() <= 0.0) return out;
  double t = rng.exponential(sampler.rate());
  std::vector<double> dir(measure.dimension);
  while (t <= horizon) {
    const double r = sampler.sample_radius(rng);
    rng.unit_vector(measure.dimension, dir.data());
    TimedJump j;
    j.time = t;
    j.v.resize(measure.dimension);
    for (int i = 0; i < measure.dimension; ++i) j.v[i] = r * dir[i];
    out.push_back(std::move(j));
    t += rng.exponential(sampler.rate());
  }
  return out;
}

}  // namespace levycouple
