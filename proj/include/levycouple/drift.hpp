#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/quadrature.hpp"

namespace levycouple {

enum class DriftKind { Linear, DoubleWell, StepProfile };

/// Drift field together with its contraction profile kappa, where kappa(r)
/// is the largest constant with <b(x)-b(y), x-y> <= -kappa(r) |x-y|^2 over
/// pairs at distance r, and a one-sided Lipschitz constant C_L.
///
/// Builtins:
///   linear       b(x) = -M x,        kappa(r) = M
///   double-well  b(x) = x - x^3,     kappa(r) = r^2/4 - 1 (d = 1)
///   step-profile kappa(r) = M 1[r >= R]; profile only, no field to simulate
struct DriftSpec {
  DriftKind kind = DriftKind::Linear;
  int dimension = 1;
  double strength = 1.0;  // M
  double radius = 1.0;    // R for the step profile
  double c_l = 0.0;       // one-sided Lipschitz constant

  static DriftSpec linear(int d, double M) {
    DriftSpec s;
    s.kind = DriftKind::Linear;
    s.dimension = d;
    s.strength = M;
    s.c_l = std::max(0.0, -M);
    return s;
  }

  static DriftSpec double_well() {
    DriftSpec s;
    s.kind = DriftKind::DoubleWell;
    s.dimension = 1;
    s.c_l = 1.0;  // sup of -kappa = -(r^2/4 - 1) at r = 0
    return s;
  }

  static DriftSpec step_profile(double M, double R) {
    if (!(M > 0.0) || !(R >= 0.0)) {
      throw ConfigError("step_profile: need M > 0 and R >= 0");
    }
    DriftSpec s;
    s.kind = DriftKind::StepProfile;
    s.dimension = 1;
    s.strength = M;
    s.radius = R;
    s.c_l = 0.0;
    return s;
  }

  bool has_field() const { return kind != DriftKind::StepProfile; }

  void field(std::span<const double> x, std::span<double> out) const {
    switch (kind) {
      case DriftKind::Linear:
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -strength * x[i];
        return;
      case DriftKind::DoubleWell:
        out[0] = x[0] - x[0] * x[0] * x[0];
        return;
      case DriftKind::StepProfile:
        throw std::domain_error("step-profile drift has no vector field to evaluate");
    }
  }

  double kappa(double r) const {
    switch (kind) {
      case DriftKind::Linear: return strength;
      case DriftKind::DoubleWell: return 0.25 * r * r - 1.0;
      case DriftKind::StepProfile: return r >= radius ? strength : 0.0;
    }
    return 0.0;
  }

  std::function<double(double)> kappa_fn() const {
    return [*this](double r) { return kappa(r); };
  }
};

/// Brute-force profile oracle in d = 1: minimizes
/// -(b(x+r) - b(x)) r / r^2 over x on a grid in [x_lo, x_hi].
inline double kappa_oracle_1d(const std::function<double(double)>& b, double r, double x_lo,
                              double x_hi, int grid_n) {
  if (!(r > 0.0)) throw std::domain_error("kappa_oracle_1d: r must be positive");
  if (grid_n < 2) throw std::domain_error("kappa_oracle_1d: need at least 2 grid points");
  double best = kInf;
  for (int i = 0; i < grid_n; ++i) {
    const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / (grid_n - 1);
    const double val = -(b(x + r) - b(x)) / r;
    if (!std::isfinite(val)) {
      throw std::domain_error("kappa_oracle_1d: drift is not finite on the search grid");
    }
    best = std::min(best, val);
  }
  return best;
}

/// Default one-sided Lipschitz constant from a profile: max(0, sup kappa^-)
/// over the grid, plus a whisker of slack.
inline double one_sided_lipschitz_from_profile(const std::function<double(double)>& kappa,
                                               double r_max, int grid_n = 4096) {
  double sup_neg = 0.0;
  for (int i = 0; i <= grid_n; ++i) {
    const double r = r_max * static_cast<double>(i) / grid_n;
    sup_neg = std::max(sup_neg, -kappa(r));
  }
  return sup_neg > 0.0 ? sup_neg + 1e-9 : 0.0;
}

/// Checks dissipativity at infinity on the last decade of [0, r_max].
inline void check_dissipativity(const std::function<double(double)>& kappa, double r_max,
                                int grid_n = 1024) {
  double tail_min = kInf;
  for (int i = 0; i <= grid_n; ++i) {
    const double r = 0.1 * r_max + 0.9 * r_max * static_cast<double>(i) / grid_n;
    tail_min = std::min(tail_min, kappa(r));
  }
  if (!(tail_min > 0.0)) {
    throw FeasibilityError(Assumption::Dissipativity,
                           "kappa is not positive on the tail decade of [0, " +
                               std::to_string(r_max) + "] (min " + std::to_string(tail_min) +
                               ")");
  }
}

/// R0 = inf{R >= 0 : kappa >= 0 on [R, r_max]}; grid scan refined by
/// bisection at the last sign change.
inline double radius_R0(const std::function<double(double)>& kappa, double r_max,
                        int grid_n = 8192, double tol = 1e-6) {
  check_dissipativity(kappa, r_max);
  int last_neg = -1;
  std::vector<double> vals(grid_n + 1);
  for (int i = 0; i <= grid_n; ++i) {
    const double r = r_max * static_cast<double>(i) / grid_n;
    vals[i] = kappa(r);
    if (vals[i] < 0.0) last_neg = i;
  }
  if (last_neg < 0) return 0.0;
  if (last_neg == grid_n) {
    throw FeasibilityError(Assumption::Dissipativity,
                           "kappa is negative at the top of the search range");
  }
  const double lo = r_max * static_cast<double>(last_neg) / grid_n;
  const double hi = r_max * static_cast<double>(last_neg + 1) / grid_n;
  return bisect_threshold([&](double r) { return kappa(r) >= 0.0; }, lo, hi, tol);
}

/// R1 = inf{R >= R0 + eps : kappa(r) >= 2 C_eps / ((R - R0) R) for all
/// r in [R, r_max]}. Uses a suffix minimum of kappa over the grid so each
/// candidate costs O(1), then refines by bisection.
inline double radius_R1(const std::function<double(double)>& kappa, double r0, double eps,
                        double c_eps, double r_max, int grid_n = 8192, double tol = 1e-6) {
  if (!(c_eps > 0.0)) throw std::domain_error("radius_R1: C_eps must be positive");
  const double start = r0 + eps;
  if (start >= r_max) {
    throw FeasibilityError(Assumption::Dissipativity, "search range ends below R0 + eps");
  }
  std::vector<double> grid(grid_n + 1), suffix_min(grid_n + 1);
  for (int i = 0; i <= grid_n; ++i) {
    grid[i] = start + (r_max - start) * static_cast<double>(i) / grid_n;
  }
  suffix_min[grid_n] = kappa(grid[grid_n]);
  for (int i = grid_n - 1; i >= 0; --i) {
    suffix_min[i] = std::min(kappa(grid[i]), suffix_min[i + 1]);
  }
  const auto threshold = [&](double R) { return 2.0 * c_eps / ((R - r0) * R); };
  const auto admissible = [&](double R) {
    // min of kappa over [R, r_max]: exact on the grid suffix, plus a fine
    // scan of the partial cell containing R.
    const double u = (R - start) / (r_max - start) * grid_n;
    int idx = static_cast<int>(std::ceil(u - 1e-12));
    if (idx < 0) idx = 0;
    double m = idx <= grid_n ? suffix_min[idx] : kappa(r_max);
    const double cell_hi = idx <= grid_n ? grid[idx] : r_max;
    for (int k = 0; k <= 32; ++k) {
      const double r = R + (cell_hi - R) * static_cast<double>(k) / 32;
      m = std::min(m, kappa(r));
    }
    return m >= threshold(R) - 1e-12;
  };
  int first_ok = -1;
  for (int i = 0; i <= grid_n; ++i) {
    if (suffix_min[i] >= threshold(grid[i]) - 1e-12) {
      first_ok = i;
      break;
    }
  }
  if (first_ok < 0) {
    throw FeasibilityError(
        Assumption::Dissipativity,
        "no admissible R1 up to r_max = " + std::to_string(r_max) +
            "; kappa tail too weak for C_eps = " + std::to_string(c_eps));
  }
  if (first_ok == 0) return start;
  return bisect_threshold(admissible, grid[first_ok - 1], grid[first_ok], tol);
}

}  // namespace levycouple
