#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "levycouple/common.hpp"

namespace levycouple {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_depth = 52;
};

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double m, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth, int max_depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= max_depth || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

/// Adaptive Simpson on [a, b]. The integrand must be finite on [a, b].
template <typename F>
double integrate(const F& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, opts);
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb)) {
    throw std::domain_error("integrate: non-finite integrand value");
  }
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(whole));
  return detail::adaptive_simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 0, opts.max_depth);
}

/// Integral over (0, b] of an integrand with an integrable singularity (or a
/// steep power-law ramp) at 0. Sums adaptive panels over the dyadic partition
/// [b/2^{k+1}, b/2^k]; the discarded tail decays geometrically and is added
/// back by extrapolation from the last panel ratio.
template <typename F>
double integrate_left_singular(const F& f, double b, const QuadratureOptions& opts = {}) {
  if (b <= 0.0) return 0.0;
  double total = 0.0;
  double hi = b;
  double prev = 0.0;
  double piece = 0.0;
  for (int k = 0; k < 220; ++k) {
    const double lo = 0.5 * hi;
    prev = piece;
    piece = integrate(f, lo, hi, opts);
    total += piece;
    hi = lo;
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
    if (k > 6 && std::fabs(piece) <= 0.25 * tol) break;
  }
  if (prev != 0.0 && std::fabs(piece) < std::fabs(prev)) {
    const double ratio = std::fabs(piece / prev);
    total += piece * ratio / (1.0 - ratio);
  }
  return total;
}

/// Integral over [a, inf). Doubles panels [a 2^k, a 2^{k+1}] (shifted to
/// [a, a+1]... for a <= 0 callers should translate first) until the tail
/// stops contributing. Requires the integrand to decay at infinity.
template <typename F>
double integrate_to_infinity(const F& f, double a, const QuadratureOptions& opts = {}) {
  double lo = a;
  double width = std::max(1.0, std::fabs(a));
  double total = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double hi = lo + width;
    const double piece = integrate(f, lo, hi, opts);
    total += piece;
    lo = hi;
    width *= 2.0;
    if (std::fabs(piece) <= std::max(opts.abs_tol, opts.rel_tol * std::fabs(total)) && k > 2) {
      break;
    }
  }
  return total;
}

/// Cumulative trapezoid of samples y over grid x; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                                std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return out;
}


/// Root of a continuous scalar function by bisection; f(lo) and f(hi) must
/// bracket a sign change.
template <typename F>
double bisect_root(const F& f, double lo, double hi, double tol = 1e-12) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::domain_error("bisect_root: endpoints do not bracket a root");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Smallest x in [lo, hi] with pred(x) true, to within tol. pred must be
/// monotone (false then true) on the interval; pred(hi) must hold.
template <typename P>
double bisect_threshold(const P& pred, double lo, double hi, double tol = 1e-6) {
  if (pred(lo)) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Pairwise (cascade) summation: associative enough to be reproducible and
/// more accurate than a running sum on long arrays.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace levycouple
