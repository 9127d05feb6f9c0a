#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace levycouple {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standing assumptions of the mirror-coupling contraction method.
/// Feasibility failures are always reported against one of these.
enum class Assumption {
  RotationalInvariance = 1,  // jump density depends on |v| only
  AbsoluteContinuity = 2,    // jump measure has a density
  Overlap = 3,               // inf over displacements of the density/translate overlap is positive
  SmallJumpActivity = 4,     // positive mass of jumps of size <= eps/2
  Dissipativity = 5,         // drift profile kappa positive at infinity
};

inline const char* assumption_name(Assumption a) {
  switch (a) {
    case Assumption::RotationalInvariance: return "Assumption 1 (rotational invariance)";
    case Assumption::AbsoluteContinuity: return "Assumption 2 (absolutely continuous jump measure)";
    case Assumption::Overlap: return "Assumption 3 (overlap of jump density and its translate)";
    case Assumption::SmallJumpActivity: return "Assumption 4 (small-jump activity)";
    case Assumption::Dissipativity: return "Assumption 5 (dissipativity at infinity)";
  }
  return "unknown assumption";
}

/// A parameter set under which the method's constants cannot be positive.
class FeasibilityError : public std::runtime_error {
 public:
  FeasibilityError(Assumption which, const std::string& detail)
      : std::runtime_error(std::string(assumption_name(which)) + ": " + detail),
        which_(which) {}
  Assumption which() const { return which_; }

 private:
  Assumption which_;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Verbosity from LEVYCOUPLE_LOG: silent by default, "info" or "debug".
inline int log_verbosity() {
  static const int level = [] {
    const char* v = std::getenv("LEVYCOUPLE_LOG");
    if (v == nullptr) return 0;
    const std::string s(v);
    if (s == "debug" || s == "2") return 2;
    if (s == "info" || s == "1") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_verbosity() >= 1) std::cerr << "[levycouple] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_verbosity() >= 2) std::cerr << "[levycouple:debug] " << msg << "\n";
}

/// Surface area of the unit sphere S^{d-1} in R^d. sphere_surface(1) = 2
/// counts the two endpoints of the interval, which is the correct weight
/// for radial integrals in d = 1.
inline double sphere_surface(int d) {
  if (d < 1) throw std::domain_error("sphere_surface: dimension must be >= 1");
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

inline double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace levycouple
