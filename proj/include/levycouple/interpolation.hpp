#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace levycouple {

/// Shape-preserving cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Evaluates to 0 outside the grid.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
      throw std::invalid_argument("MonotoneCubic: need >= 2 matching points");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) {
        throw std::invalid_argument("MonotoneCubic: grid must be strictly increasing");
      }
    }
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    slope_.assign(n, 0.0);
    slope_[0] = d[0];
    slope_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        slope_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    // Clamp endpoint slopes to keep the first/last panel overshoot-free.
    for (std::size_t i : {std::size_t{0}, n - 1}) {
      const double dd = (i == 0) ? d[0] : d[n - 2];
      if (dd == 0.0) {
        slope_[i] = 0.0;
      } else if (slope_[i] / dd > 3.0) {
        slope_[i] = 3.0 * dd;
      } else if (slope_[i] / dd < 0.0) {
        slope_[i] = 0.0;
      }
    }
  }

  double operator()(double x) const {
    if (x_.empty() || x < x_.front() || x > x_.back()) return 0.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) i = 1;
    if (i >= x_.size()) i = x_.size() - 1;
    const std::size_t k = i - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[k] + h10 * h * slope_[k] + h01 * y_[k + 1] + h11 * h * slope_[k + 1];
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& ys() const { return y_; }

 private:
  std::vector<double> x_, y_;
  std::vector<double> slope_;
};

/// Uniform-grid table with linear interpolation on [0, step*(n-1)].
class UniformTable {
 public:
  UniformTable() = default;
  UniformTable(double step, std::vector<double> values)
      : step_(step), values_(std::move(values)) {
    if (step_ <= 0.0 || values_.size() < 2) {
      throw std::invalid_argument("UniformTable: need positive step and >= 2 values");
    }
  }

  double x_max() const { return step_ * static_cast<double>(values_.size() - 1); }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double back() const { return values_.back(); }

  /// Linear interpolation; clamps to the table range.
  double operator()(double x) const {
    if (x <= 0.0) return values_.front();
    const double u = x / step_;
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= values_.size()) return values_.back();
    const double t = u - static_cast<double>(i);
    return values_[i] + t * (values_[i + 1] - values_[i]);
  }

 private:
  double step_ = 0.0;
  std::vector<double> values_;
};

}  // namespace levycouple
