#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace framefinder::numeric {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double value) noexcept {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Sum of `values` taken in ascending order, so the result does not depend
/// on the order in which the values were produced.
inline double order_independent_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  CompensatedSum acc;
  for (double v : sorted) acc.add(v);
  return acc.value();
}

inline double mean(std::span<const double> values) {
  return order_independent_sum(values) / static_cast<double>(values.size());
}

/// Sum of squared deviations from `center`.
inline double squared_deviation_sum(std::span<const double> values, double center) {
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) {
    const double d = v - center;
    sq.push_back(d * d);
  }
  return order_independent_sum(sq);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace framefinder::numeric
