#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rauq/error.hpp"

namespace rauq::stats {

template <typename T>
double sum_log_floored(std::span<const T> xs, double floor) {
  double sum = 0.0;
  for (const T x : xs) sum += std::log(std::max(static_cast<double>(x), floor));
  return sum;
}

// -(1/n) * sum(log(max(x, floor)))
template <typename T>
double neg_mean_log(std::span<const T> xs, double floor) {
  return -sum_log_floored(xs, floor) / static_cast<double>(xs.size());
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("mean of an empty sequence");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Even-length input averages the two middle order statistics.
inline double median(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("median of an empty sequence");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double max(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("max of an empty sequence");
  return *std::max_element(xs.begin(), xs.end());
}

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

}  // namespace rauq::stats
