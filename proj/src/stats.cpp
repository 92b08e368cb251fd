// SPDX-License-Identifier: Apache-2.0
#include "csiauth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csiauth::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

namespace {

// Shifted by the first element, so a constant sample gives exactly zero.
double sum_squared_deviation(std::span<const double> x) {
  const double pivot = x.front();
  double shift_sum = 0.0;
  for (double v : x) shift_sum += v - pivot;
  const double shift_mean = shift_sum / static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) {
    const double d = (v - pivot) - shift_mean;
    acc += d * d;
  }
  return acc;
}

}  // namespace

double variance_population(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return sum_squared_deviation(x) / static_cast<double>(x.size());
}

double variance_sample(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return sum_squared_deviation(x) / static_cast<double>(x.size() - 1);
}

double std_sample(std::span<const double> x) { return std::sqrt(variance_sample(x)); }
double std_population(std::span<const double> x) { return std::sqrt(variance_population(x)); }

double median(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("median of empty sample");
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> x, double q) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, q);
}

}  // namespace csiauth::stats
