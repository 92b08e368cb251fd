// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace csiauth::stats {

double mean(std::span<const double> x);
/// Population (1/n) variance.
double variance_population(std::span<const double> x);
/// Sample (1/(n-1)) variance.
double variance_sample(std::span<const double> x);
double std_sample(std::span<const double> x);
double std_population(std::span<const double> x);

/// Median; for even n the mean of the two central order statistics.
double median(std::span<const double> x);

/// Quantile by linear interpolation between order statistics (the
/// "inclusive" convention: position q * (n - 1) in the sorted sample).
double quantile(std::span<const double> x, double q);
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace csiauth::stats
