// SPDX-License-Identifier: Apache-2.0
// Brute-force reference implementations. These transcribe the defining
// formulas directly and share no code with the library.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::oracle {

/// Every feature by name, computed with explicit loops over (k, t).
std::map<std::string, double> features(const CsiMatrix& m, double epsilon = 1e-12);

/// Pair counting: P(g > i) + 0.5 P(g == i).
double auc(std::span<const double> genuine, std::span<const double> impostor);

struct Eer {
  double eer = 0.0;
  double threshold = 0.0;
};
/// Exhaustive sweep over every attainable threshold (plus one above the
/// maximum), counting FAR and FRR from scratch at each.
Eer eer(std::span<const double> genuine, std::span<const double> impostor);

/// sum_i sum_j |x_i - x_j| / (2 n sum x).
double gini(std::span<const double> x);

/// Bootstrap EER samples: resample r draws genuine then impostor indices
/// (into the sorted score lists) from Rng(substream(seed, r)).
std::vector<double> bootstrap_eers(std::span<const double> genuine, std::span<const double> impostor,
                                   std::size_t resamples, std::uint64_t seed);

/// Greedy mRMR with every mutual information recomputed from entropy counts.
/// Returns the selected column order.
std::vector<std::size_t> mrmr(const FeatureMatrix& F, std::size_t k, std::size_t bins);

/// Equal-frequency codes: floor(#{x_j < x_i} * bins / n).
std::vector<int> rank_bins(std::span<const double> x, std::size_t bins);

/// I(a; b) = H(a) + H(b) - H(a, b) in bits.
double mutual_information(std::span<const int> a, std::span<const int> b);

/// Subcarriers whose mean |H|^2 lies outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR],
/// quartiles by linear interpolation over the sorted energies.
std::vector<std::size_t> iqr_outliers(const CsiMatrix& m);

/// Relative error |a - b| / max(1, |b|).
double rel_err(double a, double b);

}  // namespace csiauth::oracle
