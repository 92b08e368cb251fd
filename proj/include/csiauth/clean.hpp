// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::clean {

struct EnergyFence {
  double q1 = 0.0;
  double q3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct IqrResult {
  CsiMatrix matrix;
  std::vector<std::size_t> removed_indices;  // ascending, in input numbering
  EnergyFence fence;
};

/// Mean energy per subcarrier, E(f_k) = mean_t |H(f_k, t)|^2.
std::vector<double> subcarrier_energy(const CsiMatrix& m);

/// [Q1 - 1.5 IQR, Q3 + 1.5 IQR] over `energy`, quartiles by linear interpolation.
EnergyFence iqr_fence(const std::vector<double>& energy);

/// Drops subcarriers whose mean energy lies outside the closed IQR fence.
/// Single pass; requires K >= 4 and at least 2 survivors.
IqrResult iqr_subcarrier_filter(const CsiMatrix& m);

struct MadResult {
  CsiMatrix matrix;
  std::size_t repaired_count = 0;
  // Subcarriers where every sample was flagged; left untouched.
  std::vector<std::size_t> all_flagged;
  // Flat (k * T + t) indices of repaired entries, ascending.
  std::vector<std::size_t> repaired;
};

inline constexpr double kMadThreshold = 6.0;

/// Per-sample outlier flags for one amplitude series using a rolling window
/// of odd width (shifted inward at the edges so it always holds `window`
/// samples). A sample is flagged when it deviates from the window median by
/// more than 6 raw MADs.
std::vector<bool> mad_flags(const std::vector<double>& series, std::size_t window);

/// Replaces flagged amplitudes by linear interpolation between the nearest
/// unflagged neighbours (edges clamp). Phase is preserved.
MadResult mad_temporal_repair(const CsiMatrix& m, std::size_t window);

/// Per-subcarrier amplitude z-scores over time (population std); constant
/// subcarriers map to 0. Returned K x T, row-major by subcarrier.
std::vector<double> zscore_spectrum(const CsiMatrix& m);

}  // namespace csiauth::clean
