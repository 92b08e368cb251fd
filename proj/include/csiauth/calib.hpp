// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::calib {

/// Per-time-sample quantities removed by calibrate(); each has length T.
struct CalibReport {
  std::vector<double> cfo_offset_removed;
  std::vector<double> trend_slope;      // radians per subcarrier index
  std::vector<double> trend_intercept;  // radians
  std::vector<double> mean_removed;     // radians
};

enum class OffsetScope {
  per_sample,  // one median phase per time sample (packet)
  global,      // one median over the whole capture
};

struct CfoResult {
  CsiMatrix matrix;
  std::vector<double> offsets;  // length T; constant when scope is global
};

/// Rotates each column by minus the median of its wrapped phases.
CfoResult remove_cfo(const CsiMatrix& m, OffsetScope scope = OffsetScope::per_sample);

/// Adds multiples of 2*pi so consecutive differences fall in (-pi, pi].
std::vector<double> unwrap_phase(std::span<const double> phases);

struct Detrended {
  std::vector<double> residual;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Removes the least-squares line over index k.
Detrended detrend_phase(std::span<const double> phases);

/// Subtracts the mean.
std::vector<double> normalize_phase(std::span<const double> phases);

struct Calibrated {
  CsiMatrix matrix;
  CalibReport report;
};

/// remove_cfo, then per time sample: unwrap over k, detrend, normalize.
/// Amplitudes pass through; only phase is rewritten.
Calibrated calibrate(const CsiMatrix& m, OffsetScope scope = OffsetScope::per_sample);

}  // namespace csiauth::calib
