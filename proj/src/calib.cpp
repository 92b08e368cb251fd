// SPDX-License-Identifier: Apache-2.0
#include "csiauth/calib.hpp"

#include <cmath>
#include <numbers>

#include "csiauth/stats.hpp"

namespace csiauth::calib {

using std::numbers::pi;

CfoResult remove_cfo(const CsiMatrix& m, OffsetScope scope) {
  const std::size_t K = m.subcarriers();
  const std::size_t T = m.samples();
  CfoResult out{m, std::vector<double>(T, 0.0)};

  if (scope == OffsetScope::global) {
    std::vector<double> all;
    all.reserve(K * T);
    for (const auto& v : m.values()) all.push_back(std::arg(v));
    const double offset = all.empty() ? 0.0 : stats::median(all);
    std::fill(out.offsets.begin(), out.offsets.end(), offset);
  } else {
    std::vector<double> column(K);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < K; ++k) column[k] = m.phase(k, t);
      out.offsets[t] = stats::median(column);
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const Complex rot = std::polar(1.0, -out.offsets[t]);
    for (std::size_t k = 0; k < K; ++k) out.matrix(k, t) = m(k, t) * rot;
  }
  return out;
}

std::vector<double> unwrap_phase(std::span<const double> phases) {
  std::vector<double> out(phases.begin(), phases.end());
  double correction = 0.0;
  for (std::size_t i = 1; i < phases.size(); ++i) {
    const double d = phases[i] - phases[i - 1];
    double wrapped = std::fmod(d + pi, 2.0 * pi);
    if (wrapped < 0.0) wrapped += 2.0 * pi;
    wrapped -= pi;
    // A jump of exactly +pi stays +pi rather than folding to -pi.
    if (wrapped == -pi && d > 0.0) wrapped = pi;
    if (std::abs(d) >= pi) correction += wrapped - d;
    out[i] = phases[i] + correction;
  }
  return out;
}

Detrended detrend_phase(std::span<const double> phases) {
  const std::size_t n = phases.size();
  Detrended out;
  out.residual.assign(phases.begin(), phases.end());
  if (n == 0) return out;
  if (n == 1) {
    out.intercept = phases[0];
    out.residual[0] = 0.0;
    return out;
  }
  const double x_mean = 0.5 * static_cast<double>(n - 1);
  const double y_mean = stats::mean(phases);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = static_cast<double>(k) - x_mean;
    sxy += dx * (phases[k] - y_mean);
    sxx += dx * dx;
  }
  out.slope = sxy / sxx;
  out.intercept = y_mean - out.slope * x_mean;
  for (std::size_t k = 0; k < n; ++k) {
    out.residual[k] = phases[k] - (out.intercept + out.slope * static_cast<double>(k));
  }
  return out;
}

std::vector<double> normalize_phase(std::span<const double> phases) {
  const double mu = stats::mean(phases);
  std::vector<double> out(phases.begin(), phases.end());
  for (auto& v : out) v -= mu;
  return out;
}

Calibrated calibrate(const CsiMatrix& m, OffsetScope scope) {
  const std::size_t K = m.subcarriers();
  const std::size_t T = m.samples();
  auto cfo = remove_cfo(m, scope);

  Calibrated out{std::move(cfo.matrix), {}};
  out.report.cfo_offset_removed = std::move(cfo.offsets);
  out.report.trend_slope.resize(T);
  out.report.trend_intercept.resize(T);
  out.report.mean_removed.resize(T);

  std::vector<double> column(K);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) column[k] = out.matrix.phase(k, t);
    const auto unwrapped = unwrap_phase(column);
    const auto trend = detrend_phase(unwrapped);
    const double mu = stats::mean(trend.residual);
    const auto centered = normalize_phase(trend.residual);
    out.report.trend_slope[t] = trend.slope;
    out.report.trend_intercept[t] = trend.intercept;
    out.report.mean_removed[t] = mu;
    for (std::size_t k = 0; k < K; ++k) {
      out.matrix(k, t) = std::polar(std::abs(m(k, t)), centered[k]);
    }
  }
  return out;
}

}  // namespace csiauth::calib
