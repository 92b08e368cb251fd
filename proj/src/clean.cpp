// SPDX-License-Identifier: Apache-2.0
#include "csiauth/clean.hpp"

#include <algorithm>
#include <cmath>

#include "csiauth/error.hpp"
#include "csiauth/stats.hpp"

namespace csiauth::clean {

std::vector<double> subcarrier_energy(const CsiMatrix& m) {
  std::vector<double> energy(m.subcarriers(), 0.0);
  for (std::size_t k = 0; k < m.subcarriers(); ++k) {
    double acc = 0.0;
    for (const auto& v : m.subcarrier(k)) acc += std::norm(v);
    energy[k] = acc / static_cast<double>(m.samples());
  }
  return energy;
}

EnergyFence iqr_fence(const std::vector<double>& energy) {
  std::vector<double> sorted = energy;
  std::sort(sorted.begin(), sorted.end());
  EnergyFence f;
  f.q1 = stats::quantile_sorted(sorted, 0.25);
  f.q3 = stats::quantile_sorted(sorted, 0.75);
  const double iqr = f.q3 - f.q1;
  f.lower = f.q1 - 1.5 * iqr;
  f.upper = f.q3 + 1.5 * iqr;
  return f;
}

IqrResult iqr_subcarrier_filter(const CsiMatrix& m) {
  const std::size_t K = m.subcarriers();
  if (K < 4) {
    throw Error(ErrorCode::too_few_subcarriers_remain, "IQR filtering needs at least 4 subcarriers");
  }
  const auto energy = subcarrier_energy(m);
  IqrResult out;
  out.fence = iqr_fence(energy);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < K; ++k) {
    if (energy[k] >= out.fence.lower && energy[k] <= out.fence.upper) {
      keep.push_back(k);
    } else {
      out.removed_indices.push_back(k);
    }
  }
  if (keep.size() < 2) {
    throw Error(ErrorCode::too_few_subcarriers_remain,
                "IQR filter left " + std::to_string(keep.size()) + " subcarriers");
  }
  out.matrix = out.removed_indices.empty() ? m : m.keep_subcarriers(keep);
  return out;
}

std::vector<bool> mad_flags(const std::vector<double>& series, std::size_t window) {
  const std::size_t T = series.size();
  const std::size_t half = window / 2;
  std::vector<bool> flags(T, false);
  std::vector<double> buf(window);
  std::vector<double> dev(window);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t start = std::min(t > half ? t - half : 0, T - window);
    std::copy_n(series.begin() + static_cast<std::ptrdiff_t>(start), window, buf.begin());
    const double med = stats::median(buf);
    for (std::size_t i = 0; i < window; ++i) dev[i] = std::abs(buf[i] - med);
    const double mad = stats::median(dev);
    flags[t] = std::abs(series[t] - med) > kMadThreshold * mad;
  }
  return flags;
}

MadResult mad_temporal_repair(const CsiMatrix& m, std::size_t window) {
  const std::size_t K = m.subcarriers();
  const std::size_t T = m.samples();
  if (window % 2 == 0 || window < 3) {
    throw Error(ErrorCode::invalid_config, "MAD window must be odd and at least 3");
  }
  if (window > T) {
    throw Error(ErrorCode::window_too_large,
                "MAD window " + std::to_string(window) + " exceeds T=" + std::to_string(T));
  }
  MadResult out{m, 0, {}, {}};
  std::vector<double> amp(T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) amp[t] = m.amplitude(k, t);
    const auto flags = mad_flags(amp, window);
    const auto n_flagged = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    if (n_flagged == 0) continue;
    if (n_flagged == T) {
      out.all_flagged.push_back(k);
      continue;
    }
    std::size_t prev = T;  // last unflagged index, T when none seen yet
    for (std::size_t t = 0; t < T; ++t) {
      if (!flags[t]) {
        prev = t;
        continue;
      }
      std::size_t next = t + 1;
      while (next < T && flags[next]) ++next;
      double repaired = 0.0;
      if (prev == T) {
        repaired = amp[next];
      } else if (next == T) {
        repaired = amp[prev];
      } else {
        const double frac = static_cast<double>(t - prev) / static_cast<double>(next - prev);
        repaired = amp[prev] + frac * (amp[next] - amp[prev]);
      }
      const Complex v = m(k, t);
      const double a = std::abs(v);
      out.matrix(k, t) = a > 0.0 ? v * (repaired / a) : Complex(repaired, 0.0);
      out.repaired.push_back(k * T + t);
      ++out.repaired_count;
    }
  }
  out.matrix.meta.cleaned = true;
  return out;
}

std::vector<double> zscore_spectrum(const CsiMatrix& m) {
  const std::size_t K = m.subcarriers();
  const std::size_t T = m.samples();
  std::vector<double> z(K * T, 0.0);
  std::vector<double> amp(T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < T; ++t) amp[t] = m.amplitude(k, t);
    const auto [lo, hi] = std::minmax_element(amp.begin(), amp.end());
    if (*lo == *hi) continue;
    const double mu = stats::mean(amp);
    const double sd = stats::std_population(amp);
    for (std::size_t t = 0; t < T; ++t) z[k * T + t] = (amp[t] - mu) / sd;
  }
  return z;
}

}  // namespace csiauth::clean
