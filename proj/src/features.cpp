// SPDX-License-Identifier: Apache-2.0
#include "csiauth/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csiauth/error.hpp"
#include "csiauth/stats.hpp"

namespace csiauth::features {
namespace {

using std::numbers::pi;

struct Moments {
  double mean = 0.0;
  double sigma = 0.0;  // population
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments central_moments(std::span<const double> x) {
  Moments out;
  const double pivot = x.front();
  double shift = 0.0;
  for (double v : x) shift += v - pivot;
  shift /= static_cast<double>(x.size());
  out.mean = pivot + shift;
  double m2 = 0.0;
  for (double v : x) {
    const double d = (v - pivot) - shift;
    const double d2 = d * d;
    m2 += d2;
    out.m3 += d2 * d;
    out.m4 += d2 * d2;
  }
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  out.m3 /= n;
  out.m4 /= n;
  out.sigma = std::sqrt(m2);
  return out;
}

/// Amplitude (and optionally phase) of a window, row-major by subcarrier.
struct WindowData {
  std::size_t K = 0;
  std::size_t T = 0;
  std::vector<double> amp;
  std::vector<double> phase;

  explicit WindowData(const CsiMatrix& m, bool with_phase = false)
      : K(m.subcarriers()), T(m.samples()), amp(K * T) {
    const auto& v = m.values();
    for (std::size_t i = 0; i < v.size(); ++i) amp[i] = std::abs(v[i]);
    if (with_phase) {
      phase.resize(K * T);
      for (std::size_t i = 0; i < v.size(); ++i) phase[i] = std::arg(v[i]);
    }
  }

  std::span<const double> amp_row(std::size_t k) const { return {amp.data() + k * T, T}; }
  std::span<const double> phase_row(std::size_t k) const { return {phase.data() + k * T, T}; }

  /// Time-averaged magnitude per subcarrier.
  std::vector<double> mean_spectrum() const {
    std::vector<double> h(K);
    for (std::size_t k = 0; k < K; ++k) h[k] = stats::mean(amp_row(k));
    return h;
  }

  std::vector<double> energy() const {
    std::vector<double> e(K);
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (double a : amp_row(k)) acc += a * a;
      e[k] = acc / static_cast<double>(T);
    }
    return e;
  }
};

void require(bool ok, std::string_view group, std::string_view what) {
  if (!ok) {
    throw Error(ErrorCode::degenerate_input,
                std::string(group) + " features need " + std::string(what));
  }
}

/// sqrt(sum (x - ref)^2 / divisor)
double spread_about(std::span<const double> x, double ref, double divisor) {
  double acc = 0.0;
  for (double v : x) acc += (v - ref) * (v - ref);
  return std::sqrt(acc / divisor);
}

double entropy_bits(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double h = 0.0;
  for (double w : weights) {
    const double p = w / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

const std::vector<Group>& all_groups() {
  static const std::vector<Group> groups = {
      Group::amplitude, Group::phase,     Group::energy,      Group::spectral,
      Group::empirical_energy, Group::temporal, Group::stability, Group::correlation,
      Group::roughness, Group::curvature,
  };
  return groups;
}

std::string_view to_string(Group g) {
  switch (g) {
    case Group::amplitude: return "amplitude";
    case Group::phase: return "phase";
    case Group::energy: return "energy";
    case Group::spectral: return "spectral";
    case Group::empirical_energy: return "empirical_energy";
    case Group::temporal: return "temporal";
    case Group::stability: return "stability";
    case Group::correlation: return "correlation";
    case Group::roughness: return "roughness";
    case Group::curvature: return "curvature";
  }
  return "unknown";
}

Group group_from_string(std::string_view text) {
  for (auto g : all_groups()) {
    if (to_string(g) == text) return g;
  }
  throw Error(ErrorCode::invalid_config, "unknown feature group '" + std::string(text) + "'");
}

const std::vector<std::string>& feature_names(Group g) {
  static const std::vector<std::vector<std::string>> names = {
      {"amp_mean", "amp_mean_std", "amp_var_mean", "amp_var_std", "amp_skew_mean", "amp_kurt_mean"},
      {"phase_mean_mean", "phase_std_mean", "phase_std_std", "dphi_std_mean", "dphi_std_std"},
      {"energy_mean", "energy_skewness", "energy_kurtosis", "energy_entropy"},
      {"spec_centroid", "spec_entropy", "spec_flatness", "spectral_centroid_amp", "spectral_width"},
      {"energy_reflected_emp", "energy_absorbed_emp", "energy_refracted_emp"},
      {"temporal_variability_mean", "temporal_variability_std", "temporal_variability_cv"},
      {"stability_mean_cv", "stability_std_cv"},
      {"adjacent_correlation_mean", "adjacent_correlation_std"},
      {"spectral_roughness_mean", "spectral_roughness_std"},
      {"spectral_curvature_mean", "spectral_curvature_std"},
  };
  return names.at(static_cast<std::size_t>(g));
}

void validate(const FeatureSetConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::invalid_config, "epsilon must be positive");
}

FeatureVector amplitude_features(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  require(m.subcarriers() >= 2 && m.samples() >= 2, "amplitude", "K >= 2 and T >= 2");
  const WindowData w(m);
  const auto K = static_cast<double>(w.K);
  const auto T = static_cast<double>(w.T);

  std::vector<double> means(w.K);
  std::vector<double> vars(w.K);
  double skew_sum = 0.0;
  double kurt_sum = 0.0;
  bool degenerate = false;
  for (std::size_t k = 0; k < w.K; ++k) {
    const auto row = w.amp_row(k);
    const Moments mo = central_moments(row);
    means[k] = mo.mean;
    vars[k] = mo.sigma * mo.sigma * T / (T - 1.0);
    if (mo.sigma < cfg.epsilon) {
      degenerate = true;
      continue;
    }
    const double s2 = mo.sigma * mo.sigma;
    skew_sum += mo.m3 / (s2 * mo.sigma);
    kurt_sum += mo.m4 / (s2 * s2) - 3.0;
  }
  const double amp_mean = stats::mean(means);
  const double var_mean = stats::mean(vars);

  FeatureVector out;
  out.append("amp_mean", amp_mean);
  out.append("amp_mean_std", spread_about(means, amp_mean, K - 1.0));
  out.append("amp_var_mean", var_mean);
  out.append("amp_var_std", spread_about(vars, var_mean, K - 1.0));
  out.append("amp_skew_mean", skew_sum / K);
  out.append("amp_kurt_mean", kurt_sum / K);
  if (degenerate) {
    out.flags.emplace_back("amp_skew_mean:sigma_below_epsilon");
    out.flags.emplace_back("amp_kurt_mean:sigma_below_epsilon");
  }
  return out;
}

FeatureVector phase_features(const CsiMatrix& m, const FeatureSetConfig&) {
  require(m.subcarriers() >= 3 && m.samples() >= 2, "phase", "K >= 3 and T >= 2");
  const WindowData w(m, /*with_phase=*/true);
  const auto K = static_cast<double>(w.K);

  std::vector<double> means(w.K);
  std::vector<double> stds(w.K);
  for (std::size_t k = 0; k < w.K; ++k) {
    means[k] = stats::mean(w.phase_row(k));
    stds[k] = stats::std_sample(w.phase_row(k));
  }
  std::vector<double> dphi_stds(w.K - 1);
  std::vector<double> diff(w.T);
  for (std::size_t k = 0; k + 1 < w.K; ++k) {
    const auto lo = w.phase_row(k);
    const auto hi = w.phase_row(k + 1);
    for (std::size_t t = 0; t < w.T; ++t) diff[t] = hi[t] - lo[t];
    dphi_stds[k] = stats::std_sample(diff);
  }
  const double std_mean = stats::mean(stds);
  const double dphi_mean = stats::mean(dphi_stds);

  FeatureVector out;
  out.append("phase_mean_mean", stats::mean(means));
  out.append("phase_std_mean", std_mean);
  out.append("phase_std_std", spread_about(stds, std_mean, K - 1.0));
  out.append("dphi_std_mean", dphi_mean);
  out.append("dphi_std_std", spread_about(dphi_stds, dphi_mean, K - 2.0));
  return out;
}

FeatureVector energy_features(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  require(m.subcarriers() >= 2 && m.samples() >= 1, "energy", "K >= 2");
  const WindowData w(m);
  const auto e = w.energy();
  double total = 0.0;
  for (double v : e) total += v;
  if (!(total > 0.0)) throw Error(ErrorCode::zero_energy_window, "window has zero total energy");

  const Moments mo = central_moments(e);
  FeatureVector out;
  out.append("energy_mean", mo.mean);
  if (mo.sigma < cfg.epsilon) {
    out.append("energy_skewness", 0.0);
    out.append("energy_kurtosis", 0.0);
    out.flags.emplace_back("energy_skewness:sigma_below_epsilon");
    out.flags.emplace_back("energy_kurtosis:sigma_below_epsilon");
  } else {
    const double s2 = mo.sigma * mo.sigma;
    out.append("energy_skewness", mo.m3 / (s2 * mo.sigma));
    out.append("energy_kurtosis", mo.m4 / (s2 * s2) - 3.0);
  }
  out.append("energy_entropy", entropy_bits(e));
  return out;
}

FeatureVector spectral_features(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  require(m.subcarriers() >= 2 && m.samples() >= 1, "spectral", "K >= 2");
  const WindowData w(m);
  const auto h = w.mean_spectrum();
  const auto& f = m.freqs();
  double total = 0.0;
  for (double v : h) total += v;
  if (!(total > 0.0)) throw Error(ErrorCode::zero_spectrum, "window has an all-zero spectrum");

  double centroid_hz = 0.0;
  double centroid_idx = 0.0;
  double log_sum = 0.0;
  double floored_sum = 0.0;
  for (std::size_t k = 0; k < w.K; ++k) {
    centroid_hz += f[k] * h[k];
    centroid_idx += static_cast<double>(k + 1) * h[k];
    const double floored = std::max(h[k], cfg.epsilon);
    log_sum += std::log(floored);
    floored_sum += floored;
  }
  centroid_hz /= total;
  centroid_idx /= total;
  const auto K = static_cast<double>(w.K);
  const double flatness = std::min(1.0, std::exp(log_sum / K) / (floored_sum / K));

  double width = 0.0;
  for (std::size_t k = 0; k < w.K; ++k) {
    const double d = static_cast<double>(k + 1) - centroid_idx;
    width += d * d * h[k];
  }
  width = std::sqrt(width / total);

  FeatureVector out;
  out.append("spec_centroid", centroid_hz);
  out.append("spec_entropy", entropy_bits(h));
  out.append("spec_flatness", flatness);
  out.append("spectral_centroid_amp", centroid_idx);
  out.append("spectral_width", width);
  return out;
}

FeatureVector empirical_energy_features(const CsiMatrix& m, const FeatureSetConfig&) {
  require(m.subcarriers() >= 2 && m.samples() >= 1, "empirical_energy", "K >= 2");
  const WindowData w(m, /*with_phase=*/true);
  const auto e = w.energy();
  const double mu = stats::mean(e);
  if (!(mu > 0.0)) throw Error(ErrorCode::zero_energy_window, "window has zero total energy");

  double sigma_phi = 0.0;
  for (std::size_t k = 0; k < w.K; ++k) sigma_phi += stats::std_population(w.phase_row(k));
  const double refracted = sigma_phi / static_cast<double>(w.K) / pi;

  FeatureVector out;
  double reflected = 1.0;
  double absorbed = 1.0;
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  if (*lo == *hi) {
    out.flags.emplace_back("empirical_energy:degenerate_energy_split");
  } else {
    double above = 0.0, below = 0.0;
    std::size_t n_above = 0, n_below = 0;
    for (double v : e) {
      if (v >= mu) {
        above += v;
        ++n_above;
      } else {
        below += v;
        ++n_below;
      }
    }
    // Rounding in mu can empty one side even when the energies differ.
    if (n_above == 0 || n_below == 0) {
      out.flags.emplace_back("empirical_energy:degenerate_energy_split");
    } else {
      reflected = above / static_cast<double>(n_above) / mu;
      absorbed = below / static_cast<double>(n_below) / mu;
    }
  }
  const double total = reflected + absorbed + refracted;
  out.append("energy_reflected_emp", reflected / total);
  out.append("energy_absorbed_emp", absorbed / total);
  out.append("energy_refracted_emp", refracted / total);
  return out;
}

FeatureVector temporal_features(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  require(m.subcarriers() >= 2 && m.samples() >= 2, "temporal", "K >= 2 and T >= 2");
  const WindowData w(m);
  std::vector<double> stds(w.K);
  double grand = 0.0;
  for (std::size_t k = 0; k < w.K; ++k) {
    stds[k] = stats::std_sample(w.amp_row(k));
    grand += stats::mean(w.amp_row(k));
  }
  grand /= static_cast<double>(w.K);
  const double mean_std = stats::mean(stds);

  FeatureVector out;
  out.append("temporal_variability_mean", mean_std);
  out.append("temporal_variability_std",
             spread_about(stds, mean_std, static_cast<double>(w.K) - 1.0));
  if (grand < cfg.epsilon) {
    out.append("temporal_variability_cv", 0.0);
    out.flags.emplace_back("temporal_variability_cv:mean_below_epsilon");
  } else {
    out.append("temporal_variability_cv", mean_std / grand);
  }
  return out;
}

FeatureVector stability_features(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  require(m.subcarriers() >= 2 && m.samples() >= 2, "stability", "K >= 2 and T >= 2");
  const WindowData w(m);
  std::vector<double> cv(w.K);
  bool degenerate = false;
  for (std::size_t k = 0; k < w.K; ++k) {
    const double mu = stats::mean(w.amp_row(k));
    if (mu < cfg.epsilon) {
      cv[k] = 0.0;
      degenerate = true;
    } else {
      cv[k] = stats::std_sample(w.amp_row(k)) / mu;
    }
  }
  const double mean_cv = stats::mean(cv);
  FeatureVector out;
  out.append("stability_mean_cv", mean_cv);
  out.append("stability_std_cv", spread_about(cv, mean_cv, static_cast<double>(w.K) - 1.0));
  if (degenerate) out.flags.emplace_back("stability:mean_below_epsilon");
  return out;
}

FeatureVector correlation_features(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  require(m.subcarriers() >= 3 && m.samples() >= 3, "correlation", "K >= 3 and T >= 3");
  const WindowData w(m);
  std::vector<double> rho(w.K - 1);
  bool degenerate = false;
  for (std::size_t k = 0; k + 1 < w.K; ++k) {
    const auto a = w.amp_row(k);
    const auto b = w.amp_row(k + 1);
    const double ma = stats::mean(a);
    const double mb = stats::mean(b);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t t = 0; t < w.T; ++t) {
      cov += (a[t] - ma) * (b[t] - mb);
      va += (a[t] - ma) * (a[t] - ma);
      vb += (b[t] - mb) * (b[t] - mb);
    }
    const auto n = static_cast<double>(w.T);
    if (std::sqrt(va / n) < cfg.epsilon || std::sqrt(vb / n) < cfg.epsilon) {
      rho[k] = 0.0;
      degenerate = true;
    } else {
      rho[k] = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
    }
  }
  const double mean_rho = stats::mean(rho);
  FeatureVector out;
  out.append("adjacent_correlation_mean", mean_rho);
  out.append("adjacent_correlation_std",
             spread_about(rho, mean_rho, static_cast<double>(w.K) - 2.0));
  if (degenerate) out.flags.emplace_back("adjacent_correlation:zero_variance_pair");
  return out;
}

FeatureVector roughness_features(const CsiMatrix& m, const FeatureSetConfig&) {
  require(m.subcarriers() >= 3, "roughness", "K >= 3");
  const WindowData w(m);
  const auto h = w.mean_spectrum();
  std::vector<double> d(w.K - 1);
  for (std::size_t k = 0; k + 1 < w.K; ++k) d[k] = std::abs(h[k + 1] - h[k]);
  const double mu = stats::mean(d);
  FeatureVector out;
  out.append("spectral_roughness_mean", mu);
  out.append("spectral_roughness_std", spread_about(d, mu, static_cast<double>(w.K) - 2.0));
  return out;
}

FeatureVector curvature_features(const CsiMatrix& m, const FeatureSetConfig&) {
  require(m.subcarriers() >= 4, "curvature", "K >= 4");
  const WindowData w(m);
  const auto h = w.mean_spectrum();
  std::vector<double> d(w.K - 2);
  for (std::size_t k = 0; k + 2 < w.K; ++k) d[k] = std::abs(h[k + 2] - 2.0 * h[k + 1] + h[k]);
  const double mu = stats::mean(d);
  FeatureVector out;
  out.append("spectral_curvature_mean", mu);
  out.append("spectral_curvature_std", spread_about(d, mu, static_cast<double>(w.K) - 3.0));
  return out;
}

FeatureVector group_features(Group g, const CsiMatrix& m, const FeatureSetConfig& cfg) {
  switch (g) {
    case Group::amplitude: return amplitude_features(m, cfg);
    case Group::phase: return phase_features(m, cfg);
    case Group::energy: return energy_features(m, cfg);
    case Group::spectral: return spectral_features(m, cfg);
    case Group::empirical_energy: return empirical_energy_features(m, cfg);
    case Group::temporal: return temporal_features(m, cfg);
    case Group::stability: return stability_features(m, cfg);
    case Group::correlation: return correlation_features(m, cfg);
    case Group::roughness: return roughness_features(m, cfg);
    case Group::curvature: return curvature_features(m, cfg);
  }
  throw Error(ErrorCode::invalid_config, "unknown feature group");
}

FeatureVector extract_all(const CsiMatrix& m, const FeatureSetConfig& cfg) {
  validate(cfg);
  FeatureVector out;
  for (auto g : all_groups()) {
    if (!cfg.enabled_groups.contains(g)) continue;
    FeatureVector part;
    try {
      part = group_features(g, m, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "features[" + std::string(to_string(g)) + "]: " + e.what());
    }
    for (std::size_t i = 0; i < part.names.size(); ++i) out.append(part.names[i], part.values[i]);
    out.flags.insert(out.flags.end(), part.flags.begin(), part.flags.end());
  }
  return out;
}

std::vector<std::string> enabled_feature_names(const FeatureSetConfig& cfg) {
  std::vector<std::string> names;
  for (auto g : all_groups()) {
    if (!cfg.enabled_groups.contains(g)) continue;
    const auto& n = feature_names(g);
    names.insert(names.end(), n.begin(), n.end());
  }
  return names;
}

}  // namespace csiauth::features
