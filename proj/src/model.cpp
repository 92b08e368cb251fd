// SPDX-License-Identifier: Apache-2.0
#include "csiauth/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "csiauth/error.hpp"

namespace csiauth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::file_not_found: return "FileNotFound";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::no_csi_frames: return "NoCsiFrames";
    case ErrorCode::truncated_frame: return "TruncatedFrame";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::unsupported_version: return "UnsupportedVersion";
    case ErrorCode::non_uniform_frequency_axis: return "NonUniformFrequencyAxis";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::too_few_subcarriers_remain: return "TooFewSubcarriersRemain";
    case ErrorCode::window_too_large: return "WindowTooLarge";
    case ErrorCode::zero_energy_window: return "ZeroEnergyWindow";
    case ErrorCode::zero_spectrum: return "ZeroSpectrum";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::degenerate_feature: return "DegenerateFeature";
    case ErrorCode::single_class: return "SingleClass";
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::degenerate_class: return "DegenerateClass";
    case ErrorCode::too_few_scores: return "TooFewScores";
    case ErrorCode::record_too_short: return "RecordTooShort";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::leakage_detected: return "LeakageDetected";
  }
  return "Unknown";
}

std::string_view to_string(Hand hand) {
  switch (hand) {
    case Hand::left: return "left";
    case Hand::right: return "right";
    case Hand::unspecified: return "unspecified";
  }
  return "unspecified";
}

Hand hand_from_string(std::string_view text) {
  if (text == "left") return Hand::left;
  if (text == "right") return Hand::right;
  if (text == "unspecified" || text.empty()) return Hand::unspecified;
  throw Error(ErrorCode::invalid_config, "unknown hand '" + std::string(text) + "'");
}

CsiMatrix::CsiMatrix(std::size_t subcarriers, std::size_t samples, std::vector<double> freqs)
    : subcarriers_(subcarriers),
      samples_(samples),
      freqs_(std::move(freqs)),
      values_(subcarriers * samples) {}

CsiMatrix::CsiMatrix(std::size_t subcarriers, std::size_t samples, std::vector<double> freqs,
                     std::vector<Complex> values)
    : subcarriers_(subcarriers),
      samples_(samples),
      freqs_(std::move(freqs)),
      values_(std::move(values)) {
  if (values_.size() != subcarriers_ * samples_) {
    throw Error(ErrorCode::length_mismatch, "CsiMatrix value count does not match K*T");
  }
}

CsiMatrix CsiMatrix::window(std::size_t start, std::size_t length) const {
  if (start + length > samples_) {
    throw Error(ErrorCode::record_too_short, "window exceeds matrix length");
  }
  CsiMatrix out(subcarriers_, length, freqs_);
  for (std::size_t k = 0; k < subcarriers_; ++k) {
    auto src = subcarrier(k).subspan(start, length);
    std::copy(src.begin(), src.end(), out.subcarrier(k).begin());
  }
  out.sample_rate_hint = sample_rate_hint;
  out.meta = meta;
  return out;
}

CsiMatrix CsiMatrix::keep_subcarriers(std::span<const std::size_t> indices) const {
  std::vector<double> freqs;
  freqs.reserve(indices.size());
  for (auto k : indices) freqs.push_back(freqs_.at(k));
  CsiMatrix out(indices.size(), samples_, std::move(freqs));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = subcarrier(indices[i]);
    std::copy(src.begin(), src.end(), out.subcarrier(i).begin());
  }
  out.sample_rate_hint = sample_rate_hint;
  out.meta = meta;
  return out;
}

std::vector<std::string> Dataset::subject_ids() const {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.label.subject_id);
  return {ids.begin(), ids.end()};
}

bool is_attack_label(std::string_view subject_id) {
  return subject_id.substr(0, kAttackPrefix.size()) == kAttackPrefix;
}

std::string attack_label(std::string_view kind, std::string_view victim) {
  return std::string(kAttackPrefix) + std::string(kind) + ":" + std::string(victim);
}

std::string attack_kind(std::string_view subject_id) {
  if (!is_attack_label(subject_id)) return {};
  auto rest = subject_id.substr(kAttackPrefix.size());
  return std::string(rest.substr(0, rest.find(':')));
}

std::string attack_victim(std::string_view subject_id) {
  if (!is_attack_label(subject_id)) return {};
  auto rest = subject_id.substr(kAttackPrefix.size());
  auto colon = rest.find(':');
  return colon == std::string_view::npos ? std::string{} : std::string(rest.substr(colon + 1));
}

void FeatureMatrix::add_row(std::span<const double> values, std::string label, std::string group,
                            WindowRef ref) {
  if (values.size() != cols()) {
    throw Error(ErrorCode::schema_mismatch, "feature row width does not match column names");
  }
  data.insert(data.end(), values.begin(), values.end());
  labels.push_back(std::move(label));
  groups.push_back(std::move(group));
  provenance.push_back(ref);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.names = names;
  out.data.reserve(indices.size() * cols());
  for (auto i : indices) {
    auto r = row(i);
    out.data.insert(out.data.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
    out.groups.push_back(i < groups.size() ? groups[i] : std::string{});
    out.provenance.push_back(i < provenance.size() ? provenance[i] : WindowRef{});
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  for (auto j : indices) out.names.push_back(names.at(j));
  out.data.reserve(rows() * indices.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (auto j : indices) out.data.push_back(at(i, j));
  }
  out.labels = labels;
  out.groups = groups;
  out.provenance = provenance;
  return out;
}

std::size_t ScoreMatrix::class_index(std::string_view id) const {
  auto it = std::find(class_ids.begin(), class_ids.end(), id);
  if (it == class_ids.end()) {
    throw Error(ErrorCode::schema_mismatch, "unknown class id '" + std::string(id) + "'");
  }
  return static_cast<std::size_t>(it - class_ids.begin());
}

std::size_t ScoreMatrix::predicted(std::size_t i) const {
  auto r = row(i);
  // First maximum wins, so ties resolve toward the lower class index.
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

void ScoreMatrix::append(const ScoreMatrix& other) {
  if (class_ids.empty() && true_labels.empty()) class_ids = other.class_ids;
  if (other.class_ids != class_ids) {
    throw Error(ErrorCode::schema_mismatch, "cannot append scores over different class sets");
  }
  probabilities.insert(probabilities.end(), other.probabilities.begin(),
                       other.probabilities.end());
  true_labels.insert(true_labels.end(), other.true_labels.begin(), other.true_labels.end());
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::too_few_subcarriers: return "too-few-subcarriers";
    case ViolationKind::too_few_samples: return "too-few-samples";
    case ViolationKind::freq_length_mismatch: return "freq-length-mismatch";
    case ViolationKind::non_increasing_freqs: return "non-increasing-freqs";
    case ViolationKind::non_finite_frequency: return "non-finite-frequency";
    case ViolationKind::non_finite_entry: return "non-finite-entry";
  }
  return "unknown";
}

std::vector<Violation> validate_matrix(const CsiMatrix& m) {
  std::vector<Violation> out;
  auto add = [&out](ViolationKind kind, std::size_t k, std::size_t t, std::string msg) {
    out.push_back({kind, k, t, std::move(msg)});
  };
  if (m.subcarriers() < 2) {
    add(ViolationKind::too_few_subcarriers, 0, 0,
        "K=" + std::to_string(m.subcarriers()) + " is below 2");
  }
  if (m.samples() < 2) {
    add(ViolationKind::too_few_samples, 0, 0, "T=" + std::to_string(m.samples()) + " is below 2");
  }
  const auto& f = m.freqs();
  if (f.size() != m.subcarriers()) {
    add(ViolationKind::freq_length_mismatch, 0, 0,
        "freqs has " + std::to_string(f.size()) + " entries for K=" +
            std::to_string(m.subcarriers()));
  }
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!std::isfinite(f[k])) {
      add(ViolationKind::non_finite_frequency, k, 0, "freqs[" + std::to_string(k) + "] not finite");
    } else if (k > 0 && std::isfinite(f[k - 1]) && !(f[k] > f[k - 1])) {
      add(ViolationKind::non_increasing_freqs, k, 0,
          "freqs[" + std::to_string(k) + "] does not exceed freqs[" + std::to_string(k - 1) + "]");
    }
  }
  if (m.meta.cleaned) {
    for (std::size_t k = 0; k < m.subcarriers(); ++k) {
      for (std::size_t t = 0; t < m.samples(); ++t) {
        const auto v = m(k, t);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          std::ostringstream msg;
          msg << "entry (" << k << ", " << t << ") is not finite";
          add(ViolationKind::non_finite_entry, k, t, msg.str());
        }
      }
    }
  }
  return out;
}

void validate_scores(const ScoreMatrix& scores, double tolerance) {
  if (scores.probabilities.size() != scores.rows() * scores.classes()) {
    throw Error(ErrorCode::schema_mismatch, "score matrix row count does not match labels");
  }
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double sum = 0.0;
    for (double p : scores.row(i)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::schema_mismatch, "probability outside [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::schema_mismatch, "probability row does not sum to 1");
    }
  }
}

}  // namespace csiauth
