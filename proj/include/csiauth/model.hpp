// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csiauth/error.hpp"

namespace csiauth {

using Complex = std::complex<double>;

enum class Hand { left, right, unspecified };

std::string_view to_string(Hand hand);
Hand hand_from_string(std::string_view text);

struct CaptureMeta {
  std::string source_id;
  std::string channel_spec;
  // Set by the cleaning stage; from then on every entry must be finite.
  bool cleaned = false;
};

/// Complex channel matrix H(f_k, t): K subcarriers by T time samples.
///
/// Storage is row-major by subcarrier, so the time series of one subcarrier
/// is contiguous. Amplitude and phase are derived on demand.
class CsiMatrix {
 public:
  CsiMatrix() = default;
  CsiMatrix(std::size_t subcarriers, std::size_t samples, std::vector<double> freqs);
  CsiMatrix(std::size_t subcarriers, std::size_t samples, std::vector<double> freqs,
            std::vector<Complex> values);

  std::size_t subcarriers() const noexcept { return subcarriers_; }
  std::size_t samples() const noexcept { return samples_; }

  Complex& operator()(std::size_t k, std::size_t t) { return values_[k * samples_ + t]; }
  const Complex& operator()(std::size_t k, std::size_t t) const {
    return values_[k * samples_ + t];
  }

  double amplitude(std::size_t k, std::size_t t) const { return std::abs((*this)(k, t)); }
  double phase(std::size_t k, std::size_t t) const { return std::arg((*this)(k, t)); }

  std::span<Complex> subcarrier(std::size_t k) { return {values_.data() + k * samples_, samples_}; }
  std::span<const Complex> subcarrier(std::size_t k) const {
    return {values_.data() + k * samples_, samples_};
  }

  const std::vector<Complex>& values() const noexcept { return values_; }
  const std::vector<double>& freqs() const noexcept { return freqs_; }

  /// Columns [start, start + length).
  CsiMatrix window(std::size_t start, std::size_t length) const;
  /// Keeps the listed subcarriers (ascending indices) and their frequencies.
  CsiMatrix keep_subcarriers(std::span<const std::size_t> indices) const;

  std::optional<double> sample_rate_hint;
  CaptureMeta meta;

 private:
  std::size_t subcarriers_ = 0;
  std::size_t samples_ = 0;
  std::vector<double> freqs_;
  std::vector<Complex> values_;
};

struct SubjectLabel {
  std::string subject_id;
  int sample_index = 0;
  Hand hand = Hand::unspecified;

  bool operator==(const SubjectLabel&) const = default;
};

struct Record {
  CsiMatrix matrix;
  SubjectLabel label;
};

struct Dataset {
  std::vector<Record> records;

  std::vector<std::string> subject_ids() const;
};

// Synthetic attack records are labelled "attack:<kind>:<victim>".
inline constexpr std::string_view kAttackPrefix = "attack:";
bool is_attack_label(std::string_view subject_id);
std::string attack_label(std::string_view kind, std::string_view victim);
std::string attack_victim(std::string_view subject_id);
std::string attack_kind(std::string_view subject_id);

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  // Degenerate-case conventions that fired, e.g. "amp_skew_mean:sigma_below_epsilon".
  std::vector<std::string> flags;

  void append(std::string name, double value) {
    names.push_back(std::move(name));
    values.push_back(value);
  }
};

struct WindowRef {
  std::size_t record = 0;
  std::size_t start = 0;
};

/// Rows are windows, columns are named features.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<double> data;
  std::vector<std::string> labels;
  // Acquisition each row came from; rows sharing a group must never straddle
  // a train/test split in holdout mode.
  std::vector<std::string> groups;
  std::vector<WindowRef> provenance;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t cols() const noexcept { return names.size(); }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  void add_row(std::span<const double> values, std::string label, std::string group = {},
               WindowRef ref = {});
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix select_columns(std::span<const std::size_t> indices) const;
};

/// One-vs-rest probability rows aligned with true labels.
struct ScoreMatrix {
  std::vector<std::string> class_ids;
  std::vector<double> probabilities;  // rows() x class_ids.size(), row-major
  std::vector<std::string> true_labels;

  std::size_t rows() const noexcept { return true_labels.size(); }
  std::size_t classes() const noexcept { return class_ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return {probabilities.data() + i * classes(), classes()};
  }
  double at(std::size_t i, std::size_t c) const { return probabilities[i * classes() + c]; }
  std::size_t class_index(std::string_view id) const;
  std::size_t predicted(std::size_t i) const;

  void append(const ScoreMatrix& other);
};

enum class ViolationKind {
  too_few_subcarriers,
  too_few_samples,
  freq_length_mismatch,
  non_increasing_freqs,
  non_finite_frequency,
  non_finite_entry,
};

struct Violation {
  ViolationKind kind;
  std::size_t k = 0;
  std::size_t t = 0;
  std::string message;
};

std::string_view to_string(ViolationKind kind);

/// Lists every broken CsiMatrix invariant in (axis, index) order. Entry
/// finiteness is only required once the matrix is marked cleaned.
std::vector<Violation> validate_matrix(const CsiMatrix& m);

/// Throws if the score matrix is malformed (row sums, range, label count).
void validate_scores(const ScoreMatrix& scores, double tolerance = 1e-9);

}  // namespace csiauth
