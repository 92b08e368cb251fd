// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::metrics {

struct AggregateMetrics {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double macro_specificity = 0.0;
  std::vector<std::string> flags;
};

/// Accuracy and one-vs-rest macro averages over the argmax predictions.
AggregateMetrics aggregate_metrics(const ScoreMatrix& scores);

/// Genuine and impostor scores for one class column. Rows whose true label is
/// not a known class are impostors for every class.
struct ClassScores {
  std::vector<double> genuine;
  std::vector<double> impostor;
};
ClassScores class_scores(const ScoreMatrix& scores, std::string_view class_id);

/// P(genuine > impostor) + 0.5 P(tie), via midranks.
double auc(std::span<const double> genuine, std::span<const double> impostor);

struct AucResult {
  std::vector<std::string> class_ids;
  std::vector<double> per_class;
  double macro = 0.0;
};
AucResult roc_auc_ovr(const ScoreMatrix& scores);

/// Acceptance means score >= threshold.
double far_at(std::span<const double> impostor, double threshold);
double frr_at(std::span<const double> genuine, double threshold);

struct EerResult {
  std::string class_id;
  double eer = 0.0;
  double threshold = 0.0;
  double far_at_threshold = 0.0;
  double frr_at_threshold = 0.0;
  // True when the FAR and FRR curves cross between two attainable thresholds.
  bool interpolated = false;
};

EerResult eer(std::span<const double> genuine, std::span<const double> impostor);
EerResult eer_per_class(const ScoreMatrix& scores, std::string_view class_id);
std::vector<EerResult> eer_all_classes(const ScoreMatrix& scores);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
};
Histogram histogram(std::span<const double> values, std::size_t bins, double lo = 0.0,
                    double hi = 1.0);

struct FcsData {
  std::vector<double> genuine_scores;
  std::vector<double> impostor_scores;
  Histogram genuine_hist;
  Histogram impostor_hist;
  double separation_gap = 0.0;  // min(genuine) - max(impostor)
};
FcsData fcs(const ScoreMatrix& scores, std::size_t bins = 50);

struct GiniValue {
  double value = 0.0;
  bool no_errors = false;  // all-zero input; value 0 by convention
};
/// Mean-absolute-difference Gini of a nonnegative vector (n >= 2).
GiniValue gini(std::span<const double> x);

struct GiniReport {
  double gc_far = 0.0;
  double gc_frr = 0.0;
  double gc_mean = 0.0;
  std::vector<std::string> class_ids;
  std::vector<double> false_accepts;  // per victim class
  std::vector<double> false_rejects;
  std::vector<std::string> flags;
};
/// Per-user error counts at each class's own EER threshold.
GiniReport gini_report(const ScoreMatrix& scores, std::span<const EerResult> eers);

struct BioQuakeConfig {
  std::size_t resamples = 1000;
  double ci = 0.95;
  std::uint64_t seed = 0;
};

struct BioQuake {
  double eer = 0.0;
  double uncertainty = 0.0;  // sample std of the resampled EERs
  double ci_width = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Bootstrap over scores. Resample r draws from Rng(substream(seed, r)):
/// n_g genuine indices first, then n_i impostor indices.
BioQuake bioquake_scores(std::span<const double> genuine, std::span<const double> impostor,
                         const BioQuakeConfig& cfg = {});
BioQuake bioquake(const ScoreMatrix& scores, std::string_view class_id,
                  const BioQuakeConfig& cfg = {});
/// Mean per-class EER with every class resampled inside each bootstrap round
/// (classes in class_ids order, each genuine then impostor).
BioQuake bioquake_macro(const ScoreMatrix& scores, const BioQuakeConfig& cfg = {});

struct ThresholdStats {
  double mean = 0.0;
  double std = 0.0;  // sample std across classes
  double min = 0.0;
  double max = 0.0;
  std::size_t extreme = 0;  // threshold < 0.1 or > 0.7
  std::size_t ideal = 0;    // 0.1 <= threshold <= 0.7
};
ThresholdStats threshold_stats(std::span<const EerResult> eers);

struct ReportConfig {
  std::size_t fcs_bins = 50;
  BioQuakeConfig bioquake;
};

struct SecurityReport {
  std::string model;
  std::size_t rows = 0;
  AggregateMetrics aggregate;
  AucResult auc;
  std::vector<EerResult> eers;
  double mean_eer = 0.0;
  FcsData fcs;
  GiniReport gini;
  BioQuake bioquake;
  ThresholdStats thresholds;
};

SecurityReport security_report(const ScoreMatrix& scores, std::string model,
                               const ReportConfig& cfg = {});

}  // namespace csiauth::metrics
