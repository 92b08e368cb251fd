// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "csiauth/calib.hpp"
#include "csiauth/classify.hpp"
#include "csiauth/features.hpp"
#include "csiauth/metrics.hpp"
#include "csiauth/model.hpp"
#include "csiauth/select.hpp"

namespace csiauth::harness {

enum class SplitMode { per_window_stratified, per_acquisition_holdout };
enum class Normalization { within_fold_zscore, global_zscore_leaky };

std::string_view to_string(SplitMode mode);
SplitMode split_mode_from_string(std::string_view text);
std::string_view to_string(Normalization n);
Normalization normalization_from_string(std::string_view text);

struct PreprocessConfig {
  bool calibrate = true;
  calib::OffsetScope cfo_scope = calib::OffsetScope::per_sample;
  bool iqr_filter = true;
  bool mad_repair = true;
  std::size_t mad_window = 11;
};

/// Parameter name -> candidate values; the grid is their cartesian product.
using Grid = std::map<std::string, std::vector<double>>;

struct ProtocolConfig {
  std::size_t window_size = 50;
  std::size_t window_stride = 0;  // 0: same as window_size
  std::size_t folds = 10;         // per_window_stratified only
  SplitMode split_mode = SplitMode::per_acquisition_holdout;
  Normalization normalization = Normalization::within_fold_zscore;
  std::size_t selection_k = 20;
  std::size_t selection_bins = 10;
  std::set<Hand> hands = {Hand::right, Hand::unspecified};
  PreprocessConfig preprocess;
  features::FeatureSetConfig features;
  metrics::ReportConfig report;
  std::map<std::string, Grid> grids;  // keyed by model kind name
  // Model the leakage audit re-runs in leaky mode; empty means the first model.
  std::string audit_model;
  double leakage_tolerance = 0.01;
  std::uint64_t seed = 0;

  std::size_t stride() const { return window_stride == 0 ? window_size : window_stride; }
};

void validate(const ProtocolConfig& cfg);

struct Window {
  CsiMatrix matrix;
  SubjectLabel label;
  WindowRef ref;
};

/// Window start offsets for a record of length T; throws RecordTooShort.
std::vector<std::size_t> window_starts(std::size_t samples, const ProtocolConfig& cfg,
                                       std::size_t record = 0);
std::vector<Window> window_dataset(const Dataset& d, const ProtocolConfig& cfg);

/// calibrate, IQR subcarrier filter, MAD temporal repair (each optional).
CsiMatrix preprocess(const CsiMatrix& m, const PreprocessConfig& cfg);

/// Acquisition key shared by every window of one record.
std::string acquisition_id(const SubjectLabel& label);

/// Preprocessed, windowed features for every record admitted by the hand
/// policy. Attack records are included; their labels keep the attack prefix.
FeatureMatrix build_feature_matrix(const Dataset& d, const ProtocolConfig& cfg);

/// Rows of F that belong to genuine subjects / to attack records.
std::vector<std::size_t> genuine_rows(const FeatureMatrix& F);
std::vector<std::size_t> attack_rows(const FeatureMatrix& F);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified folds (seeded per-class round robin) or, under
/// per_acquisition_holdout, fold j holds out the j-th acquisition of every
/// subject. Row indices refer to F.
std::vector<Fold> make_folds(const FeatureMatrix& F, const ProtocolConfig& cfg);

/// Throws LeakageDetected when an acquisition has windows on both sides.
void check_disjoint_groups(const FeatureMatrix& F, const Fold& fold);

enum class FitStage { scaler, selection, model };
std::string_view to_string(FitStage stage);

/// Instrumentation: called with every set of row ids a fit step consumes.
struct FitEvent {
  std::size_t fold = 0;
  FitStage stage = FitStage::scaler;
  std::string model;  // empty for scaler / selection
  std::vector<std::size_t> rows;
};
using FitAudit = std::function<void(const FitEvent&)>;

struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;  // population std, 1 for constant columns
};
Scaler fit_scaler(const FeatureMatrix& F, std::span<const std::size_t> rows);
FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& F);

struct FoldMetrics {
  std::size_t fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double accuracy = 0.0;
  double mean_eer = 0.0;  // over classes with genuine and impostor rows in the fold
  std::vector<std::string> selected;
};

struct CvModelOutput {
  classify::ModelSpec spec;
  ScoreMatrix scores;          // test rows of all folds, fold order
  std::vector<std::size_t> rows;  // F row of each score row
  std::vector<FoldMetrics> folds;
  double mean_accuracy = 0.0;
  double mean_fold_eer = 0.0;
};

struct FeatureUsage {
  std::string name;
  std::size_t folds_selected = 0;
  double mean_position = 0.0;  // 1-based rank among selected, over those folds
  double mean_score = 0.0;
};

struct CvOutput {
  std::vector<CvModelOutput> models;
  std::vector<FeatureUsage> ranking;
};

/// Runs the per-fold pipeline on a genuine-only feature matrix.
CvOutput cross_validate(const FeatureMatrix& F, const std::vector<Fold>& folds,
                        const ProtocolConfig& cfg, std::span<const classify::ModelSpec> models,
                        const FitAudit& audit = {});

struct LeakageAudit {
  std::string model;
  double clean_accuracy = 0.0;
  double leaky_accuracy = 0.0;
  double delta = 0.0;  // leaky - clean
  bool flagged = false;
};

LeakageAudit leakage_audit_features(const FeatureMatrix& F, const std::vector<Fold>& folds,
                                    const ProtocolConfig& cfg, const classify::ModelSpec& model);
LeakageAudit leakage_audit(const Dataset& d, const ProtocolConfig& cfg,
                           const classify::ModelSpec& model);

struct AttackOutcome {
  std::string label;
  std::string kind;
  std::string victim;
  std::size_t windows = 0;
  double victim_threshold = 0.0;
  double far = 0.0;
  std::vector<double> scores;          // victim-class score of each attack window
  std::vector<double> genuine_scores;  // victim's own held-out windows
};

/// Trains on every acquisition but each subject's last, takes per-class EER
/// thresholds from the held-out acquisitions and scores the attack windows
/// against their victim's threshold.
std::vector<AttackOutcome> evaluate_attacks(const FeatureMatrix& F, const ProtocolConfig& cfg,
                                            const classify::ModelSpec& model);

struct ModelResult {
  std::string name;
  CvModelOutput cv;
  metrics::SecurityReport report;
  std::vector<AttackOutcome> attacks;
};

struct Provenance {
  std::string config_hash;
  std::string dataset_digest;
  std::string tool_version;
  std::uint64_t seed = 0;
};

struct RunResult {
  SplitMode split_mode = SplitMode::per_acquisition_holdout;
  std::size_t window_size = 0;
  std::size_t windows = 0;
  std::size_t folds = 0;
  std::vector<ModelResult> models;
  std::optional<LeakageAudit> leakage;
  std::vector<FeatureUsage> ranking;
  Provenance provenance;
};

RunResult run_cv(const Dataset& d, const ProtocolConfig& cfg,
                 std::span<const classify::ModelSpec> models, const FitAudit& audit = {});

/// Same as run_cv on an already built feature matrix (attack rows allowed).
RunResult run_cv_features(const FeatureMatrix& F, const ProtocolConfig& cfg,
                          std::span<const classify::ModelSpec> models, const FitAudit& audit = {});

struct GridRow {
  classify::ModelSpec spec;
  double mean_accuracy = 0.0;
  double mean_eer = 0.0;
};

struct GridResult {
  classify::ModelSpec best;
  std::vector<GridRow> table;  // grid order
};

std::vector<classify::ModelSpec> expand_grid(classify::ModelKind kind, const Grid& grid,
                                             std::uint64_t seed);
/// Best by mean CV accuracy, then lower mean fold EER, then hyperparameters
/// in lexicographic order.
GridResult grid_search_features(const FeatureMatrix& F, const ProtocolConfig& cfg,
                                classify::ModelKind kind, const Grid& grid);
GridResult grid_search(const Dataset& d, const ProtocolConfig& cfg, classify::ModelKind kind,
                       const Grid& grid);

}  // namespace csiauth::harness
