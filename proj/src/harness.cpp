// SPDX-License-Identifier: Apache-2.0
#include "csiauth/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "csiauth/clean.hpp"
#include "csiauth/digest.hpp"
#include "csiauth/random.hpp"
#include "csiauth/version.hpp"

namespace csiauth::harness {
namespace {

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorCode::invalid_config, msg); }

[[noreturn]] void rethrow_with(const Error& e, const std::string& prefix) {
  throw Error(e.code(), prefix + e.what());
}

std::vector<std::string> distinct_in_order(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : items)
    if (seen.insert(s).second) out.push_back(s);
  return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& sorted_subset) {
  std::vector<std::size_t> out;
  out.reserve(n - sorted_subset.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < sorted_subset.size() && sorted_subset[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

double fold_mean_eer(const ScoreMatrix& s) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& id : s.class_ids) {
    const auto cs = metrics::class_scores(s, id);
    if (cs.genuine.empty() || cs.impostor.empty()) continue;
    sum += metrics::eer(cs.genuine, cs.impostor).eer;
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double accuracy(const ScoreMatrix& s) {
  if (s.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < s.rows(); ++i)
    if (s.class_ids[s.predicted(i)] == s.true_labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(s.rows());
}

struct Prepared {
  FeatureMatrix train;
  FeatureMatrix test;
  std::vector<select::RankedFeature> ranked;
};

// Scaler and mRMR fitted on `fit_rows`, applied to train and test.
Prepared prepare(const FeatureMatrix& F, const std::vector<std::size_t>& train,
                 const std::vector<std::size_t>& test, const std::vector<std::size_t>& fit_rows,
                 const ProtocolConfig& cfg, std::size_t fold, const FitAudit& audit) {
  if (audit) audit({fold, FitStage::scaler, {}, fit_rows});
  const Scaler scaler = fit_scaler(F, fit_rows);
  const FeatureMatrix scaled = apply_scaler(scaler, F);

  Prepared p;
  std::vector<std::size_t> columns;
  if (F.cols() >= 2) {
    if (audit) audit({fold, FitStage::selection, {}, fit_rows});
    select::MrmrConfig mc;
    mc.k_select = std::min(cfg.selection_k, F.cols());
    mc.bins = cfg.selection_bins;
    p.ranked = select::mrmr_rank(scaled.select_rows(fit_rows), mc);
    for (const auto& r : p.ranked) columns.push_back(r.column);
  } else {
    columns = {0};
  }
  p.train = scaled.select_rows(train).select_columns(columns);
  p.test = scaled.select_rows(test).select_columns(columns);
  return p;
}

std::size_t pick_audit_model(const ProtocolConfig& cfg, std::span<const classify::ModelSpec> models) {
  if (cfg.audit_model.empty()) return 0;
  const auto kind = classify::model_kind_from_string(cfg.audit_model);
  for (std::size_t i = 0; i < models.size(); ++i)
    if (models[i].kind == kind) return i;
  bad_config("audit_model '" + cfg.audit_model + "' is not among the evaluated models");
}

}  // namespace

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::per_window_stratified ? "per_window_stratified" : "per_acquisition_holdout";
}

SplitMode split_mode_from_string(std::string_view text) {
  if (text == "per_window_stratified") return SplitMode::per_window_stratified;
  if (text == "per_acquisition_holdout") return SplitMode::per_acquisition_holdout;
  bad_config("unknown split_mode '" + std::string(text) + "'");
}

std::string_view to_string(Normalization n) {
  return n == Normalization::within_fold_zscore ? "within_fold_zscore" : "global_zscore_leaky";
}

Normalization normalization_from_string(std::string_view text) {
  if (text == "within_fold_zscore") return Normalization::within_fold_zscore;
  if (text == "global_zscore_leaky") return Normalization::global_zscore_leaky;
  bad_config("unknown normalization '" + std::string(text) + "'");
}

std::string_view to_string(FitStage stage) {
  switch (stage) {
    case FitStage::scaler: return "scaler";
    case FitStage::selection: return "selection";
    case FitStage::model: return "model";
  }
  return "unknown";
}

void validate(const ProtocolConfig& cfg) {
  if (cfg.window_size < 8) bad_config("window_size must be >= 8");
  if (cfg.folds < 2) bad_config("folds must be >= 2");
  if (cfg.selection_k < 1) bad_config("selection_k must be >= 1");
  if (cfg.selection_bins < 2) bad_config("selection_bins must be >= 2");
  if (cfg.hands.empty()) bad_config("hands must admit at least one hand");
  if (cfg.preprocess.mad_repair && (cfg.preprocess.mad_window < 3 || cfg.preprocess.mad_window % 2 == 0))
    bad_config("mad_window must be odd and >= 3");
  if (!(cfg.leakage_tolerance >= 0.0)) bad_config("leakage_tolerance must be >= 0");
  if (cfg.report.fcs_bins < 1) bad_config("fcs_bins must be >= 1");
  if (!(cfg.report.bioquake.ci > 0.0 && cfg.report.bioquake.ci < 1.0)) bad_config("bioquake ci must be in (0, 1)");
  features::validate(cfg.features);
  for (const auto& [kind, grid] : cfg.grids) {
    (void)expand_grid(classify::model_kind_from_string(kind), grid, cfg.seed);
  }
  if (!cfg.audit_model.empty()) (void)classify::model_kind_from_string(cfg.audit_model);
}

std::vector<std::size_t> window_starts(std::size_t samples, const ProtocolConfig& cfg,
                                       std::size_t record) {
  if (samples < cfg.window_size)
    throw Error(ErrorCode::record_too_short, "record " + std::to_string(record) + " has " +
                                                 std::to_string(samples) + " samples, window is " +
                                                 std::to_string(cfg.window_size));
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + cfg.window_size <= samples; s += cfg.stride()) starts.push_back(s);
  return starts;
}

std::vector<Window> window_dataset(const Dataset& d, const ProtocolConfig& cfg) {
  std::vector<Window> out;
  for (std::size_t r = 0; r < d.records.size(); ++r) {
    const Record& rec = d.records[r];
    for (std::size_t s : window_starts(rec.matrix.samples(), cfg, r))
      out.push_back({rec.matrix.window(s, cfg.window_size), rec.label, {r, s}});
  }
  return out;
}

CsiMatrix preprocess(const CsiMatrix& m, const PreprocessConfig& cfg) {
  CsiMatrix out = cfg.calibrate ? calib::calibrate(m, cfg.cfo_scope).matrix : m;
  if (cfg.iqr_filter) out = clean::iqr_subcarrier_filter(out).matrix;
  if (cfg.mad_repair) out = clean::mad_temporal_repair(out, cfg.mad_window).matrix;
  return out;
}

std::string acquisition_id(const SubjectLabel& label) {
  return label.subject_id + "#" + std::to_string(label.sample_index);
}

FeatureMatrix build_feature_matrix(const Dataset& d, const ProtocolConfig& cfg) {
  validate(cfg);
  FeatureMatrix F;
  F.names = features::enabled_feature_names(cfg.features);
  for (std::size_t r = 0; r < d.records.size(); ++r) {
    const Record& rec = d.records[r];
    if (!cfg.hands.contains(rec.label.hand)) continue;
    const auto starts = window_starts(rec.matrix.samples(), cfg, r);
    try {
      const CsiMatrix clean = preprocess(rec.matrix, cfg.preprocess);
      const std::string group = acquisition_id(rec.label);
      for (std::size_t s : starts) {
        const FeatureVector fv = features::extract_all(clean.window(s, cfg.window_size), cfg.features);
        F.add_row(fv.values, rec.label.subject_id, group, {r, s});
      }
    } catch (const Error& e) {
      rethrow_with(e, "record " + std::to_string(r) + " (" + acquisition_id(rec.label) + "): ");
    }
  }
  return F;
}

std::vector<std::size_t> genuine_rows(const FeatureMatrix& F) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < F.rows(); ++i)
    if (!is_attack_label(F.labels[i])) out.push_back(i);
  return out;
}

std::vector<std::size_t> attack_rows(const FeatureMatrix& F) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < F.rows(); ++i)
    if (is_attack_label(F.labels[i])) out.push_back(i);
  return out;
}

std::vector<Fold> make_folds(const FeatureMatrix& F, const ProtocolConfig& cfg) {
  const std::size_t n = F.rows();
  const auto classes = distinct_in_order(F.labels);
  if (classes.size() < 2) throw Error(ErrorCode::insufficient_data, "need at least two subjects");
  std::vector<std::size_t> assignment(n, 0);
  std::size_t n_folds = 0;

  if (cfg.split_mode == SplitMode::per_window_stratified) {
    n_folds = cfg.folds;
    auto sorted = classes;
    std::sort(sorted.begin(), sorted.end());
    Rng rng(cfg.seed);
    std::size_t offset = 0;
    for (const auto& c : sorted) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < n; ++i)
        if (F.labels[i] == c) rows.push_back(i);
      if (rows.size() < n_folds)
        throw Error(ErrorCode::insufficient_data, "subject '" + c + "' has " + std::to_string(rows.size()) +
                                                      " windows, fewer than " + std::to_string(n_folds) +
                                                      " folds");
      rng.shuffle(rows.begin(), rows.end());
      for (std::size_t i = 0; i < rows.size(); ++i) assignment[rows[i]] = (offset + i) % n_folds;
      offset = (offset + rows.size()) % n_folds;
    }
  } else {
    if (F.groups.size() != n) throw Error(ErrorCode::insufficient_data, "rows lack acquisition ids");
    // Position of each acquisition among its subject's acquisitions, in row order.
    std::unordered_map<std::string, std::vector<std::string>> per_subject;
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < n; ++i) {
      if (position.contains(F.groups[i])) continue;
      auto& list = per_subject[F.labels[i]];
      position[F.groups[i]] = list.size();
      list.push_back(F.groups[i]);
    }
    for (const auto& c : classes) {
      const std::size_t m = per_subject[c].size();
      if (m < 2)
        throw Error(ErrorCode::insufficient_data,
                    "subject '" + c + "' needs at least two acquisitions for holdout");
      n_folds = std::max(n_folds, m);
    }
    for (std::size_t i = 0; i < n; ++i) assignment[i] = position[F.groups[i]];
  }

  std::vector<Fold> folds(n_folds);
  for (std::size_t i = 0; i < n; ++i) folds[assignment[i]].test.push_back(i);
  for (auto& f : folds) f.train = complement(n, f.test);
  if (cfg.split_mode == SplitMode::per_acquisition_holdout)
    for (const auto& f : folds) check_disjoint_groups(F, f);
  return folds;
}

void check_disjoint_groups(const FeatureMatrix& F, const Fold& fold) {
  std::unordered_set<std::string> train_groups;
  for (std::size_t i : fold.train) train_groups.insert(F.groups.at(i));
  for (std::size_t i : fold.test) {
    if (train_groups.contains(F.groups.at(i)))
      throw Error(ErrorCode::leakage_detected,
                  "acquisition '" + F.groups[i] + "' has windows in both train and test");
  }
  std::vector<std::size_t> a(fold.train), b(fold.test);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  if (!both.empty())
    throw Error(ErrorCode::leakage_detected, "row " + std::to_string(both.front()) + " is in train and test");
}

Scaler fit_scaler(const FeatureMatrix& F, std::span<const std::size_t> rows) {
  const std::size_t d = F.cols();
  Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  if (rows.empty()) return s;
  const auto n = static_cast<double>(rows.size());
  for (std::size_t i : rows)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += F.at(i, j);
  for (double& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (std::size_t i : rows)
    for (std::size_t j = 0; j < d; ++j) {
      const double e = F.at(i, j) - s.mean[j];
      var[j] += e * e;
    }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& F) {
  if (s.mean.size() != F.cols()) throw Error(ErrorCode::schema_mismatch, "scaler width mismatch");
  FeatureMatrix out = F;
  const std::size_t d = F.cols();
  for (std::size_t i = 0; i < F.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) out.data[i * d + j] = (F.at(i, j) - s.mean[j]) / s.scale[j];
  return out;
}

CvOutput cross_validate(const FeatureMatrix& F, const std::vector<Fold>& folds,
                        const ProtocolConfig& cfg, std::span<const classify::ModelSpec> models,
                        const FitAudit& audit) {
  if (models.empty()) throw Error(ErrorCode::invalid_config, "no models to evaluate");
  for (const auto& m : models) classify::validate(m);
  const bool leaky = cfg.normalization == Normalization::global_zscore_leaky;
  const auto all = iota_rows(F.rows());

  CvOutput out;
  out.models.resize(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) out.models[m].spec = models[m];
  std::vector<FeatureUsage> usage(F.cols());
  for (std::size_t j = 0; j < F.cols(); ++j) usage[j].name = F.names[j];

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    if (fold.test.empty()) continue;
    try {
      const Prepared p = prepare(F, fold.train, fold.test, leaky ? all : fold.train, cfg, f, audit);
      std::vector<std::string> selected;
      for (std::size_t r = 0; r < p.ranked.size(); ++r) {
        FeatureUsage& u = usage[p.ranked[r].column];
        ++u.folds_selected;
        u.mean_position += static_cast<double>(r + 1);
        u.mean_score += p.ranked[r].score;
        selected.push_back(p.ranked[r].name);
      }
      for (std::size_t m = 0; m < models.size(); ++m) {
        if (audit) audit({f, FitStage::model, classify::describe(models[m]), fold.train});
        const auto model = classify::fit(models[m], p.train);
        const ScoreMatrix s = classify::predict_proba(model, p.test);
        CvModelOutput& o = out.models[m];
        o.scores.append(s);
        o.rows.insert(o.rows.end(), fold.test.begin(), fold.test.end());
        o.folds.push_back({f, fold.train.size(), fold.test.size(), accuracy(s), fold_mean_eer(s), selected});
      }
    } catch (const Error& e) {
      rethrow_with(e, "fold " + std::to_string(f) + ": ");
    }
  }
  for (auto& o : out.models) {
    double acc = 0.0, eer = 0.0;
    for (const auto& fm : o.folds) {
      acc += fm.accuracy;
      eer += fm.mean_eer;
    }
    if (!o.folds.empty()) {
      o.mean_accuracy = acc / static_cast<double>(o.folds.size());
      o.mean_fold_eer = eer / static_cast<double>(o.folds.size());
    }
  }
  for (auto& u : usage) {
    if (u.folds_selected == 0) continue;
    u.mean_position /= static_cast<double>(u.folds_selected);
    u.mean_score /= static_cast<double>(u.folds_selected);
  }
  std::sort(usage.begin(), usage.end(), [](const FeatureUsage& a, const FeatureUsage& b) {
    if (a.folds_selected != b.folds_selected) return a.folds_selected > b.folds_selected;
    if (a.mean_position != b.mean_position) return a.mean_position < b.mean_position;
    return a.name < b.name;
  });
  out.ranking = std::move(usage);
  return out;
}

LeakageAudit leakage_audit_features(const FeatureMatrix& F, const std::vector<Fold>& folds,
                                    const ProtocolConfig& cfg, const classify::ModelSpec& model) {
  ProtocolConfig clean_cfg = cfg;
  clean_cfg.normalization = Normalization::within_fold_zscore;
  ProtocolConfig leaky_cfg = cfg;
  leaky_cfg.normalization = Normalization::global_zscore_leaky;
  const std::array<classify::ModelSpec, 1> one{model};
  LeakageAudit a;
  a.model = classify::describe(model);
  a.clean_accuracy = accuracy(cross_validate(F, folds, clean_cfg, one).models[0].scores);
  a.leaky_accuracy = accuracy(cross_validate(F, folds, leaky_cfg, one).models[0].scores);
  a.delta = a.leaky_accuracy - a.clean_accuracy;
  a.flagged = std::abs(a.delta) > cfg.leakage_tolerance;
  return a;
}

LeakageAudit leakage_audit(const Dataset& d, const ProtocolConfig& cfg,
                           const classify::ModelSpec& model) {
  const FeatureMatrix all = build_feature_matrix(d, cfg);
  const FeatureMatrix F = all.select_rows(genuine_rows(all));
  return leakage_audit_features(F, make_folds(F, cfg), cfg, model);
}

std::vector<AttackOutcome> evaluate_attacks(const FeatureMatrix& F, const ProtocolConfig& cfg,
                                            const classify::ModelSpec& model) {
  const auto attacks = attack_rows(F);
  if (attacks.empty()) return {};
  const auto genuine = genuine_rows(F);
  // Each subject's last acquisition, in row order, is held out.
  std::unordered_map<std::string, std::string> last_group;
  std::unordered_map<std::string, std::size_t> group_count;
  std::unordered_set<std::string> seen;
  for (std::size_t i : genuine) {
    last_group[F.labels[i]] = F.groups[i];
    if (seen.insert(F.groups[i]).second) ++group_count[F.labels[i]];
  }
  std::vector<std::size_t> train, held;
  for (std::size_t i : genuine) (F.groups[i] == last_group[F.labels[i]] ? held : train).push_back(i);
  for (const auto& [subject, count] : group_count)
    if (count < 2)
      throw Error(ErrorCode::insufficient_data,
                  "subject '" + subject + "' needs at least two acquisitions for attack evaluation");

  ProtocolConfig clean_cfg = cfg;
  clean_cfg.normalization = Normalization::within_fold_zscore;
  std::vector<std::size_t> test(held);
  test.insert(test.end(), attacks.begin(), attacks.end());
  const Prepared p = prepare(F, train, test, train, clean_cfg, 0, {});
  const auto trained = classify::fit(model, p.train);
  const ScoreMatrix s = classify::predict_proba(trained, p.test);

  ScoreMatrix held_scores;
  held_scores.class_ids = s.class_ids;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const auto r = s.row(i);
    held_scores.probabilities.insert(held_scores.probabilities.end(), r.begin(), r.end());
    held_scores.true_labels.push_back(s.true_labels[i]);
  }

  std::vector<AttackOutcome> out;
  std::vector<std::string> labels;
  for (std::size_t i : attacks) labels.push_back(F.labels[i]);
  for (const auto& label : distinct_in_order(labels)) {
    AttackOutcome o;
    o.label = label;
    o.kind = attack_kind(label);
    o.victim = attack_victim(label);
    const auto it = std::find(s.class_ids.begin(), s.class_ids.end(), o.victim);
    if (it == s.class_ids.end())
      throw Error(ErrorCode::insufficient_data, "attack victim '" + o.victim + "' is not enrolled");
    const auto c = static_cast<std::size_t>(it - s.class_ids.begin());
    const auto e = metrics::eer_per_class(held_scores, o.victim);
    o.victim_threshold = e.threshold;
    o.genuine_scores = metrics::class_scores(held_scores, o.victim).genuine;
    for (std::size_t i = held.size(); i < test.size(); ++i)
      if (s.true_labels[i] == label) o.scores.push_back(s.at(i, c));
    o.windows = o.scores.size();
    o.far = metrics::far_at(o.scores, o.victim_threshold);
    out.push_back(std::move(o));
  }
  return out;
}

RunResult run_cv_features(const FeatureMatrix& F, const ProtocolConfig& cfg,
                          std::span<const classify::ModelSpec> models, const FitAudit& audit) {
  validate(cfg);
  if (models.empty()) throw Error(ErrorCode::invalid_config, "no models to evaluate");
  const FeatureMatrix G = F.select_rows(genuine_rows(F));
  const auto folds = make_folds(G, cfg);
  const CvOutput cv = cross_validate(G, folds, cfg, models, audit);

  RunResult r;
  r.split_mode = cfg.split_mode;
  r.window_size = cfg.window_size;
  r.windows = G.rows();
  r.folds = folds.size();
  r.ranking = cv.ranking;
  r.provenance.seed = cfg.seed;
  r.provenance.tool_version = std::string(kToolVersion);
  const bool has_attacks = G.rows() != F.rows();
  for (std::size_t m = 0; m < models.size(); ++m) {
    ModelResult mr;
    mr.name = std::string(classify::to_string(models[m].kind));
    mr.cv = cv.models[m];
    mr.report = metrics::security_report(mr.cv.scores, classify::describe(models[m]), cfg.report);
    if (has_attacks) mr.attacks = evaluate_attacks(F, cfg, models[m]);
    r.models.push_back(std::move(mr));
  }

  const std::size_t a = pick_audit_model(cfg, models);
  LeakageAudit audit_rec;
  audit_rec.model = classify::describe(models[a]);
  const std::array<classify::ModelSpec, 1> one{models[a]};
  ProtocolConfig other = cfg;
  if (cfg.normalization == Normalization::within_fold_zscore) {
    audit_rec.clean_accuracy = accuracy(cv.models[a].scores);
    other.normalization = Normalization::global_zscore_leaky;
    audit_rec.leaky_accuracy = accuracy(cross_validate(G, folds, other, one).models[0].scores);
  } else {
    audit_rec.leaky_accuracy = accuracy(cv.models[a].scores);
    other.normalization = Normalization::within_fold_zscore;
    audit_rec.clean_accuracy = accuracy(cross_validate(G, folds, other, one).models[0].scores);
  }
  audit_rec.delta = audit_rec.leaky_accuracy - audit_rec.clean_accuracy;
  audit_rec.flagged = std::abs(audit_rec.delta) > cfg.leakage_tolerance;
  r.leakage = audit_rec;
  return r;
}

RunResult run_cv(const Dataset& d, const ProtocolConfig& cfg,
                 std::span<const classify::ModelSpec> models, const FitAudit& audit) {
  RunResult r = run_cv_features(build_feature_matrix(d, cfg), cfg, models, audit);
  r.provenance.dataset_digest = dataset_digest(d);
  return r;
}

std::vector<classify::ModelSpec> expand_grid(classify::ModelKind kind, const Grid& grid,
                                             std::uint64_t seed) {
  std::vector<classify::ModelSpec> out(1);
  out[0].kind = kind;
  out[0].seed = seed;
  for (const auto& [name, values] : grid) {
    if (values.empty()) bad_config("grid for '" + name + "' has no values");
    std::vector<classify::ModelSpec> next;
    for (const auto& base : out)
      for (double v : values) {
        classify::ModelSpec s = base;
        s.hyperparams[name] = v;
        next.push_back(std::move(s));
      }
    out = std::move(next);
  }
  for (const auto& s : out) classify::validate(s);
  return out;
}

GridResult grid_search_features(const FeatureMatrix& F, const ProtocolConfig& cfg,
                                classify::ModelKind kind, const Grid& grid) {
  validate(cfg);
  const auto specs = expand_grid(kind, grid, cfg.seed);
  const FeatureMatrix G = F.select_rows(genuine_rows(F));
  const CvOutput cv = cross_validate(G, make_folds(G, cfg), cfg, specs);
  GridResult g;
  for (const auto& m : cv.models) g.table.push_back({m.spec, m.mean_accuracy, m.mean_fold_eer});
  const auto better = [](const GridRow& a, const GridRow& b) {
    if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    if (a.mean_eer != b.mean_eer) return a.mean_eer < b.mean_eer;
    return a.spec.hyperparams < b.spec.hyperparams;
  };
  g.best = std::min_element(g.table.begin(), g.table.end(), better)->spec;
  return g;
}

GridResult grid_search(const Dataset& d, const ProtocolConfig& cfg, classify::ModelKind kind,
                       const Grid& grid) {
  return grid_search_features(build_feature_matrix(d, cfg), cfg, kind, grid);
}

}  // namespace csiauth::harness
