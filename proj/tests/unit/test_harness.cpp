// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <set>

#include "csiauth/harness.hpp"
#include "csiauth/report.hpp"
#include "csiauth/synth.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace csiauth;
using harness::ProtocolConfig;
using harness::SplitMode;

namespace {

synth::ScenarioSpec small_scenario(std::uint64_t seed = 3) {
  synth::SubjectGenerator g;
  g.subjects = 4;
  g.noise_sigma = 0.05;
  g.seed = seed;
  synth::ScenarioSpec s;
  s.subjects = synth::generate_subjects(g);
  s.samples_per_subject = 3;
  s.samples = 200;
  s.subcarriers = 32;
  return s;
}

ProtocolConfig small_protocol(SplitMode mode = SplitMode::per_acquisition_holdout) {
  ProtocolConfig p;
  p.window_size = 50;
  p.split_mode = mode;
  p.folds = 3;
  p.selection_k = 8;
  p.seed = 5;
  p.report.bioquake.resamples = 50;
  return p;
}

classify::ModelSpec knn(double k = 1) {
  classify::ModelSpec s;
  s.kind = classify::ModelKind::knn;
  s.hyperparams = {{"k", k}};
  return s;
}

classify::ModelSpec forest() {
  classify::ModelSpec s;
  s.kind = classify::ModelKind::random_forest;
  s.hyperparams = {{"n_trees", 15}};
  s.seed = 2;
  return s;
}

// Many pure-noise columns and few rows: picking features on all rows
// (test rows included) finds columns that happen to separate the test rows.
FeatureMatrix noise_features(std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix F;
  const std::size_t cols = 300;
  for (std::size_t j = 0; j < cols; ++j) F.names.push_back("n" + std::to_string(1000 + j));
  for (std::size_t i = 0; i < 40; ++i) {
    std::vector<double> row(cols);
    for (double& v : row) v = rng.normal();
    const std::string label = i % 2 == 0 ? "A" : "B";
    F.add_row(row, label, label + "#" + std::to_string(i));
  }
  return F;
}

}  // namespace

TEST_CASE("window start examples") {
  ProtocolConfig p;
  p.window_size = 50;
  CHECK(harness::window_starts(500, p).size() == 10);
  CHECK(harness::window_starts(120, p).size() == 2);
  CHECK(harness::window_starts(50, p) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS_CODE(harness::window_starts(49, p), ErrorCode::record_too_short);
  p.window_stride = 25;
  CHECK(harness::window_starts(120, p) == std::vector<std::size_t>{0, 25, 50});
}

TEST_CASE("windows partition each record without overlap") {
  const auto d = synth::generate_dataset(small_scenario());
  const auto p = small_protocol();
  const auto windows = harness::window_dataset(d, p);
  CHECK(windows.size() == d.records.size() * 4);
  for (const auto& w : windows) {
    CHECK(w.matrix.samples() == 50);
    CHECK(w.ref.start % 50 == 0);
    CHECK(w.label == d.records[w.ref.record].label);
  }
}

TEST_CASE("stratified folds partition rows and balance classes") {
  const auto F = testing::blobs(3, 23, 2, 4.0, 9);
  ProtocolConfig p;
  p.split_mode = SplitMode::per_window_stratified;
  p.folds = 5;
  p.seed = 1;
  const auto folds = harness::make_folds(F, p);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(F.rows(), 0);
  for (const auto& f : folds) {
    CHECK(f.train.size() + f.test.size() == F.rows());
    for (std::size_t i : f.test) ++seen[i];
    std::map<std::string, int> per_class;
    for (std::size_t i : f.test) ++per_class[F.labels[i]];
    for (const auto& [c, n] : per_class) {
      CHECK(n >= 23 / 5);
      CHECK(n <= 23 / 5 + 1);
    }
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("stratified folds need enough windows per class") {
  const auto F = testing::blobs(2, 3, 2, 4.0, 9);
  ProtocolConfig p;
  p.split_mode = SplitMode::per_window_stratified;
  p.folds = 5;
  CHECK_THROWS_AS_CODE(harness::make_folds(F, p), ErrorCode::insufficient_data);
}

TEST_CASE("holdout folds keep acquisitions on one side") {
  const auto d = synth::generate_dataset(small_scenario());
  const auto p = small_protocol();
  const auto F = harness::build_feature_matrix(d, p);
  const auto folds = harness::make_folds(F, p);
  CHECK(folds.size() == 3);
  for (std::size_t j = 0; j < folds.size(); ++j) {
    std::set<std::string> train, test;
    for (std::size_t i : folds[j].train) train.insert(F.groups[i]);
    for (std::size_t i : folds[j].test) test.insert(F.groups[i]);
    for (const auto& g : test) CHECK_FALSE(train.contains(g));
    // Fold j holds out acquisition j of every subject.
    CHECK(test.size() == 4);
    for (const auto& g : test) CHECK(g.ends_with("#" + std::to_string(j)));
  }
}

TEST_CASE("check_disjoint_groups rejects straddling acquisitions") {
  FeatureMatrix F;
  F.names = {"x"};
  const std::array<double, 1> v{0.0};
  F.add_row(v, "A", "A#0");
  F.add_row(v, "A", "A#0");
  F.add_row(v, "B", "B#0");
  CHECK_NOTHROW(harness::check_disjoint_groups(F, {{0, 1}, {2}}));
  CHECK_THROWS_AS_CODE(harness::check_disjoint_groups(F, {{0, 2}, {1}}), ErrorCode::leakage_detected);
  CHECK_THROWS_AS_CODE(harness::check_disjoint_groups(F, {{0, 1, 2}, {2}}), ErrorCode::leakage_detected);
}

TEST_CASE("holdout needs two acquisitions per subject") {
  auto s = small_scenario();
  s.samples_per_subject = 1;
  const auto d = synth::generate_dataset(s);
  const auto p = small_protocol();
  const auto F = harness::build_feature_matrix(d, p);
  CHECK_THROWS_AS_CODE(harness::make_folds(F, p), ErrorCode::insufficient_data);
}

TEST_CASE("clean mode never fits on test rows") {
  const auto d = synth::generate_dataset(small_scenario());
  for (auto mode : {SplitMode::per_acquisition_holdout, SplitMode::per_window_stratified}) {
    const auto p = small_protocol(mode);
    const auto all = harness::build_feature_matrix(d, p);
    const auto folds = harness::make_folds(all, p);
    std::size_t events = 0;
    harness::FitAudit audit = [&](const harness::FitEvent& e) {
      ++events;
      const auto& test = folds.at(e.fold).test;
      for (std::size_t r : e.rows)
        CHECK(std::find(test.begin(), test.end(), r) == test.end());
    };
    const std::array<classify::ModelSpec, 2> models{knn(), forest()};
    harness::cross_validate(all, folds, p, models, audit);
    CHECK(events == folds.size() * 4);
  }
}

TEST_CASE("leaky mode does fit on test rows") {
  const auto d = synth::generate_dataset(small_scenario());
  auto p = small_protocol();
  p.normalization = harness::Normalization::global_zscore_leaky;
  const auto F = harness::build_feature_matrix(d, p);
  const auto folds = harness::make_folds(F, p);
  bool touched = false;
  harness::FitAudit audit = [&](const harness::FitEvent& e) {
    if (e.stage == harness::FitStage::model) return;
    for (std::size_t r : e.rows)
      if (std::ranges::find(folds[e.fold].test, r) != folds[e.fold].test.end()) touched = true;
  };
  const std::array<classify::ModelSpec, 1> models{knn()};
  harness::cross_validate(F, folds, p, models, audit);
  CHECK(touched);
}

TEST_CASE("run_cv is deterministic") {
  const auto d = synth::generate_dataset(small_scenario());
  const auto p = small_protocol();
  const std::array<classify::ModelSpec, 2> models{knn(), forest()};
  const auto a = harness::run_cv(d, p, models);
  const auto b = harness::run_cv(d, p, models);
  CHECK(report::run_digest(a) == report::run_digest(b));
  CHECK(a.windows == 48);
  CHECK(a.folds == 3);
  REQUIRE(a.models.size() == 2);
  CHECK(a.models[0].cv.scores.rows() == 48);
  auto q = p;
  q.seed = 6;
  auto m2 = models;
  m2[1].seed = 3;
  const auto c = harness::run_cv(d, q, m2);
  CHECK(report::run_digest(a) != report::run_digest(c));
}

TEST_CASE("scaler uses population statistics") {
  FeatureMatrix F;
  F.names = {"x", "c"};
  for (double x : {1.0, 2.0, 3.0, 6.0}) {
    const std::array<double, 2> v{x, 7.0};
    F.add_row(v, "A");
  }
  const std::array<std::size_t, 4> rows{0, 1, 2, 3};
  const auto s = harness::fit_scaler(F, rows);
  CHECK(s.mean[0] == doctest::Approx(3.0));
  CHECK(s.scale[0] == doctest::Approx(std::sqrt(3.5)));
  CHECK(s.scale[1] == 1.0);
  const auto Z = harness::apply_scaler(s, F);
  CHECK(Z.at(3, 0) == doctest::Approx(3.0 / std::sqrt(3.5)));
  CHECK(Z.at(0, 1) == 0.0);
}

TEST_CASE("leakage audit: clean protocol is not flagged") {
  const auto d = synth::generate_dataset(small_scenario());
  const auto p = small_protocol();
  const auto a = harness::leakage_audit(d, p, knn());
  CHECK_FALSE(a.flagged);
  CHECK(a.flagged == (std::abs(a.delta) > p.leakage_tolerance));
}

TEST_CASE("leakage audit: selection on all rows inflates accuracy") {
  int flagged = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto F = noise_features(seed);
    ProtocolConfig p;
    p.split_mode = SplitMode::per_window_stratified;
    p.folds = 5;
    p.selection_k = 3;
    p.selection_bins = 2;
    p.seed = seed;
    const auto a = harness::leakage_audit_features(F, harness::make_folds(F, p), p, knn(5));
    CHECK(a.flagged == (std::abs(a.delta) > p.leakage_tolerance));
    if (a.flagged && a.delta > 0) ++flagged;
  }
  CHECK(flagged >= 4);
}

TEST_CASE("grid search picks k=1 when large k swamps the minority class") {
  Rng rng(4);
  FeatureMatrix F;
  F.names = {"x", "y"};
  for (int i = 0; i < 60; ++i) {
    const bool minority = i % 6 == 0;
    const std::array<double, 2> v{(minority ? 10.0 : 0.0) + rng.normal(), rng.normal()};
    F.add_row(v, minority ? "B" : "A", "g" + std::to_string(i));
  }
  ProtocolConfig p;
  p.split_mode = SplitMode::per_window_stratified;
  p.folds = 5;
  p.seed = 1;
  const auto r = harness::grid_search_features(F, p, classify::ModelKind::knn, {{"k", {45, 1}}});
  REQUIRE(r.table.size() == 2);
  CHECK(r.best.param("k") == 1.0);
  CHECK(r.table[1].mean_accuracy > r.table[0].mean_accuracy);
}

TEST_CASE("grid search ties resolve to the smallest hyperparameters") {
  const auto F = testing::blobs(3, 20, 2, 8.0, 2);
  ProtocolConfig p;
  p.split_mode = SplitMode::per_window_stratified;
  p.folds = 4;
  const auto r1 = harness::grid_search_features(F, p, classify::ModelKind::knn, {{"k", {3, 1, 2}}});
  const auto r2 = harness::grid_search_features(F, p, classify::ModelKind::knn, {{"k", {2, 3, 1}}});
  CHECK(r1.best == r2.best);
  CHECK(r1.best.param("k") == 1.0);
  const auto single = harness::grid_search_features(F, p, classify::ModelKind::knn, {{"k", {3}}});
  CHECK(single.table.size() == 1);
  CHECK(single.best.param("k") == 3.0);
}

TEST_CASE("expand_grid is a cartesian product and rejects bad values") {
  const auto specs =
      harness::expand_grid(classify::ModelKind::knn, {{"k", {1, 3}}, {"distance_weighted", {0, 1}}}, 4);
  CHECK(specs.size() == 4);
  for (const auto& s : specs) CHECK(s.seed == 4);
  CHECK_THROWS_AS_CODE(harness::expand_grid(classify::ModelKind::knn, {{"nope", {1}}}, 0),
                       ErrorCode::invalid_spec);
  CHECK_THROWS_AS_CODE(harness::expand_grid(classify::ModelKind::knn, {{"k", {}}}, 0),
                       ErrorCode::invalid_config);
}

TEST_CASE("replay of a noiseless victim is always accepted") {
  auto s = small_scenario();
  for (auto& subj : s.subjects) subj.channel.noise_sigma = 0.0;
  s.attack.kind = synth::AttackKind::replay;
  s.attack.parameter = 0.0;
  s.attack.victim = s.subjects[1].subject_id;
  const auto d = synth::generate_dataset(s);
  const auto p = small_protocol();
  const auto F = harness::build_feature_matrix(d, p);
  CHECK(harness::attack_rows(F).size() == 12);
  const auto out = harness::evaluate_attacks(F, p, knn());
  REQUIRE(out.size() == 1);
  CHECK(out[0].victim == s.attack.victim);
  CHECK(out[0].kind == "replay");
  CHECK(out[0].windows == 12);
  CHECK(out[0].far == 1.0);
}

TEST_CASE("hand policy filters records but keeps attacks labelled") {
  auto s = small_scenario();
  s.attack.kind = synth::AttackKind::mimicry;
  s.attack.parameter = 0.1;
  auto d = synth::generate_dataset(s);
  for (auto& r : d.records)
    if (!is_attack_label(r.label.subject_id) && r.label.sample_index == 2) r.label.hand = Hand::left;
  const auto p = small_protocol();
  const auto F = harness::build_feature_matrix(d, p);
  CHECK(harness::genuine_rows(F).size() == 4 * 2 * 4);
  CHECK(harness::attack_rows(F).size() == 3 * 4);
  for (std::size_t i : harness::attack_rows(F)) CHECK(attack_kind(F.labels[i]) == "mimicry");
  auto q = p;
  q.hands = {Hand::left};
  const auto L = harness::build_feature_matrix(d, q);
  CHECK(L.rows() == 4 * 4);
}

TEST_CASE("run_cv reports attacks and a leakage audit") {
  auto s = small_scenario();
  s.attack.kind = synth::AttackKind::mimicry;
  s.attack.parameter = 0.0;
  const auto d = synth::generate_dataset(s);
  const auto p = small_protocol();
  const std::array<classify::ModelSpec, 1> models{knn()};
  const auto r = harness::run_cv(d, p, models);
  CHECK(r.windows == 48);
  REQUIRE(r.leakage.has_value());
  REQUIRE(r.models[0].attacks.size() == 1);
  CHECK(r.models[0].attacks[0].far == doctest::Approx(1.0));
}

TEST_CASE("protocol validation") {
  ProtocolConfig p;
  p.window_size = 4;
  CHECK_THROWS_AS_CODE(harness::validate(p), ErrorCode::invalid_config);
  p = {};
  p.folds = 1;
  CHECK_THROWS_AS_CODE(harness::validate(p), ErrorCode::invalid_config);
  p = {};
  p.hands.clear();
  CHECK_THROWS_AS_CODE(harness::validate(p), ErrorCode::invalid_config);
  p = {};
  p.preprocess.mad_window = 4;
  CHECK_THROWS_AS_CODE(harness::validate(p), ErrorCode::invalid_config);
  CHECK(harness::split_mode_from_string("per_window_stratified") == SplitMode::per_window_stratified);
  CHECK_THROWS(harness::split_mode_from_string("random"));
}
