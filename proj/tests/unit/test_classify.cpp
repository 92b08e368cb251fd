// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>

#include "csiauth/classify.hpp"
#include "csiauth/harness.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace csiauth;
using classify::ModelKind;
using classify::ModelSpec;

namespace {

// Two blobs 6 sigma apart along every axis, interleaved rows.
FeatureMatrix two_blobs(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix F;
  F.names = {"x0", "x1"};
  for (std::size_t i = 0; i < per_class; ++i)
    for (int c = 0; c < 2; ++c) {
      const std::vector<double> row = {6.0 * c + rng.normal(), -6.0 * c + rng.normal()};
      F.add_row(row, c == 0 ? "A" : "B");
    }
  return F;
}

double accuracy(const ScoreMatrix& s) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < s.rows(); ++i) ok += s.class_ids[s.predicted(i)] == s.true_labels[i];
  return double(ok) / double(s.rows());
}

ModelSpec spec(ModelKind kind, std::map<std::string, double> hp = {}, std::uint64_t seed = 1) {
  ModelSpec s;
  s.kind = kind;
  s.hyperparams = std::move(hp);
  s.seed = seed;
  return s;
}

const ModelKind kAll[] = {ModelKind::knn, ModelKind::gaussian_nb, ModelKind::decision_tree,
                          ModelKind::random_forest, ModelKind::mlp};

}  // namespace

TEST_CASE("every model separates two blobs") {
  const auto F = two_blobs(100, 1);
  for (ModelKind k : kAll) {
    INFO(classify::to_string(k));
    const auto m = classify::fit(spec(k), F);
    const auto s = classify::predict_proba(m, F);
    CHECK_NOTHROW(validate_scores(s));
    CHECK(accuracy(s) >= 0.99);
  }
}

TEST_CASE("knn k=1 reproduces training labels with probability one") {
  const auto F = testing::blobs(4, 20, 3, 1.0, 2);
  const auto s = classify::predict_proba(classify::fit(spec(ModelKind::knn, {{"k", 1}}), F), F);
  for (std::size_t i = 0; i < s.rows(); ++i) CHECK(s.at(i, s.class_index(s.true_labels[i])) == 1.0);
}

TEST_CASE("gaussian_nb on uninformative features returns priors") {
  FeatureMatrix F;
  F.names = {"x"};
  // Class A: 3 rows, class B: 1 row pattern, identical per-class mean and variance.
  const double vals[] = {-1.0, 1.0, -1.0, 1.0};
  for (int rep = 0; rep < 3; ++rep)
    for (double v : vals) F.add_row(std::vector<double>{v}, "A");
  for (double v : vals) F.add_row(std::vector<double>{v}, "B");
  const auto s = classify::predict_proba(classify::fit(spec(ModelKind::gaussian_nb), F), F);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    CHECK(s.at(i, 0) == doctest::Approx(0.75));
    CHECK(s.at(i, 1) == doctest::Approx(0.25));
  }
}

TEST_CASE("single unbounded tree gives pure leaves on training data") {
  const auto F = testing::blobs(3, 30, 4, 0.3, 3);
  const auto s = classify::predict_proba(
      classify::fit(spec(ModelKind::random_forest, {{"n_trees", 1}, {"bootstrap", 0}, {"max_features", 0}}), F), F);
  for (double p : s.probabilities) CHECK((p == 0.0 || p == 1.0));
}

TEST_CASE("forest of one without bootstrap equals its tree") {
  const auto F = testing::blobs(3, 30, 5, 0.3, 4);
  for (double mf : {0.0, 2.0}) {
    const auto tree = classify::fit(spec(ModelKind::decision_tree, {{"max_features", mf}}, 17), F);
    const auto forest = classify::fit(
        spec(ModelKind::random_forest, {{"n_trees", 1}, {"bootstrap", 0}, {"max_features", mf}}, 17), F);
    CHECK(classify::predict_proba(tree, F).probabilities == classify::predict_proba(forest, F).probabilities);
  }
}

TEST_CASE("fitting is deterministic given the seed") {
  const auto F = testing::blobs(3, 25, 4, 0.4, 5);
  for (ModelKind k : kAll) {
    INFO(classify::to_string(k));
    const auto a = classify::fit(spec(k, {}, 9), F);
    const auto b = classify::fit(spec(k, {}, 9), F);
    CHECK(classify::encode_model(a) == classify::encode_model(b));
    CHECK(classify::predict_proba(a, F).probabilities == classify::predict_proba(b, F).probabilities);
  }
  const auto r1 = classify::fit(spec(ModelKind::random_forest, {{"n_trees", 5}}, 1), F);
  const auto r2 = classify::fit(spec(ModelKind::random_forest, {{"n_trees", 5}}, 2), F);
  CHECK(classify::encode_model(r1) != classify::encode_model(r2));
}

TEST_CASE("MLP loss decreases monotonically over the first 10 epochs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    // The pipeline always feeds z-scored features to the model.
    const auto raw = two_blobs(100, seed);
    std::vector<std::size_t> all(raw.rows());
    std::iota(all.begin(), all.end(), 0);
    const auto F = harness::apply_scaler(harness::fit_scaler(raw, all), raw);
    const auto m = classify::fit(spec(ModelKind::mlp), F);
    const auto& h = m.loss_history();
    REQUIRE(h.size() >= 10);
    for (std::size_t e = 1; e < 10; ++e) CHECK(h[e] < h[e - 1]);
  }
}

TEST_CASE("MLP analytic gradient matches central differences") {
  Rng rng(7);
  const classify::mlp_detail::Shape shape{4, 5, 3};
  std::vector<double> params(shape.size());
  for (auto& p : params) p = rng.normal(0.0, 0.5);
  std::vector<double> x(6 * 4);
  for (auto& v : x) v = rng.normal();
  const std::vector<int> y = {0, 1, 2, 2, 1, 0};
  const classify::Design d{x, 6, 4};
  std::vector<double> grad(params.size());
  classify::mlp_detail::loss_and_gradient(shape, params, d, y, 1e-3, grad);
  std::vector<double> dummy(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double h = 1e-6;
    auto p = params;
    p[i] += h;
    const double up = classify::mlp_detail::loss_and_gradient(shape, p, d, y, 1e-3, dummy);
    p[i] -= 2 * h;
    const double down = classify::mlp_detail::loss_and_gradient(shape, p, d, y, 1e-3, dummy);
    const double fd = (up - down) / (2 * h);
    CHECK(std::abs(fd - grad[i]) / std::max(1e-8, std::abs(fd) + std::abs(grad[i])) < 1e-5);
  }
}

TEST_CASE("fit errors") {
  auto F = two_blobs(5, 8);
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io_error;
  };
  auto single = F;
  for (auto& l : single.labels) l = "A";
  CHECK(code([&] { classify::fit(spec(ModelKind::knn), single); }) == ErrorCode::single_class);
  auto nan = F;
  nan.data[3] = std::nan("");
  CHECK(code([&] { classify::fit(spec(ModelKind::knn), nan); }) == ErrorCode::degenerate_feature);
  CHECK(code([&] { classify::fit(spec(ModelKind::knn, {{"k", 0}}), F); }) == ErrorCode::invalid_spec);
  CHECK(code([&] { classify::fit(spec(ModelKind::random_forest, {{"n_trees", 0}}), F); }) ==
        ErrorCode::invalid_spec);
  CHECK(code([&] { classify::fit(spec(ModelKind::mlp, {{"hidden", 0}}), F); }) == ErrorCode::invalid_spec);
  CHECK(code([&] { classify::fit(spec(ModelKind::knn, {{"bogus", 1}}), F); }) == ErrorCode::invalid_spec);
  const auto m = classify::fit(spec(ModelKind::knn), F);
  auto renamed = F;
  renamed.names[1] = "other";
  CHECK(code([&] { classify::predict_proba(m, renamed); }) == ErrorCode::schema_mismatch);
}

TEST_CASE("model container round trip and corruption") {
  const auto F = testing::blobs(3, 20, 3, 0.5, 9);
  const auto dir = testing::temp_dir("models");
  for (ModelKind k : kAll) {
    INFO(classify::to_string(k));
    const auto m = classify::fit(spec(k, {}, 4), F);
    classify::save_model(m, dir / "m.bin");
    const auto back = classify::load_model(dir / "m.bin");
    CHECK(back.spec() == m.spec());
    CHECK(back.class_ids() == m.class_ids());
    CHECK(classify::predict_proba(back, F).probabilities == classify::predict_proba(m, F).probabilities);
    CHECK(classify::encode_model(back) == classify::encode_model(m));
  }
  auto bytes = classify::encode_model(classify::fit(spec(ModelKind::knn), F));
  auto code = [](const std::vector<std::uint8_t>& b) {
    try {
      classify::decode_model(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io_error;
  };
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code(magic) == ErrorCode::bad_magic);
  auto version = bytes;
  version[8] = 7;
  CHECK(code(version) == ErrorCode::unsupported_version);
  auto cut = bytes;
  cut.pop_back();
  CHECK(code(cut) == ErrorCode::length_mismatch);
  auto extra = bytes;
  extra.push_back(0);
  CHECK(code(extra) == ErrorCode::length_mismatch);
}

TEST_CASE("model kinds and descriptions") {
  for (ModelKind k : kAll) CHECK(classify::model_kind_from_string(classify::to_string(k)) == k);
  CHECK_THROWS_AS(classify::model_kind_from_string("svm"), Error);
  CHECK(classify::describe(spec(ModelKind::knn)) == "knn(distance_weighted=0,k=5)");
}
