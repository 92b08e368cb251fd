// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "csiauth/model.hpp"
#include "csiauth/random.hpp"
#include "csiauth/stats.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace csiauth;

TEST_CASE("validate_matrix: minimal valid 2x2") {
  CsiMatrix m(2, 2, {5.18e9, 5.19e9});
  CHECK(validate_matrix(m).empty());
}

TEST_CASE("validate_matrix: duplicate frequency") {
  CsiMatrix m(2, 2, {5.18e9, 5.18e9});
  const auto v = validate_matrix(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::non_increasing_freqs);
  CHECK(v[0].k == 1);
}

TEST_CASE("validate_matrix: NaN reported only once cleaned") {
  CsiMatrix m(2, 3, {1.0, 2.0});
  m(1, 2) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK(validate_matrix(m).empty());
  m.meta.cleaned = true;
  const auto v = validate_matrix(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::non_finite_entry);
  CHECK(v[0].k == 1);
  CHECK(v[0].t == 2);
}

TEST_CASE("validate_matrix: too small and mismatched axes, in order") {
  CsiMatrix m(1, 1, {1.0});
  const auto v = validate_matrix(m);
  REQUIRE(v.size() == 2);
  CHECK(v[0].kind == ViolationKind::too_few_subcarriers);
  CHECK(v[1].kind == ViolationKind::too_few_samples);
  CHECK(validate_matrix(m).size() == v.size());
}

TEST_CASE("CsiMatrix window and subcarrier selection") {
  Rng rng(3);
  const auto m = testing::random_matrix(rng, 5, 8);
  const auto w = m.window(2, 4);
  CHECK(w.samples() == 4);
  CHECK(w(3, 0) == m(3, 2));
  const std::vector<std::size_t> keep = {0, 3};
  const auto s = m.keep_subcarriers(keep);
  CHECK(s.subcarriers() == 2);
  CHECK(s.freqs()[1] == m.freqs()[3]);
  CHECK(s(1, 5) == m(3, 5));
}

TEST_CASE("ScoreMatrix validation") {
  ScoreMatrix s;
  s.class_ids = {"A", "B"};
  s.probabilities = {0.25, 0.75, 1.0, 0.0};
  s.true_labels = {"A", "B"};
  CHECK_NOTHROW(validate_scores(s));
  CHECK(s.predicted(0) == 1);
  s.probabilities[1] = 0.7;
  CHECK_THROWS_AS(validate_scores(s), Error);
}

TEST_CASE("attack labels") {
  const auto l = attack_label("replay", "S01");
  CHECK(is_attack_label(l));
  CHECK(attack_victim(l) == "S01");
  CHECK(attack_kind(l) == "replay");
  CHECK_FALSE(is_attack_label("S01"));
}

TEST_CASE("FeatureMatrix row and column selection") {
  FeatureMatrix F;
  F.names = {"a", "b", "c"};
  const std::vector<double> r0 = {1, 2, 3}, r1 = {4, 5, 6};
  F.add_row(r0, "x", "x#0");
  F.add_row(r1, "y", "y#0");
  const std::vector<std::size_t> cols = {2, 0};
  const auto C = F.select_columns(cols);
  CHECK(C.names == std::vector<std::string>{"c", "a"});
  CHECK(C.at(1, 0) == 6.0);
  const std::vector<std::size_t> rows = {1};
  const auto R = F.select_rows(rows);
  CHECK(R.rows() == 1);
  CHECK(R.labels[0] == "y");
  CHECK(R.groups[0] == "y#0");
}

TEST_CASE("stats helpers") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(x) == doctest::Approx(2.5));
  CHECK(stats::variance_population(x) == doctest::Approx(1.25));
  CHECK(stats::variance_sample(x) == doctest::Approx(5.0 / 3.0));
  CHECK(stats::median(x) == 2.5);
  CHECK(stats::quantile(x, 0.25) == doctest::Approx(1.75));
  const std::vector<double> big = {1e9 + 1, 1e9 + 2, 1e9 + 3};
  CHECK(stats::variance_sample(big) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Rng is reproducible and substreams differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(Rng::substream(1, 0) != Rng::substream(1, 1));
  Rng c(7);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = c.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.05);
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}
