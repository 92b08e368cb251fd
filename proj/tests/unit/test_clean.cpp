// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "csiauth/clean.hpp"
#include "csiauth/stats.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace csiauth;

namespace {

CsiMatrix from_energies(const std::vector<double>& e, std::size_t T = 3) {
  std::vector<std::vector<double>> amp;
  for (double v : e) amp.push_back(std::vector<double>(T, std::sqrt(v)));
  return testing::polar_matrix(amp);
}

CsiMatrix series_matrix(const std::vector<double>& s) { return testing::polar_matrix({s, s}); }

// Brute-force fence: sorted energies, inclusive quartiles.
std::vector<std::size_t> fence_oracle(const std::vector<double>& e) {
  std::vector<double> s = e;
  std::sort(s.begin(), s.end());
  auto q = [&](double p) {
    const double pos = p * (s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - lo) * (s[hi] - s[lo]);
  };
  const double q1 = q(0.25), q3 = q(0.75), iqr = q3 - q1;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k] < q1 - 1.5 * iqr || e[k] > q3 + 1.5 * iqr) out.push_back(k);
  return out;
}

}  // namespace

TEST_CASE("iqr: equal energies keep everything") {
  const auto r = clean::iqr_subcarrier_filter(from_energies(std::vector<double>(8, 2.0)));
  CHECK(r.removed_indices.empty());
  CHECK(r.matrix.subcarriers() == 8);
}

TEST_CASE("iqr: single hot subcarrier is removed") {
  std::vector<double> e(17, 1.0);
  e[5] = 100.0;
  const auto r = clean::iqr_subcarrier_filter(from_energies(e));
  CHECK(r.removed_indices == std::vector<std::size_t>{5});
  CHECK(r.matrix.subcarriers() == 16);
  CHECK(r.matrix.freqs()[5] == testing::freqs(17)[6]);
}

TEST_CASE("iqr: random energies match the brute-force fence") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 4 + rng.index(40);
    std::vector<double> e(K);
    for (auto& v : e) v = std::exp(rng.normal(0.0, 1.5));
    const auto expect = fence_oracle(e);
    if (K - expect.size() < 2) continue;
    const auto m = from_energies(e);
    const auto r = clean::iqr_subcarrier_filter(m);
    CHECK(r.removed_indices == oracle::iqr_outliers(m));
    CHECK(r.removed_indices == fence_oracle(e));
  }
}

TEST_CASE("iqr: ramp energies") {
  std::vector<double> e(12);
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = 1.0 + k;
  e[11] = 40.0;
  const auto r = clean::iqr_subcarrier_filter(from_energies(e));
  CHECK(r.removed_indices == fence_oracle(clean::subcarrier_energy(from_energies(e))));
  CHECK(r.removed_indices == std::vector<std::size_t>{11});
}

TEST_CASE("iqr: errors") {
  CHECK_THROWS_AS(clean::iqr_subcarrier_filter(from_energies({1, 1, 1})), Error);
}

TEST_CASE("mad: spike in constant series is repaired") {
  std::vector<double> s(21, 2.0);
  s[10] = 200.0;
  const auto r = clean::mad_temporal_repair(series_matrix(s), 5);
  CHECK(r.repaired_count == 2);  // one per subcarrier
  CHECK(r.matrix.amplitude(0, 10) == doctest::Approx(2.0));
}

TEST_CASE("mad: edge spike clamps to the nearest valid value") {
  std::vector<double> s = {50.0, 1.0, 1.5, 2.0, 2.0, 1.0, 1.5};
  const auto flags = clean::mad_flags(s, 5);
  CHECK(flags[0]);
  const auto r = clean::mad_temporal_repair(series_matrix(s), 5);
  CHECK(r.matrix.amplitude(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("mad: smooth monotone series is untouched") {
  std::vector<double> s(30);
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = 1.0 + 0.1 * t;
  const auto r = clean::mad_temporal_repair(series_matrix(s), 7);
  CHECK(r.repaired_count == 0);
}

TEST_CASE("mad: window errors") {
  std::vector<double> s(5, 1.0);
  CHECK_THROWS_AS(clean::mad_temporal_repair(series_matrix(s), 7), Error);
  CHECK_THROWS_AS(clean::mad_temporal_repair(series_matrix(s), 4), Error);
}

TEST_CASE("mad: injected spikes all flagged, unflagged entries bit-identical, phase kept") {
  Rng rng(11);
  const std::size_t K = 8, T = 200;
  CsiMatrix m(K, T, testing::freqs(K));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      m(k, t) = std::polar(1.0 + 0.05 * rng.normal(), rng.uniform(-3.0, 3.0));
  auto spiked = m;
  std::vector<std::size_t> spikes;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 5; t < T; t += 100) {
      spiked(k, t) *= 20.0;
      spikes.push_back(k * T + t);
    }
  const auto r = clean::mad_temporal_repair(spiked, 11);
  // Every spike is caught; short windows may also flag a few noisy samples.
  CHECK(std::includes(r.repaired.begin(), r.repaired.end(), spikes.begin(), spikes.end()));
  CHECK(r.repaired_count == r.repaired.size());
  CHECK(r.repaired.size() < spikes.size() + 0.02 * double(K * T));
  for (std::size_t i = 0; i < spiked.values().size(); ++i) {
    if (std::binary_search(r.repaired.begin(), r.repaired.end(), i)) {
      CHECK(std::abs(std::arg(r.matrix.values()[i]) - std::arg(spiked.values()[i])) < 1e-12);
    } else {
      CHECK(r.matrix.values()[i] == spiked.values()[i]);
    }
  }
  const auto zb = clean::zscore_spectrum(spiked);
  const auto za = clean::zscore_spectrum(r.matrix);
  auto maxabs = [](const std::vector<double>& z) {
    double mx = 0.0;
    for (double v : z) mx = std::max(mx, std::abs(v));
    return mx;
  };
  CHECK(maxabs(za) < maxabs(zb));
}

TEST_CASE("zscore_spectrum") {
  const auto z = clean::zscore_spectrum(testing::polar_matrix({{1, 2, 3}, {4, 4, 4}}));
  CHECK(z[0] == doctest::Approx(-1.224744871391589));
  CHECK(z[1] == doctest::Approx(0.0));
  CHECK(z[2] == doctest::Approx(1.224744871391589));
  for (std::size_t t = 3; t < 6; ++t) CHECK(z[t] == 0.0);
}
