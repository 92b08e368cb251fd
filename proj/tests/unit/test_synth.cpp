// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "csiauth/features.hpp"
#include "csiauth/ingest.hpp"
#include "csiauth/synth.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace csiauth;
using std::numbers::pi;

namespace {

synth::ChannelSpec one_path(double gain, double phase, double delay) {
  synth::ChannelSpec c;
  c.paths.push_back({gain, phase, delay});
  return c;
}

synth::ScenarioSpec small_scenario(double noise) {
  synth::SubjectGenerator g;
  g.subjects = 3;
  g.noise_sigma = noise;
  g.seed = 9;
  synth::ScenarioSpec s;
  s.subjects = synth::generate_subjects(g);
  s.samples_per_subject = 2;
  s.samples = 20;
  s.subcarriers = 16;
  return s;
}

}  // namespace

TEST_CASE("flat single path gives 1+0j everywhere") {
  const auto m = synth::synthesize_matrix(one_path(1.0, 0.0, 0.0), 8, 4, testing::freqs(8));
  for (const auto& v : m.values()) {
    CHECK(v.real() == 1.0);
    CHECK(v.imag() == 0.0);
  }
}

TEST_CASE("single delayed path matches closed form") {
  const auto spec = one_path(2.0, 0.0, 50e-9);
  const auto f = ingest::uniform_freqs(2e7, 1e6, 6);
  const auto m = synth::synthesize_matrix(spec, 6, 3, f);
  for (std::size_t k = 0; k < 6; ++k) {
    const Complex expect = 2.0 * std::exp(Complex(0.0, -2.0 * pi * f[k] * 50e-9));
    CHECK(std::abs(m(k, 1) - expect) < 1e-12);
  }
}

TEST_CASE("two equal paths half a turn apart cancel") {
  synth::ChannelSpec c;
  c.paths = {{1.0, 0.0, 0.0}, {1.0, pi, 0.0}};
  CHECK(std::abs(synth::channel_response(c, 5.18e9)) < 1e-12);
}

TEST_CASE("synthesize_matrix applies cfo and sfo as phase terms") {
  auto spec = one_path(1.0, 0.0, 0.0);
  spec.cfo_offset = 0.4;
  spec.sfo_slope = 0.01;
  const auto m = synth::synthesize_matrix(spec, 8, 2, testing::freqs(8));
  for (std::size_t k = 0; k < 8; ++k) CHECK(m.phase(k, 0) == doctest::Approx(0.4 + 0.01 * k));
}

TEST_CASE("invalid specs are rejected") {
  synth::ChannelSpec none;
  CHECK_THROWS_AS(synth::validate(none), Error);
  auto neg = one_path(-1.0, 0.0, 0.0);
  CHECK_THROWS_AS(synth::validate(neg), Error);
  auto noisy = one_path(1.0, 0.0, 0.0);
  noisy.noise_sigma = -0.1;
  CHECK_THROWS_AS(synth::validate(noisy), Error);
  auto s = small_scenario(0.0);
  s.subjects.resize(1);
  CHECK_THROWS_AS(synth::generate_dataset(s), Error);
}

TEST_CASE("generate_dataset is deterministic and sized") {
  const auto s = small_scenario(0.05);
  const auto a = synth::generate_dataset(s);
  const auto b = synth::generate_dataset(s);
  REQUIRE(a.records.size() == 6);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].label == b.records[i].label);
    CHECK(a.records[i].matrix.values() == b.records[i].matrix.values());
  }
  CHECK(a.records[0].label.subject_id == "S1");
  CHECK(a.records[1].label.sample_index == 1);
  // Acquisitions of one subject differ by their noise draw.
  CHECK(a.records[0].matrix.values() != a.records[1].matrix.values());
}

TEST_CASE("two subjects one sample") {
  auto s = small_scenario(0.0);
  s.subjects.resize(2);
  s.samples_per_subject = 1;
  CHECK(synth::generate_dataset(s).records.size() == 2);
}

TEST_CASE("zero-noise replay is an exact copy of a victim acquisition") {
  auto s = small_scenario(0.0);
  s.attack.kind = synth::AttackKind::replay;
  s.attack.parameter = 0.0;
  s.attack.victim = "S2";
  const auto d = synth::generate_dataset(s);
  REQUIRE(d.records.size() == 8);
  const auto& attack = d.records[6];
  CHECK(attack.label.subject_id == attack_label("replay", "S2"));
  CHECK(attack.matrix.values() == d.records[2].matrix.values());
  CHECK(d.records[7].matrix.values() == d.records[3].matrix.values());
}

TEST_CASE("mimicry with zero perturbation keeps the victim channel") {
  synth::ChannelSpec c;
  c.paths = {{0.5, 0.3, 1e-8}, {0.7, -1.0, 5e-8}};
  const auto p = synth::perturb(c, 0.0, 3);
  for (std::size_t i = 0; i < c.paths.size(); ++i) {
    CHECK(p.paths[i].gain == c.paths[i].gain);
    CHECK(p.paths[i].phase == c.paths[i].phase);
    CHECK(p.paths[i].delay == c.paths[i].delay);
  }
  const auto q = synth::perturb(c, 0.5, 3);
  CHECK(q.paths[0].gain != c.paths[0].gain);
  CHECK(q.paths[0].gain > 0.0);
}

TEST_CASE("static channel: temporal and stability features are exactly zero") {
  const auto s = small_scenario(0.0);
  auto spec = s.subjects[0].channel;
  spec.temporal_jitter_sigma = 0.0;
  const auto m = synth::synthesize_matrix(spec, 16, 12, testing::freqs(16));
  for (std::size_t t = 1; t < 12; ++t)
    for (std::size_t k = 0; k < 16; ++k) CHECK(m(k, t) == m(k, 0));
  for (const auto& fv : {features::temporal_features(m), features::stability_features(m)})
    for (double v : fv.values) CHECK(v == 0.0);
  const auto ph = features::phase_features(m);
  CHECK(ph.values[3] == 0.0);  // dphi_std_mean
  CHECK(ph.values[4] == 0.0);  // dphi_std_std
}

TEST_CASE("generated subjects follow the generator bounds") {
  synth::SubjectGenerator g;
  g.subjects = 12;
  const auto subs = synth::generate_subjects(g);
  REQUIRE(subs.size() == 12);
  CHECK(subs[0].subject_id == "S01");
  CHECK(subs[11].subject_id == "S12");
  for (const auto& s : subs) {
    CHECK(s.channel.paths.size() == 3);
    for (const auto& p : s.channel.paths) {
      CHECK(p.gain >= g.gain_min);
      CHECK(p.gain <= g.gain_max);
      CHECK(p.delay <= g.delay_max);
    }
    CHECK(std::abs(s.channel.cfo_offset) <= g.cfo_max);
  }
  CHECK(synth::generate_subjects(g)[4].channel.seed == subs[4].channel.seed);
}
