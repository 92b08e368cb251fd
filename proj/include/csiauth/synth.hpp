// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::synth {

struct PathSpec {
  double gain = 1.0;    // linear attenuation, > 0
  double phase = 0.0;   // radians
  double delay = 0.0;   // seconds, >= 0
};

/// Multipath channel plus injected hardware artifacts for one subject.
struct ChannelSpec {
  std::vector<PathSpec> paths;
  double noise_sigma = 0.0;            // std of each complex component
  double cfo_offset = 0.0;             // radians, added to every entry
  double sfo_slope = 0.0;              // radians per subcarrier index
  double temporal_jitter_sigma = 0.0;  // relative gain std per time sample
  std::uint64_t seed = 0;
};

enum class AttackKind { none, replay, mimicry, drift };

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  // replay: extra jitter sigma; mimicry: perturbation fraction; drift: gain slope per sample.
  double parameter = 0.0;
  std::string victim;        // defaults to the first subject
  int records = 0;           // defaults to samples_per_subject
  std::uint64_t seed = 0x5eed;
};

struct SubjectSpec {
  std::string subject_id;
  ChannelSpec channel;
};

struct ScenarioSpec {
  std::vector<SubjectSpec> subjects;
  int samples_per_subject = 5;
  std::size_t samples = 1000;       // T per acquisition
  std::size_t subcarriers = 128;    // K
  double freq_start = 5.16e9;
  double freq_step = 312.5e3;
  Hand hand = Hand::right;
  AttackSpec attack;
};

/// Draws random multipath subjects; path parameters are uniform in the
/// given ranges and phases uniform in [-pi, pi).
struct SubjectGenerator {
  std::size_t subjects = 20;
  std::size_t paths = 3;
  double gain_min = 0.2;
  double gain_max = 1.0;
  double delay_min = 0.0;
  double delay_max = 200e-9;
  double noise_sigma = 0.05;
  double temporal_jitter_sigma = 0.02;
  double cfo_max = 3.0;    // |cfo_offset| bound, radians
  double sfo_max = 0.05;   // |sfo_slope| bound, radians per subcarrier
  std::uint64_t seed = 1;
  std::string id_prefix = "S";
};

void validate(const SubjectGenerator& g);
std::vector<SubjectSpec> generate_subjects(const SubjectGenerator& g);

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view text);

void validate(const ChannelSpec& spec);
void validate(const ScenarioSpec& spec);

/// Noiseless H(f) = sum_n gain_n * exp(-j (phase_n + 2 pi f delay_n)).
Complex channel_response(const ChannelSpec& spec, double freq_hz);

/// Builds a K x T matrix: model response, per-sample gain jitter, additive
/// circular Gaussian noise, then the CFO and SFO phase artifacts.
CsiMatrix synthesize_matrix(const ChannelSpec& spec, std::size_t subcarriers, std::size_t samples,
                            const std::vector<double>& freqs);

/// Copy of `spec` with every path parameter moved by `fraction` along a
/// fixed pseudo-random direction derived from `seed`.
ChannelSpec perturb(const ChannelSpec& spec, double fraction, std::uint64_t seed);

/// One record per subject and acquisition, followed by any attack records
/// labelled attack:<kind>:<victim>.
Dataset generate_dataset(const ScenarioSpec& s);

}  // namespace csiauth::synth
