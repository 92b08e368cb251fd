// SPDX-License-Identifier: Apache-2.0
#include "csiauth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "csiauth/error.hpp"
#include "csiauth/ingest.hpp"
#include "csiauth/random.hpp"

namespace csiauth::synth {

using std::numbers::pi;

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::replay: return "replay";
    case AttackKind::mimicry: return "mimicry";
    case AttackKind::drift: return "drift";
  }
  return "none";
}

AttackKind attack_kind_from_string(std::string_view text) {
  if (text == "none" || text.empty()) return AttackKind::none;
  if (text == "replay") return AttackKind::replay;
  if (text == "mimicry") return AttackKind::mimicry;
  if (text == "drift") return AttackKind::drift;
  throw Error(ErrorCode::invalid_spec, "unknown attack kind '" + std::string(text) + "'");
}

void validate(const ChannelSpec& spec) {
  if (spec.paths.empty()) throw Error(ErrorCode::invalid_spec, "channel needs at least one path");
  for (const auto& p : spec.paths) {
    if (!(p.gain > 0.0) || !std::isfinite(p.gain)) {
      throw Error(ErrorCode::invalid_spec, "path gains must be positive");
    }
    if (!(p.delay >= 0.0) || !std::isfinite(p.delay) || !std::isfinite(p.phase)) {
      throw Error(ErrorCode::invalid_spec, "path delays must be finite and non-negative");
    }
  }
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::invalid_spec, "noise_sigma must be >= 0");
  if (!(spec.temporal_jitter_sigma >= 0.0)) {
    throw Error(ErrorCode::invalid_spec, "temporal_jitter_sigma must be >= 0");
  }
  if (!std::isfinite(spec.cfo_offset) || !std::isfinite(spec.sfo_slope)) {
    throw Error(ErrorCode::invalid_spec, "artifact parameters must be finite");
  }
}

void validate(const ScenarioSpec& s) {
  if (s.subjects.size() < 2) throw Error(ErrorCode::invalid_spec, "scenario needs >= 2 subjects");
  if (s.samples_per_subject < 1) {
    throw Error(ErrorCode::invalid_spec, "samples_per_subject must be >= 1");
  }
  if (s.samples < 2 || s.subcarriers < 2) {
    throw Error(ErrorCode::invalid_spec, "scenario needs K >= 2 and T >= 2");
  }
  if (!(s.freq_step > 0.0)) throw Error(ErrorCode::invalid_spec, "freq_step must be positive");
  std::set<std::string> ids;
  for (const auto& subj : s.subjects) {
    if (subj.subject_id.empty()) throw Error(ErrorCode::invalid_spec, "empty subject_id");
    if (is_attack_label(subj.subject_id)) {
      throw Error(ErrorCode::invalid_spec, "subject ids may not use the attack: prefix");
    }
    if (!ids.insert(subj.subject_id).second) {
      throw Error(ErrorCode::invalid_spec, "duplicate subject_id " + subj.subject_id);
    }
    validate(subj.channel);
  }
  if (s.attack.kind != AttackKind::none) {
    if (!(s.attack.parameter >= 0.0)) {
      throw Error(ErrorCode::invalid_spec, "attack parameter must be >= 0");
    }
    if (!s.attack.victim.empty() && !ids.contains(s.attack.victim)) {
      throw Error(ErrorCode::invalid_spec, "attack victim " + s.attack.victim + " is not a subject");
    }
    if (s.attack.records < 0) throw Error(ErrorCode::invalid_spec, "attack records must be >= 0");
  }
}

Complex channel_response(const ChannelSpec& spec, double freq_hz) {
  Complex h{0.0, 0.0};
  for (const auto& p : spec.paths) {
    h += p.gain * std::exp(Complex(0.0, -(p.phase + 2.0 * pi * freq_hz * p.delay)));
  }
  return h;
}

CsiMatrix synthesize_matrix(const ChannelSpec& spec, std::size_t subcarriers, std::size_t samples,
                            const std::vector<double>& freqs) {
  validate(spec);
  if (subcarriers < 2 || samples < 2) throw Error(ErrorCode::invalid_spec, "need K >= 2 and T >= 2");
  if (freqs.size() != subcarriers) {
    throw Error(ErrorCode::invalid_spec, "freqs length must equal K");
  }
  Rng rng(spec.seed);
  std::vector<double> gain(samples, 1.0);
  if (spec.temporal_jitter_sigma > 0.0) {
    for (auto& g : gain) g = 1.0 + rng.normal(0.0, spec.temporal_jitter_sigma);
  }

  CsiMatrix m(subcarriers, samples, freqs);
  for (std::size_t k = 0; k < subcarriers; ++k) {
    const Complex model = channel_response(spec, freqs[k]);
    for (std::size_t t = 0; t < samples; ++t) m(k, t) = model * gain[t];
  }
  // Noise is drawn time-major so a longer capture extends a shorter one.
  if (spec.noise_sigma > 0.0) {
    for (std::size_t t = 0; t < samples; ++t) {
      for (std::size_t k = 0; k < subcarriers; ++k) {
        const double re = rng.normal(0.0, spec.noise_sigma);
        const double im = rng.normal(0.0, spec.noise_sigma);
        m(k, t) += Complex(re, im);
      }
    }
  }
  if (spec.cfo_offset != 0.0 || spec.sfo_slope != 0.0) {
    for (std::size_t k = 0; k < subcarriers; ++k) {
      const Complex rot = std::exp(Complex(0.0, spec.cfo_offset + spec.sfo_slope * static_cast<double>(k)));
      for (std::size_t t = 0; t < samples; ++t) m(k, t) *= rot;
    }
  }
  std::ostringstream desc;
  desc << "synth paths=" << spec.paths.size() << " noise=" << spec.noise_sigma
       << " seed=" << spec.seed;
  m.meta.source_id = "synth";
  m.meta.channel_spec = desc.str();
  return m;
}

ChannelSpec perturb(const ChannelSpec& spec, double fraction, std::uint64_t seed) {
  ChannelSpec out = spec;
  Rng rng(seed);
  for (auto& p : out.paths) {
    const double u_gain = rng.uniform(-1.0, 1.0);
    const double u_phase = rng.uniform(-1.0, 1.0);
    const double u_delay = rng.uniform(-1.0, 1.0);
    p.gain *= 1.0 + fraction * u_gain;
    p.phase += fraction * pi * u_phase;
    p.delay *= 1.0 + fraction * u_delay;
    p.gain = std::max(p.gain, 1e-9);
    p.delay = std::max(p.delay, 0.0);
  }
  return out;
}

void validate(const SubjectGenerator& g) {
  if (g.subjects < 1) throw Error(ErrorCode::invalid_spec, "generator needs at least one subject");
  if (g.paths < 1) throw Error(ErrorCode::invalid_spec, "generator needs at least one path");
  if (!(g.gain_min > 0.0 && g.gain_max >= g.gain_min))
    throw Error(ErrorCode::invalid_spec, "generator gain range must satisfy 0 < min <= max");
  if (!(g.delay_min >= 0.0 && g.delay_max >= g.delay_min))
    throw Error(ErrorCode::invalid_spec, "generator delay range must satisfy 0 <= min <= max");
  if (!(g.noise_sigma >= 0.0 && g.temporal_jitter_sigma >= 0.0 && g.cfo_max >= 0.0 && g.sfo_max >= 0.0))
    throw Error(ErrorCode::invalid_spec, "generator noise, jitter and artifact bounds must be >= 0");
  if (g.id_prefix.starts_with(kAttackPrefix))
    throw Error(ErrorCode::invalid_spec, "subject ids may not use the attack: prefix");
}

std::vector<SubjectSpec> generate_subjects(const SubjectGenerator& g) {
  validate(g);
  const int width = static_cast<int>(std::to_string(g.subjects).size());
  std::vector<SubjectSpec> out;
  for (std::size_t i = 0; i < g.subjects; ++i) {
    Rng rng(Rng::substream(g.seed, i));
    SubjectSpec s;
    std::string num = std::to_string(i + 1);
    s.subject_id = g.id_prefix + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    for (std::size_t p = 0; p < g.paths; ++p) {
      PathSpec path;
      path.gain = rng.uniform(g.gain_min, g.gain_max);
      path.phase = rng.uniform(-pi, pi);
      path.delay = rng.uniform(g.delay_min, g.delay_max);
      s.channel.paths.push_back(path);
    }
    s.channel.noise_sigma = g.noise_sigma;
    s.channel.temporal_jitter_sigma = g.temporal_jitter_sigma;
    s.channel.cfo_offset = rng.uniform(-g.cfo_max, g.cfo_max);
    s.channel.sfo_slope = rng.uniform(-g.sfo_max, g.sfo_max);
    s.channel.seed = rng.next();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::uint64_t record_seed(const ChannelSpec& spec, int sample_index) {
  return Rng::substream(spec.seed, static_cast<std::uint64_t>(sample_index));
}

}  // namespace

Dataset generate_dataset(const ScenarioSpec& s) {
  validate(s);
  const auto freqs = ingest::uniform_freqs(s.freq_start, s.freq_step, s.subcarriers);
  Dataset d;
  d.records.reserve(s.subjects.size() * static_cast<std::size_t>(s.samples_per_subject));
  for (const auto& subj : s.subjects) {
    for (int i = 0; i < s.samples_per_subject; ++i) {
      ChannelSpec spec = subj.channel;
      spec.seed = record_seed(subj.channel, i);
      d.records.push_back({synthesize_matrix(spec, s.subcarriers, s.samples, freqs),
                           SubjectLabel{subj.subject_id, i, s.hand}});
    }
  }

  const auto& attack = s.attack;
  if (attack.kind == AttackKind::none) return d;
  const std::string victim_id = attack.victim.empty() ? s.subjects.front().subject_id : attack.victim;
  const auto victim_it = std::find_if(s.subjects.begin(), s.subjects.end(),
                                      [&](const SubjectSpec& x) { return x.subject_id == victim_id; });
  const ChannelSpec& victim = victim_it->channel;
  const int n_attack = attack.records > 0 ? attack.records : s.samples_per_subject;
  const std::string label = attack_label(to_string(attack.kind), victim_id);

  for (int i = 0; i < n_attack; ++i) {
    const std::uint64_t seed = Rng::substream(attack.seed, static_cast<std::uint64_t>(i));
    CsiMatrix m;
    switch (attack.kind) {
      case AttackKind::replay: {
        // Re-transmits a recorded victim acquisition with a fresh noise draw.
        const int source = i % s.samples_per_subject;
        ChannelSpec clean = victim;
        clean.seed = record_seed(victim, source);
        clean.noise_sigma = 0.0;
        m = synthesize_matrix(clean, s.subcarriers, s.samples, freqs);
        Rng rng(seed);
        for (std::size_t t = 0; t < s.samples; ++t) {
          const double g = attack.parameter > 0.0 ? 1.0 + rng.normal(0.0, attack.parameter) : 1.0;
          for (std::size_t k = 0; k < s.subcarriers; ++k) {
            Complex v = m(k, t) * g;
            if (victim.noise_sigma > 0.0) {
              const double re = rng.normal(0.0, victim.noise_sigma);
              const double im = rng.normal(0.0, victim.noise_sigma);
              v += Complex(re, im);
            }
            m(k, t) = v;
          }
        }
        break;
      }
      case AttackKind::mimicry: {
        ChannelSpec mimic = perturb(victim, attack.parameter, attack.seed);
        mimic.seed = seed;
        m = synthesize_matrix(mimic, s.subcarriers, s.samples, freqs);
        break;
      }
      case AttackKind::drift: {
        ChannelSpec drifting = victim;
        drifting.seed = seed;
        m = synthesize_matrix(drifting, s.subcarriers, s.samples, freqs);
        for (std::size_t k = 0; k < s.subcarriers; ++k) {
          for (std::size_t t = 0; t < s.samples; ++t) {
            m(k, t) *= 1.0 + attack.parameter * static_cast<double>(t);
          }
        }
        break;
      }
      case AttackKind::none:
        break;
    }
    m.meta.source_id = label;
    d.records.push_back({std::move(m), SubjectLabel{label, i, s.hand}});
  }
  return d;
}

}  // namespace csiauth::synth
