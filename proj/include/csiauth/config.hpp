// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "csiauth/classify.hpp"
#include "csiauth/harness.hpp"
#include "csiauth/ingest.hpp"
#include "csiauth/synth.hpp"
#include "json.hpp"

namespace csiauth::config {

using Json = nlohmann::json;

/// Everything one CLI invocation needs. Serialized as a JSON tree whose
/// schema is documented in docs/config.md; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  synth::ScenarioSpec scenario;
  // When set, scenario.subjects is drawn from it (its seed defaults to `seed`).
  std::optional<synth::SubjectGenerator> generator;
  bool generator_seed_explicit = false;
  std::vector<std::size_t> window_sizes = {50, 500};
  std::vector<harness::SplitMode> split_modes = {harness::SplitMode::per_acquisition_holdout,
                                                 harness::SplitMode::per_window_stratified};
  harness::ProtocolConfig protocol;
  std::vector<classify::ModelSpec> models;
  ingest::PcapSource ingest;
};

RunConfig default_config();
RunConfig from_json(const Json& j);
/// Full effective configuration with every default spelled out.
Json to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& c);

/// SHA-256 of the canonical effective configuration.
std::string config_hash(const RunConfig& c);

/// Scenario with generated subjects filled in.
synth::ScenarioSpec effective_scenario(const RunConfig& c);
/// Protocol for one (window size, split mode) run; seeds follow `seed`.
harness::ProtocolConfig protocol_for(const RunConfig& c, std::size_t window_size,
                                     harness::SplitMode mode);
/// Models with their seeds set from the master seed.
std::vector<classify::ModelSpec> effective_models(const RunConfig& c);

}  // namespace csiauth::config
