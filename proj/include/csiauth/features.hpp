// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::features {

enum class Group {
  amplitude,
  phase,
  energy,
  spectral,
  empirical_energy,
  temporal,
  stability,
  correlation,
  roughness,
  curvature,
};

/// All groups in extraction order.
const std::vector<Group>& all_groups();
std::string_view to_string(Group g);
Group group_from_string(std::string_view text);

/// Stable feature names produced by one group, in output order.
const std::vector<std::string>& feature_names(Group g);

struct FeatureSetConfig {
  std::set<Group> enabled_groups{all_groups().begin(), all_groups().end()};
  // Floor for degenerate denominators (sigma, means, spectral bins).
  double epsilon = 1e-12;
};

void validate(const FeatureSetConfig& cfg);

// Each group computes its descriptors over a K x T window. Moments use 1/n
// unless the descriptor is defined with a K-1 / T-1 (or K-2, K-3) divisor.
FeatureVector amplitude_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector phase_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector energy_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector spectral_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector empirical_energy_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector temporal_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector stability_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector correlation_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector roughness_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});
FeatureVector curvature_features(const CsiMatrix& m, const FeatureSetConfig& cfg = {});

FeatureVector group_features(Group g, const CsiMatrix& m, const FeatureSetConfig& cfg = {});

/// Concatenates the enabled groups in all_groups() order. Group errors are
/// rethrown with the group name prefixed to the message.
FeatureVector extract_all(const CsiMatrix& m, const FeatureSetConfig& cfg = {});

/// Column names extract_all would produce for `cfg`.
std::vector<std::string> enabled_feature_names(const FeatureSetConfig& cfg);

}  // namespace csiauth::features
