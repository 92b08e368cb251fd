// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::select {

enum class Binning { equal_frequency, equal_width };

struct MrmrConfig {
  std::size_t k_select = 20;
  std::size_t bins = 10;
  Binning binning = Binning::equal_frequency;
};

/// Bin codes in [0, bins). Equal-frequency binning assigns every copy of a
/// value the bin of its first rank, so ties never straddle bins.
std::vector<int> discretize(std::span<const double> x, std::size_t bins, Binning binning);

/// Integer codes for labels, in sorted label order.
std::vector<int> encode_labels(std::span<const std::string> labels);

/// Plug-in mutual information (bits) between two discrete codings.
double discrete_mutual_information(std::span<const int> a, std::span<const int> b);

/// MI between a binned continuous feature and class codes; 0 for constant x.
double mutual_information(std::span<const double> x, std::span<const int> y,
                          const MrmrConfig& cfg = {});

struct RankedFeature {
  std::string name;
  std::size_t column = 0;
  double relevance = 0.0;
  double redundancy = 0.0;  // mean MI with the features picked before it
  double score = 0.0;       // relevance - redundancy
};

/// Greedy mRMR (difference form) over the columns of F against F.labels.
/// Ties go to the lexicographically smaller feature name.
std::vector<RankedFeature> mrmr_rank(const FeatureMatrix& F, const MrmrConfig& cfg);

}  // namespace csiauth::select
