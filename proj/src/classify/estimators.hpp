// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "binio.hpp"
#include "csiauth/classify.hpp"

namespace csiauth::classify::detail {

struct TrainData {
  Design x;
  std::vector<int> y;  // class codes in [0, classes)
  std::size_t classes = 0;
};

std::shared_ptr<const Estimator> fit_knn(const ModelSpec& spec, const TrainData& data);
std::shared_ptr<const Estimator> fit_gaussian_nb(const ModelSpec& spec, const TrainData& data);
std::shared_ptr<const Estimator> fit_decision_tree(const ModelSpec& spec, const TrainData& data);
std::shared_ptr<const Estimator> fit_random_forest(const ModelSpec& spec, const TrainData& data);
std::shared_ptr<const Estimator> fit_mlp(const ModelSpec& spec, const TrainData& data,
                                         std::vector<double>& loss_history);

std::shared_ptr<const Estimator> load_knn(BinReader& in);
std::shared_ptr<const Estimator> load_gaussian_nb(BinReader& in);
std::shared_ptr<const Estimator> load_decision_tree(BinReader& in);
std::shared_ptr<const Estimator> load_random_forest(BinReader& in);
std::shared_ptr<const Estimator> load_mlp(BinReader& in);

}  // namespace csiauth::classify::detail
