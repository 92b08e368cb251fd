// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csiauth/model.hpp"

namespace csiauth::classify {

enum class ModelKind { knn, gaussian_nb, decision_tree, random_forest, mlp };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view text);

/// Hyperparameters are plain numbers; booleans are 0/1. Missing entries fall
/// back to per-kind defaults (see default_hyperparams).
struct ModelSpec {
  ModelKind kind = ModelKind::random_forest;
  std::map<std::string, double> hyperparams;
  std::uint64_t seed = 0;

  double param(std::string_view name) const;
  bool operator==(const ModelSpec&) const = default;
};

std::map<std::string, double> default_hyperparams(ModelKind kind);
void validate(const ModelSpec& spec);
/// Human-readable "kind(k=v,...)" with the effective hyperparameters.
std::string describe(const ModelSpec& spec);

/// Dense row-major design matrix view over FeatureMatrix data.
struct Design {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

class Estimator {
 public:
  virtual ~Estimator() = default;
  /// Writes rows x classes probabilities into `out`.
  virtual void predict_proba(const Design& x, std::span<double> out) const = 0;
  virtual void serialize(std::vector<std::uint8_t>& out) const = 0;
};

/// A fitted model. Immutable and cheap to copy; prediction is thread-safe.
class TrainedModel {
 public:
  TrainedModel() = default;
  TrainedModel(ModelSpec spec, std::vector<std::string> class_ids,
               std::vector<std::string> feature_names, std::shared_ptr<const Estimator> impl,
               std::vector<double> loss_history = {});

  const ModelSpec& spec() const noexcept { return spec_; }
  const std::vector<std::string>& class_ids() const noexcept { return class_ids_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const Estimator& estimator() const { return *impl_; }
  /// Per-epoch mean training loss (MLP only; empty otherwise).
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }

 private:
  ModelSpec spec_;
  std::vector<std::string> class_ids_;
  std::vector<std::string> feature_names_;
  std::shared_ptr<const Estimator> impl_;
  std::vector<double> loss_history_;
};

/// Fits `spec` on F (rows = samples, labels = classes). Inputs are used as
/// given; standardization is the caller's responsibility.
TrainedModel fit(const ModelSpec& spec, const FeatureMatrix& F);

/// Per-row class probabilities; F's columns must match the training schema.
ScoreMatrix predict_proba(const TrainedModel& model, const FeatureMatrix& F);

inline constexpr std::array<char, 8> kModelMagic = {'C', 'S', 'I', 'M', 'O', 'D', 'L', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::uint8_t> encode_model(const TrainedModel& model);
TrainedModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

namespace mlp_detail {

/// Flat parameter layout: W1 (in x hidden), b1, W2 (hidden x classes), b2.
struct Shape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::size_t size() const { return inputs * hidden + hidden + hidden * classes + classes; }
};

/// Mean cross-entropy plus 0.5 * l2 * |W|^2 over the given rows, and its
/// gradient with respect to the flat parameters.
double loss_and_gradient(const Shape& shape, std::span<const double> params, const Design& x,
                         std::span<const int> y, double l2, std::span<double> gradient);

}  // namespace mlp_detail

}  // namespace csiauth::classify
