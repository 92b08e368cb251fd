// SPDX-License-Identifier: Apache-2.0
#include "csiauth/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "estimators.hpp"

namespace csiauth::classify {
namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 5> kKindNames = {{
    {ModelKind::knn, "knn"},
    {ModelKind::gaussian_nb, "gaussian_nb"},
    {ModelKind::decision_tree, "decision_tree"},
    {ModelKind::random_forest, "random_forest"},
    {ModelKind::mlp, "mlp"},
}};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::invalid_spec, msg); }

bool is_whole(double v) { return std::isfinite(v) && v == std::floor(v); }

void require_int(const ModelSpec& spec, std::string_view name, double lo) {
  const double v = spec.param(name);
  if (!is_whole(v) || v < lo)
    invalid(std::string(to_string(spec.kind)) + ": " + std::string(name) + " must be an integer >= " +
            std::to_string(static_cast<long long>(lo)));
}

void require_flag(const ModelSpec& spec, std::string_view name) {
  const double v = spec.param(name);
  if (v != 0.0 && v != 1.0) invalid(std::string(name) + " must be 0 or 1");
}

void require_range(const ModelSpec& spec, std::string_view name, double lo, double hi, bool open_lo) {
  const double v = spec.param(name);
  if (!std::isfinite(v) || v > hi || (open_lo ? v <= lo : v < lo))
    invalid(std::string(to_string(spec.kind)) + ": " + std::string(name) + " out of range");
}

void validate_tree_params(const ModelSpec& spec) {
  require_int(spec, "max_depth", 0);
  require_int(spec, "min_samples_split", 2);
  require_int(spec, "min_samples_leaf", 1);
  require_int(spec, "max_features", -1);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames)
    if (name == text) return k;
  throw Error(ErrorCode::invalid_spec, "unknown model kind '" + std::string(text) + "'");
}

std::map<std::string, double> default_hyperparams(ModelKind kind) {
  switch (kind) {
    case ModelKind::knn:
      return {{"k", 5}, {"distance_weighted", 0}};
    case ModelKind::gaussian_nb:
      return {{"var_smoothing", 1e-9}};
    case ModelKind::decision_tree:
      return {{"max_depth", 0}, {"min_samples_split", 2}, {"min_samples_leaf", 1}, {"max_features", 0}};
    case ModelKind::random_forest:
      return {{"n_trees", 100},          {"max_depth", 0},     {"min_samples_split", 2},
              {"min_samples_leaf", 1},   {"max_features", -1}, {"bootstrap", 1}};
    case ModelKind::mlp:
      return {{"hidden", 64},  {"learning_rate", 0.01}, {"momentum", 0.9}, {"batch_size", 32},
              {"l2", 1e-4},    {"epochs", 200},         {"patience", 10},  {"tol", 1e-4}};
  }
  return {};
}

double ModelSpec::param(std::string_view name) const {
  const std::string key(name);
  if (auto it = hyperparams.find(key); it != hyperparams.end()) return it->second;
  const auto defaults = default_hyperparams(kind);
  if (auto it = defaults.find(key); it != defaults.end()) return it->second;
  throw Error(ErrorCode::invalid_spec,
              std::string(to_string(kind)) + " has no hyperparameter '" + key + "'");
}

void validate(const ModelSpec& spec) {
  const auto defaults = default_hyperparams(spec.kind);
  for (const auto& [name, value] : spec.hyperparams) {
    if (!defaults.contains(name))
      invalid(std::string(to_string(spec.kind)) + " has no hyperparameter '" + name + "'");
    if (!std::isfinite(value)) invalid(name + " must be finite");
  }
  switch (spec.kind) {
    case ModelKind::knn:
      require_int(spec, "k", 1);
      require_flag(spec, "distance_weighted");
      break;
    case ModelKind::gaussian_nb:
      require_range(spec, "var_smoothing", 0.0, 1.0, false);
      break;
    case ModelKind::decision_tree:
      validate_tree_params(spec);
      break;
    case ModelKind::random_forest:
      validate_tree_params(spec);
      require_int(spec, "n_trees", 1);
      require_flag(spec, "bootstrap");
      break;
    case ModelKind::mlp:
      require_int(spec, "hidden", 1);
      require_int(spec, "batch_size", 1);
      require_int(spec, "epochs", 1);
      require_int(spec, "patience", 1);
      require_range(spec, "learning_rate", 0.0, 10.0, true);
      require_range(spec, "momentum", 0.0, 0.999999, false);
      require_range(spec, "l2", 0.0, 1e3, false);
      require_range(spec, "tol", 0.0, 1e3, false);
      break;
  }
}

std::string describe(const ModelSpec& spec) {
  std::ostringstream out;
  out << to_string(spec.kind) << '(';
  bool first = true;
  for (const auto& [name, value] : default_hyperparams(spec.kind)) {
    (void)value;
    if (!first) out << ',';
    first = false;
    out << name << '=' << spec.param(name);
  }
  out << ')';
  return out.str();
}

TrainedModel::TrainedModel(ModelSpec spec, std::vector<std::string> class_ids,
                           std::vector<std::string> feature_names,
                           std::shared_ptr<const Estimator> impl, std::vector<double> loss_history)
    : spec_(std::move(spec)),
      class_ids_(std::move(class_ids)),
      feature_names_(std::move(feature_names)),
      impl_(std::move(impl)),
      loss_history_(std::move(loss_history)) {}

TrainedModel fit(const ModelSpec& spec, const FeatureMatrix& F) {
  validate(spec);
  if (F.cols() == 0) throw Error(ErrorCode::insufficient_data, "fit: no feature columns");
  if (F.data.size() != F.rows() * F.cols())
    throw Error(ErrorCode::schema_mismatch, "fit: data size does not match rows x cols");
  for (double v : F.data)
    if (!std::isfinite(v)) throw Error(ErrorCode::degenerate_feature, "fit: non-finite feature value");

  std::vector<std::string> classes(F.labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw Error(ErrorCode::single_class, "fit: need at least two classes");
  if (F.rows() < classes.size())
    throw Error(ErrorCode::insufficient_data, "fit: fewer rows than classes");

  detail::TrainData data;
  data.x = Design{F.data, F.rows(), F.cols()};
  data.classes = classes.size();
  data.y.reserve(F.rows());
  for (const auto& label : F.labels)
    data.y.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), label) -
                                      classes.begin()));

  std::shared_ptr<const Estimator> impl;
  std::vector<double> history;
  switch (spec.kind) {
    case ModelKind::knn: impl = detail::fit_knn(spec, data); break;
    case ModelKind::gaussian_nb: impl = detail::fit_gaussian_nb(spec, data); break;
    case ModelKind::decision_tree: impl = detail::fit_decision_tree(spec, data); break;
    case ModelKind::random_forest: impl = detail::fit_random_forest(spec, data); break;
    case ModelKind::mlp: impl = detail::fit_mlp(spec, data, history); break;
  }
  return TrainedModel(spec, std::move(classes), F.names, std::move(impl), std::move(history));
}

ScoreMatrix predict_proba(const TrainedModel& model, const FeatureMatrix& F) {
  if (F.names != model.feature_names())
    throw Error(ErrorCode::schema_mismatch, "predict_proba: feature columns differ from training");
  if (F.data.size() != F.rows() * F.cols())
    throw Error(ErrorCode::schema_mismatch, "predict_proba: data size does not match rows x cols");
  ScoreMatrix s;
  s.class_ids = model.class_ids();
  s.true_labels = F.labels;
  s.probabilities.assign(F.rows() * s.classes(), 0.0);
  if (F.rows() > 0) model.estimator().predict_proba(Design{F.data, F.rows(), F.cols()}, s.probabilities);
  return s;
}

std::vector<std::uint8_t> encode_model(const TrainedModel& model) {
  std::vector<std::uint8_t> out(kModelMagic.begin(), kModelMagic.end());
  detail::BinWriter w(out);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(model.spec().kind));
  w.u64(model.spec().seed);
  w.u32(static_cast<std::uint32_t>(model.spec().hyperparams.size()));
  for (const auto& [name, value] : model.spec().hyperparams) {
    w.str(name);
    w.f64(value);
  }
  w.u32(static_cast<std::uint32_t>(model.class_ids().size()));
  for (const auto& c : model.class_ids()) w.str(c);
  w.u32(static_cast<std::uint32_t>(model.feature_names().size()));
  for (const auto& f : model.feature_names()) w.str(f);
  w.f64s(model.loss_history());
  std::vector<std::uint8_t> payload;
  model.estimator().serialize(payload);
  w.u64(payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

TrainedModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kModelMagic.size() ||
      !std::equal(kModelMagic.begin(), kModelMagic.end(), bytes.begin()))
    throw Error(ErrorCode::bad_magic, "not a model container");
  detail::BinReader in(bytes.subspan(kModelMagic.size()));
  const std::uint32_t version = in.u32();
  if (version != kModelVersion)
    throw Error(ErrorCode::unsupported_version, "model container version " + std::to_string(version));
  const std::uint8_t kind = in.u8();
  if (kind >= kKindNames.size()) throw Error(ErrorCode::schema_mismatch, "unknown model kind code");
  ModelSpec spec;
  spec.kind = static_cast<ModelKind>(kind);
  spec.seed = in.u64();
  const std::uint32_t n_params = in.u32();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name = in.str();
    spec.hyperparams[name] = in.f64();
  }
  std::vector<std::string> classes(in.u32());
  for (auto& c : classes) c = in.str();
  std::vector<std::string> features(in.u32());
  for (auto& f : features) f = in.str();
  auto history = in.f64s();
  const std::uint64_t payload_size = in.u64();
  (void)payload_size;
  std::shared_ptr<const Estimator> impl;
  switch (spec.kind) {
    case ModelKind::knn: impl = detail::load_knn(in); break;
    case ModelKind::gaussian_nb: impl = detail::load_gaussian_nb(in); break;
    case ModelKind::decision_tree: impl = detail::load_decision_tree(in); break;
    case ModelKind::random_forest: impl = detail::load_random_forest(in); break;
    case ModelKind::mlp: impl = detail::load_mlp(in); break;
  }
  if (!in.done()) throw Error(ErrorCode::length_mismatch, "trailing bytes after model payload");
  validate(spec);
  return TrainedModel(std::move(spec), std::move(classes), std::move(features), std::move(impl),
                      std::move(history));
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace csiauth::classify
