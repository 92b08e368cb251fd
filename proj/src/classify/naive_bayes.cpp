// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include "estimators.hpp"

namespace csiauth::classify::detail {
namespace {

class GaussianNb final : public Estimator {
 public:
  GaussianNb(std::size_t classes, std::size_t cols, std::vector<double> log_prior,
             std::vector<double> mean, std::vector<double> var)
      : classes_(classes),
        cols_(cols),
        log_prior_(std::move(log_prior)),
        mean_(std::move(mean)),
        var_(std::move(var)) {}

  void predict_proba(const Design& x, std::span<double> out) const override {
    std::vector<double> joint(classes_);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto q = x.row(i);
      for (std::size_t c = 0; c < classes_; ++c) {
        double ll = log_prior_[c];
        for (std::size_t j = 0; j < cols_; ++j) {
          const double v = var_[c * cols_ + j];
          const double d = q[j] - mean_[c * cols_ + j];
          ll -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + d * d / v);
        }
        joint[c] = ll;
      }
      const double top = *std::max_element(joint.begin(), joint.end());
      double total = 0.0;
      for (double& v : joint) {
        v = std::exp(v - top);
        total += v;
      }
      for (std::size_t c = 0; c < classes_; ++c) out[i * classes_ + c] = joint[c] / total;
    }
  }

  void serialize(std::vector<std::uint8_t>& out) const override {
    BinWriter w(out);
    w.u64(classes_);
    w.u64(cols_);
    w.f64s(log_prior_);
    w.f64s(mean_);
    w.f64s(var_);
  }

 private:
  std::size_t classes_;
  std::size_t cols_;
  std::vector<double> log_prior_;
  std::vector<double> mean_;
  std::vector<double> var_;
};

}  // namespace

std::shared_ptr<const Estimator> fit_gaussian_nb(const ModelSpec& spec, const TrainData& data) {
  const std::size_t C = data.classes;
  const std::size_t d = data.x.cols;
  const std::size_t n = data.x.rows;
  std::vector<double> count(C, 0.0), mean(C * d, 0.0), var(C * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    count[c] += 1.0;
    const auto r = data.x.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[c * d + j] += r[j];
  }
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t j = 0; j < d; ++j) mean[c * d + j] /= count[c];
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    const auto r = data.x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double e = r[j] - mean[c * d + j];
      var[c * d + j] += e * e;
    }
  }
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t j = 0; j < d; ++j) var[c * d + j] /= count[c];

  // Floor relative to the widest feature, as in common implementations.
  double widest = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += data.x.row(i)[j];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = data.x.row(i)[j] - m;
      v += e * e;
    }
    widest = std::max(widest, v / static_cast<double>(n));
  }
  double floor = spec.param("var_smoothing") * widest;
  if (floor <= 0.0) floor = 1e-12;
  for (double& v : var) v += floor;

  std::vector<double> log_prior(C);
  for (std::size_t c = 0; c < C; ++c) log_prior[c] = std::log(count[c] / static_cast<double>(n));
  return std::make_shared<GaussianNb>(C, d, std::move(log_prior), std::move(mean), std::move(var));
}

std::shared_ptr<const Estimator> load_gaussian_nb(BinReader& in) {
  const auto C = static_cast<std::size_t>(in.u64());
  const auto d = static_cast<std::size_t>(in.u64());
  auto log_prior = in.f64s();
  auto mean = in.f64s();
  auto var = in.f64s();
  if (log_prior.size() != C || mean.size() != C * d || var.size() != C * d)
    throw Error(ErrorCode::schema_mismatch, "gaussian_nb payload inconsistent");
  return std::make_shared<GaussianNb>(C, d, std::move(log_prior), std::move(mean), std::move(var));
}

}  // namespace csiauth::classify::detail
