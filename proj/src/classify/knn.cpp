// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "estimators.hpp"

namespace csiauth::classify::detail {
namespace {

class Knn final : public Estimator {
 public:
  Knn(std::size_t k, bool distance_weighted, std::size_t classes, std::size_t cols,
      std::vector<double> x, std::vector<int> y)
      : k_(k),
        distance_weighted_(distance_weighted),
        classes_(classes),
        cols_(cols),
        x_(std::move(x)),
        y_(std::move(y)) {}

  void predict_proba(const Design& x, std::span<double> out) const override {
    const std::size_t n = y_.size();
    const std::size_t k = std::min(k_, n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto q = x.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double* r = x_.data() + j * cols_;
        double d2 = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) {
          const double diff = q[c] - r[c];
          d2 += diff * diff;
        }
        dist[j] = {d2, j};
      }
      // Pairs compare by distance, then training index.
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      auto p = out.subspan(i * classes_, classes_);
      std::fill(p.begin(), p.end(), 0.0);
      if (!distance_weighted_) {
        for (std::size_t j = 0; j < k; ++j) p[static_cast<std::size_t>(y_[dist[j].second])] += 1.0;
      } else if (dist[0].first == 0.0) {
        // Exact matches take all the weight.
        for (std::size_t j = 0; j < k && dist[j].first == 0.0; ++j)
          p[static_cast<std::size_t>(y_[dist[j].second])] += 1.0;
      } else {
        for (std::size_t j = 0; j < k; ++j)
          p[static_cast<std::size_t>(y_[dist[j].second])] += 1.0 / std::sqrt(dist[j].first);
      }
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v /= total;
    }
  }

  void serialize(std::vector<std::uint8_t>& out) const override {
    BinWriter w(out);
    w.u64(k_);
    w.u8(distance_weighted_ ? 1 : 0);
    w.u64(classes_);
    w.u64(cols_);
    w.f64s(x_);
    w.i32s(y_);
  }

 private:
  std::size_t k_;
  bool distance_weighted_;
  std::size_t classes_;
  std::size_t cols_;
  std::vector<double> x_;
  std::vector<int> y_;
};

}  // namespace

std::shared_ptr<const Estimator> fit_knn(const ModelSpec& spec, const TrainData& data) {
  const auto k = static_cast<std::size_t>(spec.param("k"));
  const bool weighted = spec.param("distance_weighted") != 0.0;
  return std::make_shared<Knn>(k, weighted, data.classes, data.x.cols,
                               std::vector<double>(data.x.data.begin(), data.x.data.end()),
                               data.y);
}

std::shared_ptr<const Estimator> load_knn(BinReader& in) {
  const auto k = static_cast<std::size_t>(in.u64());
  const bool weighted = in.u8() != 0;
  const auto classes = static_cast<std::size_t>(in.u64());
  const auto cols = static_cast<std::size_t>(in.u64());
  auto x = in.f64s();
  auto y = in.i32s();
  if (k == 0 || classes == 0 || (cols != 0 && x.size() != y.size() * cols))
    throw Error(ErrorCode::schema_mismatch, "knn payload inconsistent");
  return std::make_shared<Knn>(k, weighted, classes, cols, std::move(x), std::move(y));
}

}  // namespace csiauth::classify::detail
