// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csiauth/random.hpp"
#include "estimators.hpp"

namespace csiauth::classify {
namespace mlp_detail {
namespace {

struct Offsets {
  std::size_t w1, b1, w2, b2;
  explicit Offsets(const Shape& s)
      : w1(0),
        b1(s.inputs * s.hidden),
        w2(s.inputs * s.hidden + s.hidden),
        b2(s.inputs * s.hidden + s.hidden + s.hidden * s.classes) {}
};

// Hidden activations and softmax output for one row.
void forward(const Shape& s, const Offsets& o, std::span<const double> p, std::span<const double> x,
             std::span<double> h, std::span<double> out) {
  for (std::size_t j = 0; j < s.hidden; ++j) h[j] = p[o.b1 + j];
  for (std::size_t i = 0; i < s.inputs; ++i) {
    const double xi = x[i];
    const double* w = p.data() + o.w1 + i * s.hidden;
    for (std::size_t j = 0; j < s.hidden; ++j) h[j] += xi * w[j];
  }
  for (std::size_t j = 0; j < s.hidden; ++j) h[j] = std::max(0.0, h[j]);
  for (std::size_t c = 0; c < s.classes; ++c) out[c] = p[o.b2 + c];
  for (std::size_t j = 0; j < s.hidden; ++j) {
    if (h[j] == 0.0) continue;
    const double* w = p.data() + o.w2 + j * s.classes;
    for (std::size_t c = 0; c < s.classes; ++c) out[c] += h[j] * w[c];
  }
  const double top = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
}

double weight_penalty(const Shape& s, const Offsets& o, std::span<const double> p) {
  double sq = 0.0;
  for (std::size_t i = o.w1; i < o.b1; ++i) sq += p[i] * p[i];
  for (std::size_t i = o.w2; i < o.b2; ++i) sq += p[i] * p[i];
  (void)s;
  return sq;
}

}  // namespace

double loss_and_gradient(const Shape& s, std::span<const double> p, const Design& x,
                         std::span<const int> y, double l2, std::span<double> g) {
  const Offsets o(s);
  std::fill(g.begin(), g.end(), 0.0);
  std::vector<double> h(s.hidden), out(s.classes), dh(s.hidden);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto xr = x.row(r);
    forward(s, o, p, xr, h, out);
    const auto label = static_cast<std::size_t>(y[r]);
    loss -= std::log(std::max(out[label], std::numeric_limits<double>::min()));
    // d(CE)/d(logits) = softmax - onehot
    out[label] -= 1.0;
    for (std::size_t c = 0; c < s.classes; ++c) g[o.b2 + c] += out[c] * inv_n;
    for (std::size_t j = 0; j < s.hidden; ++j) {
      const double* w = p.data() + o.w2 + j * s.classes;
      double acc = 0.0;
      for (std::size_t c = 0; c < s.classes; ++c) {
        g[o.w2 + j * s.classes + c] += h[j] * out[c] * inv_n;
        acc += w[c] * out[c];
      }
      dh[j] = h[j] > 0.0 ? acc * inv_n : 0.0;
    }
    for (std::size_t j = 0; j < s.hidden; ++j) g[o.b1 + j] += dh[j];
    for (std::size_t i = 0; i < s.inputs; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      double* gw = g.data() + o.w1 + i * s.hidden;
      for (std::size_t j = 0; j < s.hidden; ++j) gw[j] += xi * dh[j];
    }
  }
  loss *= inv_n;
  if (l2 > 0.0) {
    loss += 0.5 * l2 * weight_penalty(s, o, p);
    for (std::size_t i = o.w1; i < o.b1; ++i) g[i] += l2 * p[i];
    for (std::size_t i = o.w2; i < o.b2; ++i) g[i] += l2 * p[i];
  }
  return loss;
}

}  // namespace mlp_detail

namespace detail {
namespace {

using mlp_detail::Shape;

class Mlp final : public Estimator {
 public:
  Mlp(Shape shape, std::vector<double> params) : shape_(shape), params_(std::move(params)) {}

  void predict_proba(const Design& x, std::span<double> out) const override {
    const mlp_detail::Offsets o(shape_);
    std::vector<double> h(shape_.hidden);
    for (std::size_t r = 0; r < x.rows; ++r)
      mlp_detail::forward(shape_, o, params_, x.row(r), h,
                          out.subspan(r * shape_.classes, shape_.classes));
  }

  void serialize(std::vector<std::uint8_t>& out) const override {
    BinWriter w(out);
    w.u64(shape_.inputs);
    w.u64(shape_.hidden);
    w.u64(shape_.classes);
    w.f64s(params_);
  }

 private:
  Shape shape_;
  std::vector<double> params_;
};

}  // namespace

std::shared_ptr<const Estimator> fit_mlp(const ModelSpec& spec, const TrainData& data,
                                         std::vector<double>& loss_history) {
  const Shape shape{data.x.cols, static_cast<std::size_t>(spec.param("hidden")), data.classes};
  const double lr = spec.param("learning_rate");
  const double momentum = spec.param("momentum");
  const double l2 = spec.param("l2");
  const auto batch = std::max<std::size_t>(1, static_cast<std::size_t>(spec.param("batch_size")));
  const auto epochs = static_cast<std::size_t>(spec.param("epochs"));
  const auto patience = static_cast<std::size_t>(spec.param("patience"));
  const double tol = spec.param("tol");
  const std::size_t n = data.x.rows;
  const std::size_t d = data.x.cols;

  Rng rng(Rng::substream(spec.seed, 0));
  const mlp_detail::Offsets o(shape);
  std::vector<double> params(shape.size(), 0.0);
  const double s1 = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(1, shape.inputs)));
  const double s2 = std::sqrt(2.0 / static_cast<double>(shape.hidden));
  for (std::size_t i = o.w1; i < o.b1; ++i) params[i] = s1 * rng.normal();
  for (std::size_t i = o.w2; i < o.b2; ++i) params[i] = s2 * rng.normal();

  std::vector<double> velocity(params.size(), 0.0), grad(params.size()), full_grad(params.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> xb(batch * d);
  std::vector<int> yb(batch);

  std::vector<double> best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  loss_history.clear();
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t m = std::min(batch, n - start);
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = data.x.row(order[start + i]);
        std::copy(r.begin(), r.end(), xb.begin() + static_cast<std::ptrdiff_t>(i * d));
        yb[i] = data.y[order[start + i]];
      }
      const Design xd{std::span<const double>(xb.data(), m * d), m, d};
      mlp_detail::loss_and_gradient(shape, params, xd, std::span<const int>(yb.data(), m), l2, grad);
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] - lr * grad[i];
        params[i] += velocity[i];
      }
    }
    const double loss = mlp_detail::loss_and_gradient(shape, params, data.x, data.y, l2, full_grad);
    loss_history.push_back(loss);
    if (!std::isfinite(loss)) break;
    if (loss < best_loss - tol) {
      best_loss = loss;
      best = params;
      stale = 0;
    } else {
      if (loss < best_loss) {
        best_loss = loss;
        best = params;
      }
      if (++stale >= patience) break;
    }
  }
  return std::make_shared<Mlp>(shape, std::move(best));
}

std::shared_ptr<const Estimator> load_mlp(BinReader& in) {
  Shape s;
  s.inputs = static_cast<std::size_t>(in.u64());
  s.hidden = static_cast<std::size_t>(in.u64());
  s.classes = static_cast<std::size_t>(in.u64());
  auto params = in.f64s();
  if (s.hidden == 0 || s.classes == 0 || params.size() != s.size())
    throw Error(ErrorCode::schema_mismatch, "mlp payload inconsistent");
  return std::make_shared<Mlp>(s, std::move(params));
}

}  // namespace detail
}  // namespace csiauth::classify
