// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "csiauth/random.hpp"
#include "estimators.hpp"

namespace csiauth::classify::detail {
namespace {

struct TreeParams {
  std::size_t max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // resolved count
};

std::size_t resolve_max_features(double value, std::size_t d) {
  if (value == 0.0) return d;
  if (value < 0.0) return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(d))));
  return std::min(d, static_cast<std::size_t>(value));
}

TreeParams tree_params(const ModelSpec& spec, std::size_t d) {
  TreeParams p;
  p.max_depth = static_cast<std::size_t>(spec.param("max_depth"));
  p.min_samples_split = static_cast<std::size_t>(spec.param("min_samples_split"));
  p.min_samples_leaf = static_cast<std::size_t>(spec.param("min_samples_leaf"));
  p.max_features = resolve_max_features(spec.param("max_features"), d);
  return p;
}

class Tree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };

  Tree() = default;
  Tree(std::size_t classes, std::vector<Node> nodes, std::vector<double> probs)
      : classes_(classes), nodes_(std::move(nodes)), probs_(std::move(probs)) {}

  static Tree grow(const TrainData& data, std::vector<std::size_t> rows, const TreeParams& params,
                   Rng& rng) {
    Tree t;
    t.classes_ = data.classes;
    Builder b{data, params, rng, t};
    b.build(rows, 0);
    return t;
  }

  std::span<const double> leaf(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
      const Node& n = nodes_[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                          : n.right);
    }
    return {probs_.data() + i * classes_, classes_};
  }

  void write(BinWriter& w) const {
    w.u64(nodes_.size());
    for (const Node& n : nodes_) {
      w.i32(n.feature);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
    }
    w.f64s(probs_);
  }

  static Tree read(BinReader& in, std::size_t classes, std::size_t cols) {
    const auto count = static_cast<std::size_t>(in.u64());
    std::vector<Node> nodes(count);
    for (Node& n : nodes) {
      n.feature = in.i32();
      n.threshold = in.f64();
      n.left = in.i32();
      n.right = in.i32();
    }
    auto probs = in.f64s();
    bool ok = count > 0 && probs.size() == count * classes;
    for (std::size_t i = 0; ok && i < count; ++i) {
      const Node& n = nodes[i];
      if (n.feature < 0) continue;
      // Children always follow their parent, which rules out cycles.
      ok = static_cast<std::size_t>(n.feature) < cols && n.left > static_cast<int>(i) &&
           n.right > static_cast<int>(i) && static_cast<std::size_t>(n.left) < count &&
           static_cast<std::size_t>(n.right) < count;
    }
    if (!ok) throw Error(ErrorCode::schema_mismatch, "tree payload inconsistent");
    return Tree(classes, std::move(nodes), std::move(probs));
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;
  };

  struct Builder {
    const TrainData& data;
    const TreeParams& params;
    Rng& rng;
    Tree& tree;

    int build(const std::vector<std::size_t>& rows, std::size_t depth) {
      const auto id = static_cast<int>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      std::vector<double> counts(data.classes, 0.0);
      for (std::size_t r : rows) counts[static_cast<std::size_t>(data.y[r])] += 1.0;
      for (double c : counts) tree.probs_.push_back(c / static_cast<double>(rows.size()));

      const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
      if (pure || (params.max_depth > 0 && depth >= params.max_depth) ||
          rows.size() < params.min_samples_split)
        return id;
      const Split s = best_split(rows);
      if (s.feature < 0) return id;

      std::vector<std::size_t> left, right;
      for (std::size_t r : rows) {
        (data.x.row(r)[static_cast<std::size_t>(s.feature)] <= s.threshold ? left : right).push_back(r);
      }
      tree.nodes_[static_cast<std::size_t>(id)].feature = s.feature;
      tree.nodes_[static_cast<std::size_t>(id)].threshold = s.threshold;
      const int l = build(left, depth + 1);
      const int r = build(right, depth + 1);
      tree.nodes_[static_cast<std::size_t>(id)].left = l;
      tree.nodes_[static_cast<std::size_t>(id)].right = r;
      return id;
    }

    Split best_split(const std::vector<std::size_t>& rows) {
      const std::size_t d = data.x.cols;
      std::vector<std::size_t> order(d);
      std::iota(order.begin(), order.end(), 0);
      std::size_t first = d;
      if (params.max_features < d) {
        rng.shuffle(order.begin(), order.end());
        first = params.max_features;
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(first));
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
      }
      Split best;
      for (std::size_t i = 0; i < first; ++i) scan(rows, order[i], best);
      // Fall back to the unsampled features when the sample has no usable split.
      for (std::size_t i = first; best.feature < 0 && i < d; ++i) scan(rows, order[i], best);
      return best;
    }

    // Gini-weighted impurity n_l*G_l + n_r*G_r = n - (sum c_l^2 / n_l + sum c_r^2 / n_r),
    // so the best split maximizes the bracketed score.
    void scan(const std::vector<std::size_t>& rows, std::size_t f, Split& best) {
      const std::size_t m = rows.size();
      std::vector<std::pair<double, int>> v(m);
      for (std::size_t i = 0; i < m; ++i) v[i] = {data.x.row(rows[i])[f], data.y[rows[i]]};
      std::sort(v.begin(), v.end());
      if (v.front().first == v.back().first) return;
      std::vector<long long> cl(data.classes, 0), cr(data.classes, 0);
      for (const auto& e : v) ++cr[static_cast<std::size_t>(e.second)];
      long long sq_l = 0, sq_r = 0;
      for (long long c : cr) sq_r += c * c;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const auto c = static_cast<std::size_t>(v[i].second);
        sq_l += 2 * cl[c] + 1;
        ++cl[c];
        sq_r -= 2 * cr[c] - 1;
        --cr[c];
        if (v[i].first == v[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = m - nl;
        if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
        const double score =
            static_cast<double>(sq_l) / double(nl) + static_cast<double>(sq_r) / double(nr);
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<int>(f);
          double mid = 0.5 * (v[i].first + v[i + 1].first);
          if (!(mid < v[i + 1].first)) mid = v[i].first;
          best.threshold = mid;
        }
      }
    }
  };

  std::size_t classes_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> probs_;  // nodes x classes
};

class Forest final : public Estimator {
 public:
  Forest(std::size_t classes, std::size_t cols, std::vector<Tree> trees)
      : classes_(classes), cols_(cols), trees_(std::move(trees)) {}

  void predict_proba(const Design& x, std::span<double> out) const override {
    const double scale = 1.0 / static_cast<double>(trees_.size());
    for (std::size_t i = 0; i < x.rows; ++i) {
      auto p = out.subspan(i * classes_, classes_);
      std::fill(p.begin(), p.end(), 0.0);
      for (const Tree& t : trees_) {
        const auto leaf = t.leaf(x.row(i));
        for (std::size_t c = 0; c < classes_; ++c) p[c] += leaf[c];
      }
      if (trees_.size() > 1)
        for (double& v : p) v *= scale;
    }
  }

  void serialize(std::vector<std::uint8_t>& out) const override {
    BinWriter w(out);
    w.u64(classes_);
    w.u64(cols_);
    w.u64(trees_.size());
    for (const Tree& t : trees_) t.write(w);
  }

  static std::shared_ptr<const Estimator> read(BinReader& in, bool single) {
    const auto classes = static_cast<std::size_t>(in.u64());
    const auto cols = static_cast<std::size_t>(in.u64());
    const auto n = static_cast<std::size_t>(in.u64());
    if (classes == 0 || n == 0 || (single && n != 1))
      throw Error(ErrorCode::schema_mismatch, "tree ensemble payload inconsistent");
    std::vector<Tree> trees;
    for (std::size_t i = 0; i < n; ++i) trees.push_back(Tree::read(in, classes, cols));
    return std::make_shared<Forest>(classes, cols, std::move(trees));
  }

 private:
  std::size_t classes_;
  std::size_t cols_;
  std::vector<Tree> trees_;
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

std::shared_ptr<const Estimator> fit_decision_tree(const ModelSpec& spec, const TrainData& data) {
  const TreeParams params = tree_params(spec, data.x.cols);
  Rng rng(Rng::substream(spec.seed, 0));
  std::vector<Tree> trees;
  trees.push_back(Tree::grow(data, all_rows(data.x.rows), params, rng));
  return std::make_shared<Forest>(data.classes, data.x.cols, std::move(trees));
}

std::shared_ptr<const Estimator> fit_random_forest(const ModelSpec& spec, const TrainData& data) {
  const TreeParams params = tree_params(spec, data.x.cols);
  const auto n_trees = static_cast<std::size_t>(spec.param("n_trees"));
  const bool bootstrap = spec.param("bootstrap") != 0.0;
  const std::size_t n = data.x.rows;
  std::vector<Tree> trees;
  trees.reserve(n_trees);
  for (std::size_t i = 0; i < n_trees; ++i) {
    Rng rng(Rng::substream(spec.seed, i));
    std::vector<std::size_t> rows;
    if (bootstrap) {
      rows.resize(n);
      for (auto& r : rows) r = rng.index(n);
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all_rows(n);
    }
    trees.push_back(Tree::grow(data, std::move(rows), params, rng));
  }
  return std::make_shared<Forest>(data.classes, data.x.cols, std::move(trees));
}

std::shared_ptr<const Estimator> load_decision_tree(BinReader& in) { return Forest::read(in, true); }
std::shared_ptr<const Estimator> load_random_forest(BinReader& in) { return Forest::read(in, false); }

}  // namespace csiauth::classify::detail
