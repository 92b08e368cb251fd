// SPDX-License-Identifier: Apache-2.0
#include "csiauth/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "csiauth/error.hpp"

namespace csiauth::select {

std::vector<int> discretize(std::span<const double> x, std::size_t bins, Binning binning) {
  const std::size_t n = x.size();
  std::vector<int> codes(n, 0);
  if (n == 0) return codes;
  if (binning == Binning::equal_width) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double range = *hi - *lo;
    if (range <= 0.0) return codes;
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = static_cast<std::size_t>((x[i] - *lo) / range * static_cast<double>(bins));
      codes[i] = static_cast<int>(std::min(b, bins - 1));
    }
    return codes;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::size_t first_rank = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && x[order[r]] != x[order[r - 1]]) first_rank = r;
    codes[order[r]] = static_cast<int>(first_rank * bins / n);
  }
  return codes;
}

std::vector<int> encode_labels(std::span<const std::string> labels) {
  std::map<std::string, int> index;
  for (const auto& l : labels) index.emplace(l, 0);
  int next = 0;
  for (auto& [label, code] : index) code = next++;
  std::vector<int> codes;
  codes.reserve(labels.size());
  for (const auto& l : labels) codes.push_back(index.at(l));
  return codes;
}

double discrete_mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::schema_mismatch, "MI inputs differ in length");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  const int na = *std::max_element(a.begin(), a.end()) + 1;
  const int nb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> joint(static_cast<std::size_t>(na * nb), 0.0);
  std::vector<double> pa(static_cast<std::size_t>(na), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(a[i] * nb + b[i])] += 1.0;
    pa[static_cast<std::size_t>(a[i])] += 1.0;
    pb[static_cast<std::size_t>(b[i])] += 1.0;
  }
  const auto total = static_cast<double>(n);
  double mi = 0.0;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const double c = joint[static_cast<std::size_t>(i * nb + j)];
      if (c == 0.0) continue;
      mi += c / total * std::log2(c * total / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
    }
  }
  return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> x, std::span<const int> y, const MrmrConfig& cfg) {
  if (x.size() != y.size()) throw Error(ErrorCode::schema_mismatch, "MI inputs differ in length");
  if (cfg.bins < 2) throw Error(ErrorCode::invalid_config, "MI needs at least 2 bins");
  if (x.size() < cfg.bins) {
    throw Error(ErrorCode::degenerate_input, "MI needs at least as many samples as bins");
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 0.0;
  const auto codes = discretize(x, cfg.bins, cfg.binning);
  return discrete_mutual_information(codes, y);
}

std::vector<RankedFeature> mrmr_rank(const FeatureMatrix& F, const MrmrConfig& cfg) {
  const std::size_t d = F.cols();
  const std::size_t n = F.rows();
  if (d < 2) throw Error(ErrorCode::degenerate_input, "mRMR needs at least 2 features");
  if (cfg.k_select < 1 || cfg.k_select > d) {
    throw Error(ErrorCode::invalid_config, "k_select must be in [1, feature count]");
  }
  if (cfg.bins < 2) throw Error(ErrorCode::invalid_config, "bins must be >= 2");
  const auto y = encode_labels(F.labels);
  if (std::set<int>(y.begin(), y.end()).size() < 2) {
    throw Error(ErrorCode::single_class, "mRMR needs at least 2 classes");
  }
  if (n < cfg.bins) throw Error(ErrorCode::degenerate_input, "mRMR needs at least `bins` rows");

  std::vector<std::vector<int>> codes(d);
  std::vector<bool> constant(d, false);
  std::vector<double> relevance(d, 0.0);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = F.at(i, j);
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    constant[j] = *lo == *hi;
    codes[j] = constant[j] ? std::vector<int>(n, 0) : discretize(column, cfg.bins, cfg.binning);
    relevance[j] = constant[j] ? 0.0 : discrete_mutual_information(codes[j], y);
  }

  std::vector<RankedFeature> ranked;
  std::vector<bool> chosen(d, false);
  std::vector<double> redundancy_sum(d, 0.0);
  for (std::size_t step = 0; step < cfg.k_select; ++step) {
    std::size_t best = d;
    double best_score = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (chosen[j]) continue;
      const double red = step == 0 ? 0.0 : redundancy_sum[j] / static_cast<double>(step);
      const double score = relevance[j] - red;
      if (best == d || score > best_score ||
          (score == best_score && F.names[j] < F.names[best])) {
        best = j;
        best_score = score;
      }
    }
    chosen[best] = true;
    const double red = step == 0 ? 0.0 : redundancy_sum[best] / static_cast<double>(step);
    ranked.push_back({F.names[best], best, relevance[best], red, best_score});
    for (std::size_t j = 0; j < d; ++j) {
      if (chosen[j]) continue;
      if (!constant[j] && !constant[best]) {
        redundancy_sum[j] += discrete_mutual_information(codes[j], codes[best]);
      }
    }
  }
  return ranked;
}

}  // namespace csiauth::select
