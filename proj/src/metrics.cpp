// SPDX-License-Identifier: Apache-2.0
#include "csiauth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csiauth/random.hpp"
#include "csiauth/stats.hpp"

namespace csiauth::metrics {
namespace {

[[noreturn]] void degenerate(const std::string& msg) { throw Error(ErrorCode::degenerate_class, msg); }

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return v;
}

// EER over sorted score lists where entry j occurs w[j] times (w may hold
// zeros). Every score with nonzero weight is a candidate threshold.
EerResult eer_weighted(std::span<const double> g, std::span<const std::uint32_t> gw,
                       std::span<const double> im, std::span<const std::uint32_t> iw) {
  double ng = 0.0, ni = 0.0;
  double g_min = std::numeric_limits<double>::infinity();
  double i_max = -std::numeric_limits<double>::infinity();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.size(); ++j)
    if (gw[j]) {
      ng += gw[j];
      g_min = std::min(g_min, g[j]);
      top = std::max(top, g[j]);
    }
  for (std::size_t j = 0; j < im.size(); ++j)
    if (iw[j]) {
      ni += iw[j];
      i_max = std::max(i_max, im[j]);
      top = std::max(top, im[j]);
    }
  EerResult r;
  if (g_min > i_max) {
    r.threshold = 0.5 * (g_min + i_max);
    return r;
  }

  std::size_t pg = 0, pi = 0;
  double g_below = 0.0, i_below = 0.0;
  double prev_t = 0.0, prev_far = 1.0, prev_frr = 0.0;
  bool have_prev = false;
  const auto skip_empty = [](std::size_t p, std::span<const std::uint32_t> w) {
    while (p < w.size() && w[p] == 0) ++p;
    return p;
  };
  while (true) {
    pg = skip_empty(pg, gw);
    pi = skip_empty(pi, iw);
    double t;
    double far, frr;
    const bool sentinel = pg == g.size() && pi == im.size();
    if (sentinel) {
      t = std::nextafter(top, std::numeric_limits<double>::infinity());
      far = 0.0;
      frr = 1.0;
    } else {
      t = std::min(pg < g.size() ? g[pg] : std::numeric_limits<double>::infinity(),
                   pi < im.size() ? im[pi] : std::numeric_limits<double>::infinity());
      far = (ni - i_below) / ni;
      frr = g_below / ng;
    }
    if (frr >= far && have_prev) {
      const double d0 = prev_frr - prev_far;
      const double d1 = frr - far;
      const double a = -d0 / (d1 - d0);
      r.eer = prev_far + a * (far - prev_far);
      r.threshold = prev_t + a * (t - prev_t);
      r.far_at_threshold = far;
      r.frr_at_threshold = frr;
      r.interpolated = d1 != 0.0;
      return r;
    }
    prev_t = t;
    prev_far = far;
    prev_frr = frr;
    have_prev = true;
    while (pg < g.size() && g[pg] == t) g_below += gw[pg++];
    while (pi < im.size() && im[pi] == t) i_below += iw[pi++];
  }
}

double eer_value(std::span<const double> g_sorted, std::span<const double> i_sorted) {
  const std::vector<std::uint32_t> gw(g_sorted.size(), 1), iw(i_sorted.size(), 1);
  return eer_weighted(g_sorted, gw, i_sorted, iw).eer;
}

// Class column of a row's true label, or classes() for labels outside the set.
std::size_t true_index(const ScoreMatrix& s, std::size_t i) {
  const auto it = std::find(s.class_ids.begin(), s.class_ids.end(), s.true_labels[i]);
  return static_cast<std::size_t>(it - s.class_ids.begin());
}

void draw_counts(Rng& rng, std::vector<std::uint32_t>& w) {
  std::fill(w.begin(), w.end(), 0u);
  const std::size_t n = w.size();
  for (std::size_t j = 0; j < n; ++j) ++w[rng.index(n)];
}

BioQuake summarize(double point, std::vector<double>& samples, double ci) {
  BioQuake b;
  b.eer = point;
  if (samples.empty()) return b;
  b.uncertainty = samples.size() > 1 ? stats::std_sample(samples) : 0.0;
  std::sort(samples.begin(), samples.end());
  const double tail = 0.5 * (1.0 - ci);
  b.ci_low = stats::quantile_sorted(samples, tail);
  b.ci_high = stats::quantile_sorted(samples, 1.0 - tail);
  b.ci_width = b.ci_high - b.ci_low;
  return b;
}

void check_bioquake_cfg(const BioQuakeConfig& cfg) {
  if (!(cfg.ci > 0.0 && cfg.ci < 1.0))
    throw Error(ErrorCode::invalid_config, "bioquake ci must be in (0, 1)");
}

}  // namespace

AggregateMetrics aggregate_metrics(const ScoreMatrix& scores) {
  validate_scores(scores);
  const std::size_t C = scores.classes();
  if (C < 2) throw Error(ErrorCode::single_class, "aggregate_metrics: need at least two classes");
  AggregateMetrics m;
  const std::size_t n = scores.rows();
  if (n == 0) throw Error(ErrorCode::insufficient_data, "aggregate_metrics: no rows");
  std::vector<double> tp(C, 0.0), fp(C, 0.0), fn(C, 0.0);
  double correct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = scores.predicted(i);
    const std::size_t t = true_index(scores, i);
    if (p == t) {
      correct += 1.0;
      tp[p] += 1.0;
    } else {
      fp[p] += 1.0;
      if (t < C) fn[t] += 1.0;
    }
  }
  m.accuracy = correct / static_cast<double>(n);
  for (std::size_t c = 0; c < C; ++c) {
    const double tn = static_cast<double>(n) - tp[c] - fp[c] - fn[c];
    double precision = 0.0, recall = 0.0;
    if (tp[c] + fp[c] > 0.0) {
      precision = tp[c] / (tp[c] + fp[c]);
    } else {
      m.flags.push_back("never_predicted:" + scores.class_ids[c]);
    }
    if (tp[c] + fn[c] > 0.0) {
      recall = tp[c] / (tp[c] + fn[c]);
    } else {
      m.flags.push_back("no_true_rows:" + scores.class_ids[c]);
    }
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double spec = tn + fp[c] > 0.0 ? tn / (tn + fp[c]) : 0.0;
    m.macro_precision += precision;
    m.macro_recall += recall;
    m.macro_f1 += f1;
    m.macro_specificity += spec;
  }
  const double inv = 1.0 / static_cast<double>(C);
  m.macro_precision *= inv;
  m.macro_recall *= inv;
  m.macro_f1 *= inv;
  m.macro_specificity *= inv;
  return m;
}

ClassScores class_scores(const ScoreMatrix& scores, std::string_view class_id) {
  const std::size_t c = scores.class_index(class_id);
  if (c >= scores.classes())
    throw Error(ErrorCode::degenerate_class, "unknown class '" + std::string(class_id) + "'");
  ClassScores out;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    (scores.true_labels[i] == class_id ? out.genuine : out.impostor).push_back(scores.at(i, c));
  }
  return out;
}

double auc(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty())
    degenerate("auc needs at least one genuine and one impostor score");
  const std::size_t ng = genuine.size(), ni = impostor.size(), n = ng + ni;
  std::vector<std::pair<double, bool>> all;
  all.reserve(n);
  for (double v : genuine) all.emplace_back(v, true);
  for (double v : impostor) all.emplace_back(v, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    // Ranks i+1..j share their midrank.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second) rank_sum += mid;
    i = j;
  }
  const double u = rank_sum - 0.5 * static_cast<double>(ng) * static_cast<double>(ng + 1);
  return u / (static_cast<double>(ng) * static_cast<double>(ni));
}

AucResult roc_auc_ovr(const ScoreMatrix& scores) {
  validate_scores(scores);
  AucResult r;
  r.class_ids = scores.class_ids;
  for (const auto& id : scores.class_ids) {
    const ClassScores cs = class_scores(scores, id);
    if (cs.genuine.empty() || cs.impostor.empty())
      degenerate("class '" + id + "' lacks genuine or impostor scores");
    r.per_class.push_back(auc(cs.genuine, cs.impostor));
  }
  r.macro = r.per_class.empty() ? 0.0 : stats::mean(r.per_class);
  return r;
}

double far_at(std::span<const double> impostor, double threshold) {
  if (impostor.empty()) return 0.0;
  const auto n = std::count_if(impostor.begin(), impostor.end(),
                               [&](double v) { return v >= threshold; });
  return static_cast<double>(n) / static_cast<double>(impostor.size());
}

double frr_at(std::span<const double> genuine, double threshold) {
  if (genuine.empty()) return 0.0;
  const auto n = std::count_if(genuine.begin(), genuine.end(),
                               [&](double v) { return v < threshold; });
  return static_cast<double>(n) / static_cast<double>(genuine.size());
}

EerResult eer(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty())
    degenerate("eer needs at least one genuine and one impostor score");
  for (double v : genuine)
    if (!std::isfinite(v)) degenerate("non-finite genuine score");
  for (double v : impostor)
    if (!std::isfinite(v)) degenerate("non-finite impostor score");
  const auto g = sorted_copy(genuine);
  const auto im = sorted_copy(impostor);
  const std::vector<std::uint32_t> gw(g.size(), 1), iw(im.size(), 1);
  return eer_weighted(g, gw, im, iw);
}

EerResult eer_per_class(const ScoreMatrix& scores, std::string_view class_id) {
  const ClassScores cs = class_scores(scores, class_id);
  if (cs.genuine.empty() || cs.impostor.empty())
    degenerate("class '" + std::string(class_id) + "' lacks genuine or impostor scores");
  EerResult r = eer(cs.genuine, cs.impostor);
  r.class_id = std::string(class_id);
  return r;
}

std::vector<EerResult> eer_all_classes(const ScoreMatrix& scores) {
  validate_scores(scores);
  std::vector<EerResult> out;
  for (const auto& id : scores.class_ids) out.push_back(eer_per_class(scores, id));
  return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw Error(ErrorCode::invalid_config, "histogram needs bins >= 1 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double v : values) {
    double pos = std::floor((v - lo) * scale);
    pos = std::clamp(pos, 0.0, static_cast<double>(bins - 1));
    ++h.counts[static_cast<std::size_t>(pos)];
  }
  return h;
}

FcsData fcs(const ScoreMatrix& scores, std::size_t bins) {
  validate_scores(scores);
  FcsData f;
  const std::size_t C = scores.classes();
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const std::size_t t = true_index(scores, i);
    for (std::size_t c = 0; c < C; ++c)
      (c == t ? f.genuine_scores : f.impostor_scores).push_back(scores.at(i, c));
  }
  f.genuine_hist = histogram(f.genuine_scores, bins);
  f.impostor_hist = histogram(f.impostor_scores, bins);
  if (!f.genuine_scores.empty() && !f.impostor_scores.empty()) {
    f.separation_gap = *std::min_element(f.genuine_scores.begin(), f.genuine_scores.end()) -
                       *std::max_element(f.impostor_scores.begin(), f.impostor_scores.end());
  }
  return f;
}

GiniValue gini(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorCode::degenerate_input, "gini needs at least two users");
  double total = 0.0;
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::degenerate_input, "gini needs finite nonnegative values");
    total += v;
  }
  if (total == 0.0) return {0.0, true};
  // With x sorted ascending, sum_ij |xi - xj| = 2 * sum_i (2i - n + 1) x_(i).
  auto s = sorted_copy(x);
  const auto n = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += (2.0 * static_cast<double>(i) - n + 1.0) * s[i];
  return {std::max(0.0, acc / (n * total)), false};
}

GiniReport gini_report(const ScoreMatrix& scores, std::span<const EerResult> eers) {
  validate_scores(scores);
  GiniReport g;
  for (const EerResult& e : eers) {
    const ClassScores cs = class_scores(scores, e.class_id);
    g.class_ids.push_back(e.class_id);
    g.false_accepts.push_back(far_at(cs.impostor, e.threshold) * static_cast<double>(cs.impostor.size()));
    g.false_rejects.push_back(frr_at(cs.genuine, e.threshold) * static_cast<double>(cs.genuine.size()));
  }
  const GiniValue far = gini(g.false_accepts);
  const GiniValue frr = gini(g.false_rejects);
  if (far.no_errors) g.flags.push_back("no_false_accepts");
  if (frr.no_errors) g.flags.push_back("no_false_rejects");
  g.gc_far = far.value;
  g.gc_frr = frr.value;
  g.gc_mean = 0.5 * (g.gc_far + g.gc_frr);
  return g;
}

BioQuake bioquake_scores(std::span<const double> genuine, std::span<const double> impostor,
                         const BioQuakeConfig& cfg) {
  check_bioquake_cfg(cfg);
  if (genuine.size() < 5 || impostor.size() < 5)
    throw Error(ErrorCode::too_few_scores, "bioquake needs at least 5 genuine and 5 impostor scores");
  const auto g = sorted_copy(genuine);
  const auto im = sorted_copy(impostor);
  const double point = eer_value(g, im);
  std::vector<std::uint32_t> gw(g.size()), iw(im.size());
  std::vector<double> samples;
  samples.reserve(cfg.resamples);
  for (std::size_t r = 0; r < cfg.resamples; ++r) {
    Rng rng(Rng::substream(cfg.seed, r));
    draw_counts(rng, gw);
    draw_counts(rng, iw);
    samples.push_back(eer_weighted(g, gw, im, iw).eer);
  }
  return summarize(point, samples, cfg.ci);
}

BioQuake bioquake(const ScoreMatrix& scores, std::string_view class_id, const BioQuakeConfig& cfg) {
  const ClassScores cs = class_scores(scores, class_id);
  return bioquake_scores(cs.genuine, cs.impostor, cfg);
}

BioQuake bioquake_macro(const ScoreMatrix& scores, const BioQuakeConfig& cfg) {
  check_bioquake_cfg(cfg);
  validate_scores(scores);
  struct Sorted {
    std::vector<double> g, im;
    std::vector<std::uint32_t> gw, iw;
  };
  std::vector<Sorted> cls;
  double point = 0.0;
  for (const auto& id : scores.class_ids) {
    ClassScores cs = class_scores(scores, id);
    if (cs.genuine.size() < 5 || cs.impostor.size() < 5)
      throw Error(ErrorCode::too_few_scores,
                  "bioquake needs at least 5 genuine and 5 impostor scores for class '" + id + "'");
    Sorted s{sorted_copy(cs.genuine), sorted_copy(cs.impostor), {}, {}};
    s.gw.resize(s.g.size());
    s.iw.resize(s.im.size());
    point += eer_value(s.g, s.im);
    cls.push_back(std::move(s));
  }
  if (cls.empty()) throw Error(ErrorCode::too_few_scores, "bioquake needs at least one class");
  const auto C = static_cast<double>(cls.size());
  point /= C;
  std::vector<double> samples;
  samples.reserve(cfg.resamples);
  for (std::size_t r = 0; r < cfg.resamples; ++r) {
    Rng rng(Rng::substream(cfg.seed, r));
    double sum = 0.0;
    for (Sorted& s : cls) {
      draw_counts(rng, s.gw);
      draw_counts(rng, s.iw);
      sum += eer_weighted(s.g, s.gw, s.im, s.iw).eer;
    }
    samples.push_back(sum / C);
  }
  return summarize(point, samples, cfg.ci);
}

ThresholdStats threshold_stats(std::span<const EerResult> eers) {
  ThresholdStats t;
  if (eers.empty()) return t;
  std::vector<double> th;
  for (const EerResult& e : eers) {
    th.push_back(e.threshold);
    if (e.threshold < 0.1 || e.threshold > 0.7) {
      ++t.extreme;
    } else {
      ++t.ideal;
    }
  }
  t.mean = stats::mean(th);
  t.std = th.size() > 1 ? stats::std_sample(th) : 0.0;
  t.min = *std::min_element(th.begin(), th.end());
  t.max = *std::max_element(th.begin(), th.end());
  return t;
}

SecurityReport security_report(const ScoreMatrix& scores, std::string model, const ReportConfig& cfg) {
  SecurityReport r;
  r.model = std::move(model);
  r.rows = scores.rows();
  r.aggregate = aggregate_metrics(scores);
  r.auc = roc_auc_ovr(scores);
  r.eers = eer_all_classes(scores);
  double sum = 0.0;
  for (const auto& e : r.eers) sum += e.eer;
  r.mean_eer = r.eers.empty() ? 0.0 : sum / static_cast<double>(r.eers.size());
  r.fcs = fcs(scores, cfg.fcs_bins);
  r.gini = gini_report(scores, r.eers);
  r.bioquake = bioquake_macro(scores, cfg.bioquake);
  r.thresholds = threshold_stats(r.eers);
  return r;
}

}  // namespace csiauth::metrics
