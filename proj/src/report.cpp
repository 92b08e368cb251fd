// SPDX-License-Identifier: Apache-2.0
#include "csiauth/report.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "csiauth/digest.hpp"

namespace csiauth::report {
namespace {

using harness::RunResult;

class Csv {
 public:
  Csv(const harness::Provenance& p, const std::string& columns) {
    out_ << provenance_line(p) << '\n' << columns << '\n';
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }

  std::ostringstream out_;
};

// Splits one CSV line honouring double quotes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

nlohmann::json eer_json(const metrics::EerResult& e) {
  return {{"class_id", e.class_id},
          {"eer", e.eer},
          {"threshold", e.threshold},
          {"far_at_threshold", e.far_at_threshold},
          {"frr_at_threshold", e.frr_at_threshold},
          {"interpolated", e.interpolated}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string provenance_line(const harness::Provenance& p) {
  return "# tool=csiauth " + p.tool_version + " config_hash=" + p.config_hash +
         " dataset_digest=" + p.dataset_digest + " seed=" + std::to_string(p.seed);
}

std::vector<Table> evaluation_tables(const std::vector<RunResult>& runs,
                                     const harness::Provenance& prov,
                                     const std::vector<GridTable>& grids) {
  Csv t2(prov, "split_mode,window,model,accuracy,precision,specificity,recall,f1,roc_auc,eer");
  Csv t4(prov, "split_mode,window,model,false_accepts,false_rejects,gc_far,gc_frr,gc_mean,flags");
  Csv t5(prov, "split_mode,window,model,eer,uncertainty,ci_width,ci_low,ci_high");
  Csv pc(prov,
         "split_mode,window,model,class_id,eer,threshold,far,frr,interpolated,false_accepts,"
         "false_rejects,roc_auc");
  Csv th(prov, "split_mode,window,model,mean,std,min,max,extreme,ideal");
  Csv fh(prov, "split_mode,window,model,distribution,bin,lo,hi,count");
  Csv fr(prov, "split_mode,window,rank,feature,folds_selected,mean_position,mean_score");
  Csv fm(prov, "split_mode,window,model,fold,train_rows,test_rows,accuracy,mean_eer,selected");
  Csv la(prov, "split_mode,window,model,clean_accuracy,leaky_accuracy,delta,flagged");
  Csv at(prov, "split_mode,window,model,attack,kind,victim,windows,victim_threshold,far");
  bool any_attack = false;

  for (const RunResult& r : runs) {
    const std::string mode(harness::to_string(r.split_mode));
    const std::size_t w = r.window_size;
    for (const auto& m : r.models) {
      const auto& rep = m.report;
      const auto& a = rep.aggregate;
      t2.row(mode, w, rep.model, a.accuracy, a.macro_precision, a.macro_specificity, a.macro_recall,
             a.macro_f1, rep.auc.macro, rep.mean_eer);
      double fa = 0.0, fr_total = 0.0;
      for (double v : rep.gini.false_accepts) fa += v;
      for (double v : rep.gini.false_rejects) fr_total += v;
      std::string flags;
      for (const auto& f : rep.gini.flags) flags += (flags.empty() ? "" : ";") + f;
      t4.row(mode, w, rep.model, fa, fr_total, rep.gini.gc_far, rep.gini.gc_frr, rep.gini.gc_mean, flags);
      t5.row(mode, w, rep.model, rep.bioquake.eer, rep.bioquake.uncertainty, rep.bioquake.ci_width,
             rep.bioquake.ci_low, rep.bioquake.ci_high);
      for (std::size_t c = 0; c < rep.eers.size(); ++c) {
        const auto& e = rep.eers[c];
        pc.row(mode, w, rep.model, e.class_id, e.eer, e.threshold, e.far_at_threshold, e.frr_at_threshold,
               e.interpolated, rep.gini.false_accepts[c], rep.gini.false_rejects[c], rep.auc.per_class[c]);
      }
      const auto& ts = rep.thresholds;
      th.row(mode, w, rep.model, ts.mean, ts.std, ts.min, ts.max, ts.extreme, ts.ideal);
      for (const auto* dist : {&rep.fcs.genuine_hist, &rep.fcs.impostor_hist}) {
        const char* name = dist == &rep.fcs.genuine_hist ? "genuine" : "impostor";
        const std::size_t bins = dist->counts.size();
        for (std::size_t b = 0; b < bins; ++b) {
          const double lo = dist->lo + (dist->hi - dist->lo) * static_cast<double>(b) / double(bins);
          const double hi = dist->lo + (dist->hi - dist->lo) * static_cast<double>(b + 1) / double(bins);
          fh.row(mode, w, rep.model, name, b, lo, hi, dist->counts[b]);
        }
      }
      for (const auto& f : m.cv.folds) {
        std::string sel;
        for (const auto& s : f.selected) sel += (sel.empty() ? "" : ";") + s;
        fm.row(mode, w, rep.model, f.fold, f.train_rows, f.test_rows, f.accuracy, f.mean_eer, sel);
      }
      for (const auto& o : m.attacks) {
        any_attack = true;
        at.row(mode, w, rep.model, o.label, o.kind, o.victim, o.windows, o.victim_threshold, o.far);
      }
    }
    for (std::size_t i = 0; i < r.ranking.size(); ++i) {
      const auto& u = r.ranking[i];
      fr.row(mode, w, i + 1, u.name, u.folds_selected, u.mean_position, u.mean_score);
    }
    if (r.leakage) {
      const auto& l = *r.leakage;
      la.row(mode, w, l.model, l.clean_accuracy, l.leaky_accuracy, l.delta, l.flagged);
    }
  }

  std::vector<Table> tables = {
      {"table2_metrics.csv", t2.str()},     {"table4_gini.csv", t4.str()},
      {"table5_bioquake.csv", t5.str()},    {"per_class_eer.csv", pc.str()},
      {"threshold_stats.csv", th.str()},    {"fcs_histogram.csv", fh.str()},
      {"feature_ranking.csv", fr.str()},    {"fold_metrics.csv", fm.str()},
      {"leakage_audit.csv", la.str()},
  };
  if (any_attack) tables.push_back({"attacks.csv", at.str()});
  if (!grids.empty()) {
    Csv gs(prov, "split_mode,window,model,spec,mean_accuracy,mean_eer,best");
    for (const auto& g : grids)
      for (const auto& row : g.result.table)
        gs.row(std::string(harness::to_string(g.split_mode)), g.window_size, g.model,
               classify::describe(row.spec), row.mean_accuracy, row.mean_eer, row.spec == g.result.best);
    tables.push_back({"grid_search.csv", gs.str()});
  }
  return tables;
}

std::string tables_digest(const std::vector<Table>& tables) {
  Sha256 h;
  for (const auto& t : tables) {
    h.update_u64(t.name.size());
    h.update(t.name);
    h.update_u64(t.csv.size());
    h.update(t.csv);
  }
  return h.hex();
}

std::string run_digest(const RunResult& run) {
  return tables_digest(evaluation_tables({run}, run.provenance));
}

nlohmann::json run_json(const RunResult& r) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : r.models) {
    const auto& rep = m.report;
    nlohmann::json eers = nlohmann::json::array();
    for (const auto& e : rep.eers) eers.push_back(eer_json(e));
    nlohmann::json attacks = nlohmann::json::array();
    for (const auto& o : m.attacks)
      attacks.push_back({{"label", o.label}, {"kind", o.kind}, {"victim", o.victim}, {"windows", o.windows},
                         {"victim_threshold", o.victim_threshold}, {"far", o.far}});
    models.push_back({
        {"model", rep.model},
        {"rows", rep.rows},
        {"aggregate",
         {{"accuracy", rep.aggregate.accuracy},
          {"macro_precision", rep.aggregate.macro_precision},
          {"macro_recall", rep.aggregate.macro_recall},
          {"macro_f1", rep.aggregate.macro_f1},
          {"macro_specificity", rep.aggregate.macro_specificity},
          {"flags", rep.aggregate.flags}}},
        {"roc_auc", {{"macro", rep.auc.macro}, {"per_class", rep.auc.per_class}}},
        {"mean_eer", rep.mean_eer},
        {"per_class_eer", eers},
        {"fcs",
         {{"genuine_count", rep.fcs.genuine_scores.size()},
          {"impostor_count", rep.fcs.impostor_scores.size()},
          {"separation_gap", rep.fcs.separation_gap},
          {"genuine_hist", rep.fcs.genuine_hist.counts},
          {"impostor_hist", rep.fcs.impostor_hist.counts}}},
        {"gini",
         {{"gc_far", rep.gini.gc_far},
          {"gc_frr", rep.gini.gc_frr},
          {"gc_mean", rep.gini.gc_mean},
          {"false_accepts", rep.gini.false_accepts},
          {"false_rejects", rep.gini.false_rejects},
          {"flags", rep.gini.flags}}},
        {"bioquake",
         {{"eer", rep.bioquake.eer},
          {"uncertainty", rep.bioquake.uncertainty},
          {"ci_width", rep.bioquake.ci_width},
          {"ci_low", rep.bioquake.ci_low},
          {"ci_high", rep.bioquake.ci_high}}},
        {"thresholds",
         {{"mean", rep.thresholds.mean},
          {"std", rep.thresholds.std},
          {"min", rep.thresholds.min},
          {"max", rep.thresholds.max},
          {"extreme", rep.thresholds.extreme},
          {"ideal", rep.thresholds.ideal}}},
        {"cv_mean_accuracy", m.cv.mean_accuracy},
        {"cv_mean_fold_eer", m.cv.mean_fold_eer},
        {"attacks", attacks},
    });
  }
  nlohmann::json j = {{"split_mode", std::string(harness::to_string(r.split_mode))},
                      {"window_size", r.window_size},
                      {"windows", r.windows},
                      {"folds", r.folds},
                      {"models", models},
                      {"digest", run_digest(r)}};
  if (r.leakage) {
    j["leakage_audit"] = {{"model", r.leakage->model},
                          {"clean_accuracy", r.leakage->clean_accuracy},
                          {"leaky_accuracy", r.leakage->leaky_accuracy},
                          {"delta", r.leakage->delta},
                          {"flagged", r.leakage->flagged}};
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

std::string write_evaluation(const std::vector<RunResult>& runs, const harness::Provenance& prov,
                             const std::vector<GridTable>& grids, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
  const auto tables = evaluation_tables(runs, prov, grids);
  for (const auto& t : tables) write_text(dir / t.name, t.csv);
  const std::string digest = tables_digest(tables);

  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& r : runs) runs_json.push_back(run_json(r));
  nlohmann::json files = nlohmann::json::array();
  for (const auto& t : tables) files.push_back(t.name);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  const nlohmann::json report = {
      {"format", "csiauth-report"},
      {"version", 1},
      {"provenance",
       {{"tool_version", prov.tool_version},
        {"config_hash", prov.config_hash},
        {"dataset_digest", prov.dataset_digest},
        {"seed", prov.seed}}},
      {"digest", digest},
      {"generated_at", stamp},
      {"files", files},
      {"runs", runs_json},
  };
  write_text(dir / "report.json", report.dump(2) + "\n");
  return digest;
}

std::string features_csv(const FeatureMatrix& F, const harness::Provenance& prov) {
  std::ostringstream out;
  out << provenance_line(prov) << '\n' << "subject_id,acquisition,record,start";
  for (const auto& n : F.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < F.rows(); ++i) {
    out << F.labels[i] << ',' << (i < F.groups.size() ? F.groups[i] : "") << ','
        << (i < F.provenance.size() ? F.provenance[i].record : 0) << ','
        << (i < F.provenance.size() ? F.provenance[i].start : 0);
    for (double v : F.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.size() < 4 || header[0] != "subject_id")
    throw Error(ErrorCode::schema_mismatch, path.string() + ": not a feature matrix CSV");
  FeatureMatrix F;
  F.names.assign(header.begin() + 4, header.end());
  std::vector<double> values(F.names.size());
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::schema_mismatch, path.string() + ": row " + std::to_string(line_no) +
                                                  " has " + std::to_string(cells.size()) + " cells");
    try {
      for (std::size_t j = 0; j < values.size(); ++j) values[j] = std::stod(cells[4 + j]);
      F.add_row(values, cells[0], cells[1],
                {static_cast<std::size_t>(std::stoull(cells[2])), static_cast<std::size_t>(std::stoull(cells[3]))});
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::schema_mismatch, path.string() + ": bad number in row " + std::to_string(line_no));
    } catch (const std::out_of_range&) {
      throw Error(ErrorCode::schema_mismatch, path.string() + ": number out of range in row " + std::to_string(line_no));
    }
  }
  return F;
}

}  // namespace csiauth::report
