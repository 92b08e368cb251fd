// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csiauth/harness.hpp"
#include "csiauth/model.hpp"
#include "json.hpp"

namespace csiauth::report {

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// "# tool=csiauth <version> config_hash=<..> dataset_digest=<..> seed=<..>"
std::string provenance_line(const harness::Provenance& p);

struct Table {
  std::string name;  // file name, e.g. "table2_metrics.csv"
  std::string csv;   // header comment + column row + data rows
};

struct GridTable {
  harness::SplitMode split_mode;
  std::size_t window_size = 0;
  std::string model;
  harness::GridResult result;
};

/// All report tables for a set of runs, in a fixed order. Contents depend
/// only on the runs and provenance, never on wall-clock time.
std::vector<Table> evaluation_tables(const std::vector<harness::RunResult>& runs,
                                     const harness::Provenance& provenance,
                                     const std::vector<GridTable>& grids = {});

/// SHA-256 over the tables' names and contents.
std::string tables_digest(const std::vector<Table>& tables);

/// Digest of one run's tables.
std::string run_digest(const harness::RunResult& run);

nlohmann::json run_json(const harness::RunResult& run);

/// Writes every table plus report.json (which carries a generated_at
/// timestamp outside the digest). Returns the digest.
std::string write_evaluation(const std::vector<harness::RunResult>& runs,
                             const harness::Provenance& provenance,
                             const std::vector<GridTable>& grids,
                             const std::filesystem::path& dir);

/// Feature matrix CSV: subject_id, acquisition, record, start, then features.
std::string features_csv(const FeatureMatrix& F, const harness::Provenance& provenance);
FeatureMatrix read_features_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace csiauth::report
