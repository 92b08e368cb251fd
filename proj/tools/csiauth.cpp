// SPDX-License-Identifier: Apache-2.0
// csiauth command-line front end: ingest, synth, features, evaluate.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csiauth/config.hpp"
#include "csiauth/digest.hpp"
#include "csiauth/harness.hpp"
#include "csiauth/ingest.hpp"
#include "csiauth/report.hpp"
#include "csiauth/synth.hpp"
#include "csiauth/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace csiauth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLeakage = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void print_error(const std::string& code, const std::string& message, const std::string& file = "") {
  nlohmann::json j = {{"error", code}, {"message", message}};
  if (!file.empty()) j["file"] = file;
  std::cerr << j.dump() << '\n';
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool print_config = false;
};

config::RunConfig load(const Globals& g) {
  config::RunConfig c = g.config_path.empty() ? config::default_config() : config::load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  config::validate(c);
  return c;
}

harness::Provenance provenance(const config::RunConfig& c, const Dataset& d) {
  harness::Provenance p;
  p.config_hash = config::config_hash(c);
  p.dataset_digest = dataset_digest(d);
  p.tool_version = std::string(kToolVersion);
  p.seed = c.seed;
  return p;
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  return g.out;
}

std::vector<std::pair<std::string, std::string>> manifest_provenance(const harness::Provenance& p) {
  return {{"tool_version", p.tool_version},
          {"config_hash", p.config_hash},
          {"dataset_digest", p.dataset_digest},
          {"seed", std::to_string(p.seed)}};
}

Dataset load_dataset(const std::string& dir, const config::RunConfig& c) {
  if (dir.empty()) return synth::generate_dataset(config::effective_scenario(c));
  return ingest::read_dataset_dir(dir);
}

// Subject id for a capture file: the stem up to the first '_' ("S01_3.pcap" -> "S01").
std::string subject_from_stem(const fs::path& p) {
  const std::string stem = p.stem().string();
  const auto cut = stem.find('_');
  return cut == std::string::npos ? stem : stem.substr(0, cut);
}

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string subject;
  std::string hand = "unspecified";
};

int cmd_ingest(const Globals& g, const IngestArgs& a) {
  if (a.inputs.empty()) throw UsageError("ingest: no input files");
  const config::RunConfig c = load(g);
  const fs::path out = require_out(g);
  const Hand hand = hand_from_string(a.hand);
  Dataset d;
  std::map<std::string, int> next_index;
  for (const auto& in : a.inputs) {
    try {
      const fs::path p(in);
      if (p.extension() == ".csiport") {
        auto rec = ingest::read_portable(p);
        d.records.push_back({std::move(rec.matrix), std::move(rec.label)});
        continue;
      }
      ingest::PcapSource src = c.ingest;
      src.path = p;
      auto parsed = ingest::parse_pcap(src);
      SubjectLabel label;
      label.subject_id = a.subject.empty() ? subject_from_stem(p) : a.subject;
      label.sample_index = next_index[label.subject_id]++;
      label.hand = hand;
      if (parsed.skipped_count > 0)
        std::cerr << in << ": skipped " << parsed.skipped_count << " frames\n";
      d.records.push_back({std::move(parsed.matrix), label});
    } catch (const Error& e) {
      print_error(std::string(to_string(e.code())), e.what(), in);
      return kExitRuntime;
    }
  }
  const auto prov = provenance(c, d);
  ingest::write_dataset_dir(d, out, manifest_provenance(prov));
  std::cout << "wrote " << d.records.size() << " records to " << out.string() << '\n';
  return kExitOk;
}

int cmd_synth(const Globals& g) {
  const config::RunConfig c = load(g);
  const fs::path out = require_out(g);
  const Dataset d = synth::generate_dataset(config::effective_scenario(c));
  const auto prov = provenance(c, d);
  ingest::write_dataset_dir(d, out, manifest_provenance(prov));
  std::cout << "wrote " << d.records.size() << " records to " << out.string()
            << " (dataset_digest " << prov.dataset_digest << ")\n";
  return kExitOk;
}

struct FeaturesArgs {
  std::string dataset;
  std::size_t window = 0;
};

int cmd_features(const Globals& g, const FeaturesArgs& a) {
  const config::RunConfig c = load(g);
  fs::path out = require_out(g);
  const Dataset d = load_dataset(a.dataset, c);
  const std::size_t w = a.window ? a.window : c.window_sizes.front();
  const auto cfg = config::protocol_for(c, w, c.split_modes.front());
  const FeatureMatrix F = harness::build_feature_matrix(d, cfg);
  if (fs::is_directory(out)) out /= "features.csv";
  report::write_text(out, report::features_csv(F, provenance(c, d)));
  std::cout << "wrote " << F.rows() << " x " << F.cols() << " feature matrix to " << out.string() << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string dataset;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
  const config::RunConfig c = load(g);
  const fs::path out = require_out(g);
  const Dataset d = load_dataset(a.dataset, c);
  const auto prov = provenance(c, d);
  const auto base_models = config::effective_models(c);

  std::vector<harness::RunResult> runs;
  std::vector<report::GridTable> grids;
  bool flagged = false;
  for (const std::size_t w : c.window_sizes) {
    for (const harness::SplitMode mode : c.split_modes) {
      const auto cfg = config::protocol_for(c, w, mode);
      const FeatureMatrix F = harness::build_feature_matrix(d, cfg);
      std::vector<classify::ModelSpec> models = base_models;
      for (auto& m : models) {
        const auto it = cfg.grids.find(std::string(classify::to_string(m.kind)));
        if (it == cfg.grids.end()) continue;
        auto gr = harness::grid_search_features(F, cfg, m.kind, it->second);
        m = gr.best;
        grids.push_back({mode, w, std::string(classify::to_string(m.kind)), std::move(gr)});
      }
      auto r = harness::run_cv_features(F, cfg, models);
      r.provenance = prov;
      if (r.leakage && r.leakage->flagged) flagged = true;
      std::cout << harness::to_string(mode) << " window=" << w;
      for (const auto& m : r.models)
        std::cout << "  " << m.name << ": accuracy " << m.report.aggregate.accuracy << " mean EER "
                  << m.report.mean_eer;
      std::cout << '\n';
      runs.push_back(std::move(r));
    }
  }
  const std::string digest = report::write_evaluation(runs, prov, grids, out);
  std::cout << "report digest " << digest << '\n';
  if (flagged) {
    print_error("LeakageFlagged", "leakage audit delta exceeds tolerance");
    return kExitLeakage;
  }
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_spec:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wi-Fi CSI biometric authentication evaluation toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(0, 1);

  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory (or file for features)");
  app.add_flag("--print-config", g.print_config, "Print the full effective configuration and exit");

  IngestArgs ia;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert pcap or .csiport captures into a dataset directory");
  ingest_cmd->add_option("inputs", ia.inputs, "Capture files");
  ingest_cmd->add_option("--subject", ia.subject, "Subject id for pcap inputs (default: file stem before '_')");
  ingest_cmd->add_option("--hand", ia.hand, "left, right or unspecified")
      ->check(CLI::IsMember({"left", "right", "unspecified"}));

  auto* synth_cmd = app.add_subcommand("synth", "Generate the configured synthetic scenario");

  FeaturesArgs fa;
  auto* features_cmd = app.add_subcommand("features", "Write the window feature matrix as CSV");
  features_cmd->add_option("dataset", fa.dataset, "Dataset directory (default: synthesize from config)");
  features_cmd->add_option("--window", fa.window, "Window size (default: first configured)");

  EvaluateArgs ea;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the evaluation protocol and write reports");
  evaluate_cmd->add_option("dataset", ea.dataset, "Dataset directory (default: synthesize from config)");

  for (auto* sub : {ingest_cmd, synth_cmd, features_cmd, evaluate_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return kExitUsage;
  }

  try {
    if (g.print_config) {
      std::cout << config::to_json(load(g)).dump(2) << '\n';
      return kExitOk;
    }
    if (*ingest_cmd) return cmd_ingest(g, ia);
    if (*synth_cmd) return cmd_synth(g);
    if (*features_cmd) return cmd_features(g, fa);
    if (*evaluate_cmd) return cmd_evaluate(g, ea);
    print_error("UsageError", "a subcommand is required (ingest, synth, features, evaluate)");
    return kExitUsage;
  } catch (const UsageError& e) {
    print_error("UsageError", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(std::string(to_string(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    print_error("InvalidConfig", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error("RuntimeError", e.what());
    return kExitRuntime;
  }
}
