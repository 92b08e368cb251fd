// SPDX-License-Identifier: Apache-2.0
#include "csiauth/config.hpp"

#include <fstream>
#include <set>

#include "csiauth/digest.hpp"

namespace csiauth::config {
namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::invalid_config, msg); }

// Strict view over one JSON object: every key must be consumed.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      invalid(path_ + "." + key + ": " + e.what());
    }
  }

  const Json* sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string at(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.contains(item.key())) invalid("unknown key " + path_ + "." + item.key());
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string_view scope_name(calib::OffsetScope s) {
  return s == calib::OffsetScope::global ? "global" : "per_sample";
}

calib::OffsetScope scope_from(const std::string& s) {
  if (s == "per_sample") return calib::OffsetScope::per_sample;
  if (s == "global") return calib::OffsetScope::global;
  invalid("unknown cfo_scope '" + s + "'");
}

template <typename F>
auto wrap(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_config) throw;
    throw Error(ErrorCode::invalid_config, e.what());
  }
}

Json channel_json(const synth::ChannelSpec& c) {
  Json paths = Json::array();
  for (const auto& p : c.paths) paths.push_back({{"gain", p.gain}, {"phase", p.phase}, {"delay", p.delay}});
  return {{"paths", paths},
          {"noise_sigma", c.noise_sigma},
          {"cfo_offset", c.cfo_offset},
          {"sfo_slope", c.sfo_slope},
          {"temporal_jitter_sigma", c.temporal_jitter_sigma},
          {"seed", c.seed}};
}

synth::ChannelSpec channel_from(const Json& j, const std::string& path) {
  synth::ChannelSpec c;
  Obj o(j, path);
  if (const Json* paths = o.sub("paths")) {
    if (!paths->is_array()) invalid(path + ".paths must be an array");
    for (std::size_t i = 0; i < paths->size(); ++i) {
      Obj po((*paths)[i], path + ".paths[" + std::to_string(i) + "]");
      synth::PathSpec p;
      po.get("gain", p.gain);
      po.get("phase", p.phase);
      po.get("delay", p.delay);
      po.finish();
      c.paths.push_back(p);
    }
  }
  o.get("noise_sigma", c.noise_sigma);
  o.get("cfo_offset", c.cfo_offset);
  o.get("sfo_slope", c.sfo_slope);
  o.get("temporal_jitter_sigma", c.temporal_jitter_sigma);
  o.get("seed", c.seed);
  o.finish();
  return c;
}

synth::SubjectGenerator effective_generator(const RunConfig& c) {
  synth::SubjectGenerator g = *c.generator;
  if (!c.generator_seed_explicit) g.seed = c.seed;
  return g;
}

Json generator_json(const synth::SubjectGenerator& g) {
  return {{"subjects", g.subjects},   {"paths", g.paths},
          {"gain_min", g.gain_min},   {"gain_max", g.gain_max},
          {"delay_min", g.delay_min}, {"delay_max", g.delay_max},
          {"noise_sigma", g.noise_sigma}, {"temporal_jitter_sigma", g.temporal_jitter_sigma},
          {"cfo_max", g.cfo_max},     {"sfo_max", g.sfo_max},
          {"seed", g.seed},           {"id_prefix", g.id_prefix}};
}

Json model_json(const classify::ModelSpec& m) {
  Json hp = Json::object();
  for (const auto& [name, value] : classify::default_hyperparams(m.kind)) {
    (void)value;
    hp[name] = m.param(name);
  }
  return {{"kind", std::string(classify::to_string(m.kind))}, {"hyperparams", hp}};
}

classify::ModelSpec model_from(const Json& j, const std::string& path) {
  Obj o(j, path);
  std::string kind;
  o.get("kind", kind);
  if (kind.empty()) invalid(path + ".kind is required");
  classify::ModelSpec m;
  m.kind = wrap([&] { return classify::model_kind_from_string(kind); });
  o.get("hyperparams", m.hyperparams);
  o.finish();
  wrap([&] {
    classify::validate(m);
    return 0;
  });
  return m;
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.models.resize(2);
  c.models[0].kind = classify::ModelKind::random_forest;
  c.models[1].kind = classify::ModelKind::knn;
  c.generator = synth::SubjectGenerator{};
  return c;
}

RunConfig from_json(const Json& j) {
  RunConfig c = default_config();
  Obj root(j, "config");
  root.get("seed", c.seed);

  if (const Json* sj = root.sub("scenario")) {
    Obj s(*sj, "scenario");
    auto& sc = c.scenario;
    s.get("samples_per_subject", sc.samples_per_subject);
    s.get("samples", sc.samples);
    s.get("subcarriers", sc.subcarriers);
    s.get("freq_start", sc.freq_start);
    s.get("freq_step", sc.freq_step);
    std::string hand = std::string(to_string(sc.hand));
    s.get("hand", hand);
    sc.hand = wrap([&] { return hand_from_string(hand); });
    if (const Json* subs = s.sub("subjects")) {
      if (!subs->is_array()) invalid("scenario.subjects must be an array");
      for (std::size_t i = 0; i < subs->size(); ++i) {
        const std::string p = "scenario.subjects[" + std::to_string(i) + "]";
        Obj so((*subs)[i], p);
        synth::SubjectSpec subj;
        so.get("id", subj.subject_id);
        if (const Json* ch = so.sub("channel")) subj.channel = channel_from(*ch, p + ".channel");
        so.finish();
        sc.subjects.push_back(std::move(subj));
      }
      // Explicit subjects replace the default generator.
      if (!sc.subjects.empty() && !s.sub("generator")) c.generator.reset();
    }
    if (const Json* gj = s.sub("generator")) {
      Obj go(*gj, "scenario.generator");
      synth::SubjectGenerator g;
      go.get("subjects", g.subjects);
      go.get("paths", g.paths);
      go.get("gain_min", g.gain_min);
      go.get("gain_max", g.gain_max);
      go.get("delay_min", g.delay_min);
      go.get("delay_max", g.delay_max);
      go.get("noise_sigma", g.noise_sigma);
      go.get("temporal_jitter_sigma", g.temporal_jitter_sigma);
      go.get("cfo_max", g.cfo_max);
      go.get("sfo_max", g.sfo_max);
      c.generator_seed_explicit = gj->contains("seed");
      go.get("seed", g.seed);
      go.get("id_prefix", g.id_prefix);
      go.finish();
      c.generator = g;
    }
    if (const Json* aj = s.sub("attack")) {
      Obj ao(*aj, "scenario.attack");
      std::string kind = "none";
      ao.get("kind", kind);
      sc.attack.kind = wrap([&] { return synth::attack_kind_from_string(kind); });
      ao.get("parameter", sc.attack.parameter);
      ao.get("victim", sc.attack.victim);
      ao.get("records", sc.attack.records);
      ao.get("seed", sc.attack.seed);
      ao.finish();
    }
    s.finish();
  }

  if (const Json* pj = root.sub("protocol")) {
    Obj p(*pj, "protocol");
    auto& pc = c.protocol;
    p.get("window_sizes", c.window_sizes);
    p.get("window_stride", pc.window_stride);
    p.get("folds", pc.folds);
    std::vector<std::string> modes;
    p.get("split_modes", modes);
    if (pj->contains("split_modes")) {
      c.split_modes.clear();
      for (const auto& m : modes) c.split_modes.push_back(harness::split_mode_from_string(m));
    }
    std::string norm(harness::to_string(pc.normalization));
    p.get("normalization", norm);
    pc.normalization = harness::normalization_from_string(norm);
    p.get("selection_k", pc.selection_k);
    p.get("selection_bins", pc.selection_bins);
    std::vector<std::string> hands;
    p.get("hands", hands);
    if (pj->contains("hands")) {
      pc.hands.clear();
      for (const auto& h : hands) pc.hands.insert(wrap([&] { return hand_from_string(h); }));
    }
    if (const Json* prj = p.sub("preprocess")) {
      Obj po(*prj, "protocol.preprocess");
      po.get("calibrate", pc.preprocess.calibrate);
      std::string scope(scope_name(pc.preprocess.cfo_scope));
      po.get("cfo_scope", scope);
      pc.preprocess.cfo_scope = scope_from(scope);
      po.get("iqr_filter", pc.preprocess.iqr_filter);
      po.get("mad_repair", pc.preprocess.mad_repair);
      po.get("mad_window", pc.preprocess.mad_window);
      po.finish();
    }
    if (const Json* fj = p.sub("features")) {
      Obj fo(*fj, "protocol.features");
      std::vector<std::string> groups;
      fo.get("groups", groups);
      if (fj->contains("groups")) {
        pc.features.enabled_groups.clear();
        for (const auto& g : groups)
          pc.features.enabled_groups.insert(wrap([&] { return features::group_from_string(g); }));
      }
      fo.get("epsilon", pc.features.epsilon);
      fo.finish();
    }
    if (const Json* rj = p.sub("report")) {
      Obj ro(*rj, "protocol.report");
      ro.get("fcs_bins", pc.report.fcs_bins);
      if (const Json* bj = ro.sub("bioquake")) {
        Obj bo(*bj, "protocol.report.bioquake");
        bo.get("resamples", pc.report.bioquake.resamples);
        bo.get("ci", pc.report.bioquake.ci);
        bo.finish();
      }
      ro.finish();
    }
    p.get("audit_model", pc.audit_model);
    p.get("leakage_tolerance", pc.leakage_tolerance);
    if (const Json* mj = p.sub("models")) {
      if (!mj->is_array() || mj->empty()) invalid("protocol.models must be a non-empty array");
      c.models.clear();
      for (std::size_t i = 0; i < mj->size(); ++i)
        c.models.push_back(model_from((*mj)[i], "protocol.models[" + std::to_string(i) + "]"));
    }
    p.get("grids", pc.grids);
    p.finish();
  }

  if (const Json* ij = root.sub("ingest")) {
    Obj io(*ij, "ingest");
    auto& src = c.ingest;
    io.get("udp_port", src.udp_port);
    io.get("expected_subcarriers", src.expected_subcarriers);
    io.get("default_center_hz", src.default_center_hz);
    io.get("default_bandwidth_hz", src.default_bandwidth_hz);
    if (const Json* lj = io.sub("layout")) {
      Obj lo(*lj, "ingest.layout");
      auto& l = src.layout;
      lo.get("magic", l.magic);
      lo.get("magic_offset", l.magic_offset);
      lo.get("rssi_offset", l.rssi_offset);
      lo.get("frame_control_offset", l.frame_control_offset);
      lo.get("source_mac_offset", l.source_mac_offset);
      lo.get("sequence_offset", l.sequence_offset);
      lo.get("core_spatial_offset", l.core_spatial_offset);
      lo.get("chanspec_offset", l.chanspec_offset);
      lo.get("chip_version_offset", l.chip_version_offset);
      lo.get("csi_offset", l.csi_offset);
      lo.get("fft_shift", l.fft_shift);
      lo.finish();
    }
    io.finish();
  }
  root.finish();
  validate(c);
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["seed"] = c.seed;
  const auto& sc = c.scenario;
  Json s = {{"samples_per_subject", sc.samples_per_subject},
            {"samples", sc.samples},
            {"subcarriers", sc.subcarriers},
            {"freq_start", sc.freq_start},
            {"freq_step", sc.freq_step},
            {"hand", std::string(to_string(sc.hand))}};
  Json subjects = Json::array();
  for (const auto& subj : sc.subjects)
    subjects.push_back({{"id", subj.subject_id}, {"channel", channel_json(subj.channel)}});
  s["subjects"] = subjects;
  if (c.generator) s["generator"] = generator_json(effective_generator(c));
  s["attack"] = {{"kind", std::string(synth::to_string(sc.attack.kind))},
                 {"parameter", sc.attack.parameter},
                 {"victim", sc.attack.victim},
                 {"records", sc.attack.records},
                 {"seed", sc.attack.seed}};
  j["scenario"] = s;

  const auto& pc = c.protocol;
  Json modes = Json::array();
  for (auto m : c.split_modes) modes.push_back(std::string(harness::to_string(m)));
  Json hands = Json::array();
  for (auto h : pc.hands) hands.push_back(std::string(to_string(h)));
  Json groups = Json::array();
  for (auto g : features::all_groups())
    if (pc.features.enabled_groups.contains(g)) groups.push_back(std::string(features::to_string(g)));
  Json models = Json::array();
  for (const auto& m : c.models) models.push_back(model_json(m));
  j["protocol"] = {
      {"window_sizes", c.window_sizes},
      {"window_stride", pc.window_stride},
      {"folds", pc.folds},
      {"split_modes", modes},
      {"normalization", std::string(harness::to_string(pc.normalization))},
      {"selection_k", pc.selection_k},
      {"selection_bins", pc.selection_bins},
      {"hands", hands},
      {"preprocess",
       {{"calibrate", pc.preprocess.calibrate},
        {"cfo_scope", std::string(scope_name(pc.preprocess.cfo_scope))},
        {"iqr_filter", pc.preprocess.iqr_filter},
        {"mad_repair", pc.preprocess.mad_repair},
        {"mad_window", pc.preprocess.mad_window}}},
      {"features", {{"groups", groups}, {"epsilon", pc.features.epsilon}}},
      {"report",
       {{"fcs_bins", pc.report.fcs_bins},
        {"bioquake", {{"resamples", pc.report.bioquake.resamples}, {"ci", pc.report.bioquake.ci}}}}},
      {"audit_model", pc.audit_model},
      {"leakage_tolerance", pc.leakage_tolerance},
      {"models", models},
      {"grids", pc.grids},
  };
  const auto& src = c.ingest;
  const auto& l = src.layout;
  j["ingest"] = {{"udp_port", src.udp_port},
                 {"expected_subcarriers", src.expected_subcarriers},
                 {"default_center_hz", src.default_center_hz},
                 {"default_bandwidth_hz", src.default_bandwidth_hz},
                 {"layout",
                  {{"magic", l.magic},
                   {"magic_offset", l.magic_offset},
                   {"rssi_offset", l.rssi_offset},
                   {"frame_control_offset", l.frame_control_offset},
                   {"source_mac_offset", l.source_mac_offset},
                   {"sequence_offset", l.sequence_offset},
                   {"core_spatial_offset", l.core_spatial_offset},
                   {"chanspec_offset", l.chanspec_offset},
                   {"chip_version_offset", l.chip_version_offset},
                   {"csi_offset", l.csi_offset},
                   {"fft_shift", l.fft_shift}}}};
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    invalid(path.string() + ": " + e.what());
  }
  return from_json(j);
}

void validate(const RunConfig& c) {
  if (c.window_sizes.empty()) invalid("protocol.window_sizes must not be empty");
  if (c.split_modes.empty()) invalid("protocol.split_modes must not be empty");
  if (c.models.empty()) invalid("protocol.models must not be empty");
  if (c.generator && !c.scenario.subjects.empty())
    invalid("scenario.subjects and scenario.generator are mutually exclusive");
  wrap([&] {
    for (std::size_t w : c.window_sizes) harness::validate(protocol_for(c, w, c.split_modes.front()));
    for (const auto& m : c.models) classify::validate(m);
    if (c.generator) synth::validate(*c.generator);
    return 0;
  });
}

std::string config_hash(const RunConfig& c) { return sha256_hex(to_json(c).dump()); }

synth::ScenarioSpec effective_scenario(const RunConfig& c) {
  synth::ScenarioSpec s = c.scenario;
  if (c.generator) s.subjects = synth::generate_subjects(effective_generator(c));
  return s;
}

harness::ProtocolConfig protocol_for(const RunConfig& c, std::size_t window_size,
                                     harness::SplitMode mode) {
  harness::ProtocolConfig p = c.protocol;
  p.window_size = window_size;
  p.split_mode = mode;
  p.seed = c.seed;
  p.report.bioquake.seed = c.seed;
  return p;
}

std::vector<classify::ModelSpec> effective_models(const RunConfig& c) {
  auto models = c.models;
  for (auto& m : models) m.seed = c.seed;
  return models;
}

}  // namespace csiauth::config
