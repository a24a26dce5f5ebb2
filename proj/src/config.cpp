#include <fstream>
#include <sstream>

#include "diar/io.hpp"
#include "json.hpp"

namespace diar {

using nlohmann::json;

const std::vector<Preset>& known_presets() {
  // published operating points: TTSF pairs with GPLDA scoring, MSCS with
  // cosine; the numbers are the tuned (alpha, delta, gamma) per N
  static const std::vector<Preset> presets = {
      {"ttsf-n200", 3.2, 1.3, 0.9, 200, ScorerKind::kGplda},
      {"ttsf-n50", 2.6, 1.3, 0.9, 50, ScorerKind::kGplda},
      {"mscs-gue-n200", 0.3, 4.5, 1.1, 200, ScorerKind::kCosine},
      {"mscs-tae-n200", 0.3, 4.5, 1.1, 200, ScorerKind::kCosine},
      {"mscs-tee-n200", 0.3, 3.9, 1.1, 200, ScorerKind::kCosine},
      {"mscs-gue-n50", 0.3, 0.9, 1.1, 50, ScorerKind::kCosine},
      {"mscs-tae-n50", 0.3, 0.9, 1.3, 50, ScorerKind::kCosine},
      {"mscs-tee-n50", 0.3, 0.5, 1.3, 50, ScorerKind::kCosine},
  };
  return presets;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& preset : known_presets()) {
    if (preset.name == name) return &preset;
    if (preset.name == "mscs-" + name) return &preset;  // "gue-n200" shorthand
  }
  return nullptr;
}

namespace {

void reject_unknown_keys(const json& obj, const std::string& prefix,
                         std::initializer_list<const char*> allowed,
                         const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known)
      throw ConfigError(path + ": unknown key " + prefix + "." + key);
  }
}

double get_number(const json& obj, const char* key, double fallback,
                  const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError(path + ": $." + std::string(key) + " must be a number");
  return obj[key].get<double>();
}

}  // namespace

LoadedConfig parse_config(const std::string& json_text, const std::string& path) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path + ": top level must be an object");

  reject_unknown_keys(doc, "$",
                      {"mode", "preset", "N", "scorer", "extractor", "K", "alpha",
                       "delta", "gamma", "tick", "vad_factor", "frame"},
                      path);

  LoadedConfig out;

  if (doc.contains("mode")) {
    const std::string mode = doc["mode"].get<std::string>();
    if (mode == "fixed")
      out.mode = PipelineMode::kFixed;
    else if (mode == "changepoint")
      out.mode = PipelineMode::kChangePoint;
    else
      throw ConfigError(path + ": $.mode must be 'fixed' or 'changepoint'");
  }

  const Preset* preset = nullptr;
  if (doc.contains("preset")) {
    const std::string name = doc["preset"].get<std::string>();
    preset = find_preset(name);
    if (!preset) throw ConfigError(path + ": unknown preset '" + name + "'");
  }

  long window_len = preset ? preset->window_len : 200;
  if (doc.contains("N")) {
    if (!doc["N"].is_number_integer() || doc["N"].get<long>() < 1)
      throw ConfigError(path + ": $.N must be a positive integer");
    window_len = doc["N"].get<long>();
  }
  out.pipeline.window_len = window_len;

  // default change-point parameters come from the preset, or from the TTSF
  // family matching this N when no preset was named
  if (!preset) preset = find_preset(window_len <= 100 ? "ttsf-n50" : "ttsf-n200");
  out.pipeline.change_point.alpha = get_number(doc, "alpha", preset->alpha, path);
  out.pipeline.change_point.delta = get_number(doc, "delta", preset->delta, path);
  out.pipeline.change_point.gamma = get_number(doc, "gamma", preset->gamma, path);
  out.pipeline.change_point.window_len = window_len;
  out.pipeline.change_point.validate();

  out.pipeline.scorer = preset->scorer;
  if (doc.contains("scorer"))
    out.pipeline.scorer = scorer_kind_from_string(doc["scorer"].get<std::string>());

  if (doc.contains("extractor")) {
    const json& ext = doc["extractor"];
    if (!ext.is_object()) throw ConfigError(path + ": $.extractor must be an object");
    reject_unknown_keys(ext, "$.extractor", {"kind", "dim", "seed"}, path);
    if (ext.contains("kind"))
      out.pipeline.extractor =
          extractor_kind_from_string(ext["kind"].get<std::string>());
    if (ext.contains("dim")) out.pipeline.extractor_dim = ext["dim"].get<long>();
    if (ext.contains("seed"))
      out.pipeline.extractor_seed = ext["seed"].get<std::uint64_t>();
  }

  if (doc.contains("K")) {
    out.pipeline.num_clusters = doc["K"].get<int>();
    if (out.pipeline.num_clusters < 1)
      throw ConfigError(path + ": $.K must be >= 1");
  }
  out.pipeline.tick = get_number(doc, "tick", 0.2, path);
  out.pipeline.vad_factor = get_number(doc, "vad_factor", 0.06, path);
  if (out.pipeline.vad_factor <= 0.0)
    throw ConfigError(path + ": $.vad_factor must be positive");

  if (doc.contains("frame")) {
    const json& frame = doc["frame"];
    reject_unknown_keys(frame, "$.frame", {"frame_len", "frame_shift"}, path);
    out.frame.frame_len = get_number(frame, "frame_len", 0.020, path);
    out.frame.frame_shift = get_number(frame, "frame_shift", 0.010, path);
  }
  out.frame.validate();

  // effective config echo, every default filled in
  json echo;
  echo["mode"] = out.mode == PipelineMode::kFixed ? "fixed" : "changepoint";
  echo["N"] = out.pipeline.window_len;
  echo["scorer"] = to_string(out.pipeline.scorer);
  echo["extractor"] = {{"kind", to_string(out.pipeline.extractor)},
                       {"dim", out.pipeline.extractor_dim},
                       {"seed", out.pipeline.extractor_seed}};
  echo["K"] = out.pipeline.num_clusters;
  echo["alpha"] = out.pipeline.change_point.alpha;
  echo["delta"] = out.pipeline.change_point.delta;
  echo["gamma"] = out.pipeline.change_point.gamma;
  echo["tick"] = out.pipeline.tick;
  echo["vad_factor"] = out.pipeline.vad_factor;
  echo["frame"] = {{"frame_len", out.frame.frame_len},
                   {"frame_shift", out.frame.frame_shift}};
  out.effective_json = echo.dump(2);
  return out;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace diar
