#include "diar/corpus.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "diar/rng.hpp"
#include "json.hpp"

namespace diar {

using nlohmann::json;

void CorpusSpec::validate() const {
  if (n_classes < 2) throw ConfigError("corpus: need at least 2 classes");
  if (feature_dim < 1) throw ConfigError("corpus: feature_dim must be >= 1");
  if (separation < 0.0) throw ConfigError("corpus: separation must be >= 0");
  if (frame_shift <= 0.0) throw ConfigError("corpus: frame_shift must be positive");
  if (target_duration <= 0.0)
    throw ConfigError("corpus: target_duration would yield zero segments");
  if (imbalance <= 0.0) throw ConfigError("corpus: imbalance must be positive");
  if (!classes.empty() && static_cast<int>(classes.size()) != n_classes)
    throw ConfigError("corpus: classes list does not match n_classes");
  for (const auto& cls : classes) {
    if (cls.duration.median <= 0.0) throw ConfigError("corpus: duration median must be positive");
    if (cls.duration.log_sigma < 0.0) throw ConfigError("corpus: log_sigma must be >= 0");
  }
  if (has_silence && silence.median <= 0.0)
    throw ConfigError("corpus: silence median must be positive");
  if (switch_model == SwitchModel::kMarkov) {
    if (static_cast<int>(stay_prob.size()) != n_classes)
      throw ConfigError("corpus: stay_prob must list one probability per class");
    for (double p : stay_prob)
      if (p < 0.0 || p >= 1.0)
        throw ConfigError("corpus: stay probabilities must be in [0, 1)");
  }
}

void CorpusSpec::finalize() {
  if (classes.empty()) {
    classes.resize(n_classes);
    for (auto& cls : classes) cls.duration = DurationModel{3.0, 0.5};
  }
  for (int c = 0; c < n_classes; ++c) {
    auto& cls = classes[c];
    if (cls.mean.size() == 0) {
      // antipodal pairs along successive axes, separation apart (Mahalanobis
      // with identity covariance)
      cls.mean = Vector::Zero(feature_dim);
      const int axis = (c / 2) % feature_dim;
      cls.mean[axis] = (c % 2 == 0 ? 0.5 : -0.5) * separation;
    }
    if (cls.covariance.size() == 0)
      cls.covariance = Matrix::Identity(cls.mean.size(), cls.mean.size());
  }
  validate();
}

CorpusSpec CorpusSpec::ttsf_preset() {
  CorpusSpec spec;
  spec.n_classes = 2;
  spec.feature_dim = 8;
  spec.separation = 6.0;
  spec.classes.resize(2);
  spec.classes[0].duration = DurationModel{3.0, 0.5};
  spec.classes[1].duration = DurationModel{3.0, 0.5};
  spec.switch_model = SwitchModel::kAlternating;
  spec.has_silence = false;
  spec.imbalance = 1.0;
  spec.target_duration = 20.0;
  return spec;
}

CorpusSpec CorpusSpec::mscs_preset() {
  CorpusSpec spec;
  spec.n_classes = 2;
  spec.feature_dim = 8;
  spec.separation = 6.0;
  spec.classes.resize(2);
  // log-normal mean = median * exp(sigma^2/2); medians chosen so the means
  // land on 1.5 s (primary) and 0.5 s (secondary)
  spec.classes[0].duration = DurationModel{1.5 / std::exp(0.125), 0.5};
  spec.classes[1].duration = DurationModel{0.5 / std::exp(0.125), 0.5};
  spec.switch_model = SwitchModel::kMarkov;
  // primary may repeat (across a silence gap); 0.25 restores the 4:1 time
  // ratio that strict alternation with these means would miss
  spec.stay_prob = {0.25, 0.0};
  spec.has_silence = true;
  spec.silence = DurationModel{0.15, 0.4};
  spec.imbalance = 4.0;
  spec.target_duration = 15.0;
  return spec;
}

namespace {

struct DrawnSegment {
  int label;
  long n_frames;
  long gap_frames;  // silence before this segment
};

}  // namespace

SynthUtterance synth_utterance(const CorpusSpec& raw_spec, std::uint64_t seed) {
  CorpusSpec spec = raw_spec;
  spec.finalize();

  rng::Xoshiro256ss layout_rng = rng::Xoshiro256ss::stream(seed, 0);
  rng::Xoshiro256ss feature_rng = rng::Xoshiro256ss::stream(seed, 1);
  rng::Xoshiro256ss energy_rng = rng::Xoshiro256ss::stream(seed, 2);

  // 1) layout: labels, durations and gaps on the frame grid
  std::vector<DrawnSegment> drawn;
  double speech = 0.0;
  int label = 0;
  while (speech < spec.target_duration || drawn.empty()) {
    DrawnSegment seg;
    seg.label = label;
    const auto& model = spec.classes[label].duration;
    const double dur = layout_rng.next_lognormal(model.median, model.log_sigma);
    seg.n_frames = std::max<long>(1, std::lround(dur / spec.frame_shift));
    seg.gap_frames = 0;
    if (spec.has_silence && !drawn.empty()) {
      const double gap = layout_rng.next_lognormal(spec.silence.median,
                                                   spec.silence.log_sigma);
      seg.gap_frames = std::max<long>(0, std::lround(gap / spec.frame_shift));
    }
    drawn.push_back(seg);
    speech += seg.n_frames * spec.frame_shift;

    if (spec.switch_model == SwitchModel::kAlternating) {
      label = (label + 1) % spec.n_classes;
    } else {
      if (layout_rng.next_double() < spec.stay_prob[label]) {
        // stay
      } else {
        int other = static_cast<int>(layout_rng.next_below(spec.n_classes - 1));
        if (other >= label) ++other;
        label = other;
      }
    }
  }
  if (drawn.empty()) throw DataError("corpus spec yielded zero segments");

  // 2) frame labels (-1 = silence) and independently recorded change times
  std::vector<int> frame_labels;
  std::vector<double> change_times;
  int prev_label = -1;
  for (const auto& seg : drawn) {
    for (long g = 0; g < seg.gap_frames; ++g) frame_labels.push_back(-1);
    const double onset = frame_labels.size() * spec.frame_shift;
    if (prev_label >= 0 && seg.label != prev_label) change_times.push_back(onset);
    for (long f = 0; f < seg.n_frames; ++f) frame_labels.push_back(seg.label);
    prev_label = seg.label;
  }
  const long total_frames = static_cast<long>(frame_labels.size());

  // 3) features and energies
  std::vector<Eigen::LLT<Matrix>> chol;
  chol.reserve(spec.classes.size());
  for (const auto& cls : spec.classes) {
    Matrix cov = cls.covariance;
    cov.diagonal().array() += 1e-12;
    chol.emplace_back(cov);
    if (chol.back().info() != Eigen::Success)
      throw ConfigError("corpus: class covariance is not PSD");
  }

  const long dim = spec.classes[0].mean.size();
  SynthUtterance utt;
  utt.features.features.resize(total_frames, dim);
  utt.features.frame_starts.resize(total_frames);
  utt.features.energies.resize(total_frames);
  utt.features.voiced_mask.assign(total_frames, true);
  utt.features.spec.frame_len = spec.frame_shift;
  utt.features.spec.frame_shift = spec.frame_shift;

  Vector z(dim);
  for (long f = 0; f < total_frames; ++f) {
    utt.features.frame_starts[f] = f * spec.frame_shift;
    for (long c = 0; c < dim; ++c) z[c] = feature_rng.next_normal();
    const int fl = frame_labels[f];
    if (fl >= 0) {
      utt.features.features.row(f) =
          (spec.classes[fl].mean + chol[fl].matrixL() * z).transpose();
      utt.features.energies[f] = std::exp(0.1 * energy_rng.next_normal());
    } else {
      utt.features.features.row(f) = (0.1 * z).transpose();
      utt.features.energies[f] = 1e-4 * std::exp(0.3 * energy_rng.next_normal());
    }
  }

  // 4) reference from the frame labels (exact grid tiling)
  std::vector<Segment> ref_segments;
  long run_start = -1;
  for (long f = 0; f <= total_frames; ++f) {
    const int cur = f < total_frames ? frame_labels[f] : -1;
    const int prev = run_start >= 0 ? frame_labels[run_start] : -1;
    if (run_start >= 0 && cur != prev) {
      Segment seg;
      seg.onset = run_start * spec.frame_shift;
      seg.duration = (f - run_start) * spec.frame_shift;
      seg.label = prev;
      ref_segments.push_back(seg);
      run_start = -1;
    }
    if (cur >= 0 && run_start < 0) run_start = f;
  }
  utt.reference = Diarization::from_segments("", std::move(ref_segments));
  utt.change_times = std::move(change_times);
  return utt;
}

SynthCorpus synth_corpus(const CorpusSpec& spec, int n_utterances) {
  if (n_utterances < 1) throw ConfigError("corpus: need at least one utterance");
  CorpusSpec finalized = spec;
  finalized.finalize();

  SynthCorpus corpus;
  corpus.utterances.reserve(n_utterances);
  for (int i = 0; i < n_utterances; ++i) {
    SynthUtterance utt = synth_utterance(finalized, finalized.seed + i);
    char id[16];
    std::snprintf(id, sizeof(id), "utt%04d", i);
    utt.reference.utterance_id = id;

    CorpusManifestEntry entry;
    entry.id = id;
    entry.duration = utt.features.frame_starts.back() + finalized.frame_shift;
    entry.class_time.assign(finalized.n_classes, 0.0);
    for (const auto& seg : utt.reference.segments)
      entry.class_time[seg.label] += seg.duration;
    corpus.manifest.push_back(std::move(entry));
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

CorpusSpec parse_corpus_spec(const std::string& json_text, const std::string& path) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path + ": top level must be an object");

  for (const auto& [key, value] : doc.items()) {
    static const char* allowed[] = {"preset",    "n_classes",  "dim",
                                    "separation", "classes",   "switch",
                                    "silence",   "imbalance",  "frame_shift",
                                    "target_duration", "seed"};
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(path + ": unknown key $." + key);
  }

  CorpusSpec spec;
  if (doc.contains("preset")) {
    const std::string preset = doc["preset"].get<std::string>();
    if (preset == "ttsf")
      spec = CorpusSpec::ttsf_preset();
    else if (preset == "mscs")
      spec = CorpusSpec::mscs_preset();
    else
      throw ConfigError(path + ": unknown corpus preset '" + preset + "'");
  }

  if (doc.contains("n_classes")) spec.n_classes = doc["n_classes"].get<int>();
  if (doc.contains("dim")) spec.feature_dim = doc["dim"].get<long>();
  if (doc.contains("separation")) spec.separation = doc["separation"].get<double>();
  if (doc.contains("imbalance")) spec.imbalance = doc["imbalance"].get<double>();
  if (doc.contains("frame_shift")) spec.frame_shift = doc["frame_shift"].get<double>();
  if (doc.contains("target_duration"))
    spec.target_duration = doc["target_duration"].get<double>();
  if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();

  if (doc.contains("classes")) {
    if (!doc["classes"].is_array())
      throw ConfigError(path + ": $.classes must be an array");
    spec.classes.clear();
    for (const auto& item : doc["classes"]) {
      ClassModel cls;
      cls.duration.median = item.at("median").get<double>();
      cls.duration.log_sigma = item.value("log_sigma", 0.5);
      spec.classes.push_back(std::move(cls));
    }
    spec.n_classes = static_cast<int>(spec.classes.size());
  }

  if (doc.contains("switch")) {
    const json& sw = doc["switch"];
    const std::string model = sw.at("model").get<std::string>();
    if (model == "alternating") {
      spec.switch_model = SwitchModel::kAlternating;
    } else if (model == "markov") {
      spec.switch_model = SwitchModel::kMarkov;
      spec.stay_prob = sw.at("stay_prob").get<std::vector<double>>();
    } else {
      throw ConfigError(path + ": $.switch.model must be 'alternating' or 'markov'");
    }
  }

  if (doc.contains("silence")) {
    if (doc["silence"].is_null()) {
      spec.has_silence = false;
    } else {
      spec.has_silence = true;
      spec.silence.median = doc["silence"].at("median").get<double>();
      spec.silence.log_sigma = doc["silence"].value("log_sigma", 0.4);
    }
  }

  spec.finalize();
  return spec;
}

CorpusSpec load_corpus_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus_spec(buffer.str(), path);
}

}  // namespace diar
