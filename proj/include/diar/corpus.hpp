#ifndef DIAR_CORPUS_HPP
#define DIAR_CORPUS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "diar/common.hpp"
#include "diar/diarize.hpp"
#include "diar/features.hpp"

namespace diar {

/// Log-normal duration model, parameterized by median and log-domain sigma.
struct DurationModel {
  double median = 3.0;
  double log_sigma = 0.5;
};

/// Class-conditional Gaussian over feature space.
struct ClassModel {
  DurationModel duration;
  Vector mean;
  Matrix covariance;  // PSD
};

enum class SwitchModel { kAlternating, kMarkov };

/// Feature-level synthetic code-switched utterance generator. Two presets
/// reproduce the duration regimes: "ttsf" (long, balanced segments) and
/// "mscs" (short secondary segments, 4:1 time imbalance, silence gaps).
struct CorpusSpec {
  int n_classes = 2;
  long feature_dim = 8;
  double separation = 6.0;  // Mahalanobis distance between class means
  std::vector<ClassModel> classes;  // built from separation when empty
  SwitchModel switch_model = SwitchModel::kAlternating;
  std::vector<double> stay_prob;  // per class, Markov only
  bool has_silence = false;
  DurationModel silence;
  double imbalance = 1.0;  // expected primary:secondary time ratio, manifest metadata
  double frame_shift = 0.01;
  double target_duration = 20.0;  // draw segments until speech reaches this
  std::uint64_t seed = 1;

  void validate() const;
  /// Fills `classes` from (feature_dim, separation) when not explicitly set.
  void finalize();

  static CorpusSpec ttsf_preset();
  static CorpusSpec mscs_preset();
};

struct SynthUtterance {
  FeatureSequence features;
  Diarization reference;
  std::vector<double> change_times;
};

/// Deterministic per (spec, seed). Segment labels from the switch model,
/// durations from the class duration models, frames i.i.d. from the class
/// Gaussians at frame_shift resolution; silence frames carry near-zero
/// energy so the 0.06 energy VAD removes them.
SynthUtterance synth_utterance(const CorpusSpec& spec, std::uint64_t seed);

struct CorpusManifestEntry {
  std::string id;
  double duration = 0.0;
  std::vector<double> class_time;  // indexed by label
};

struct SynthCorpus {
  std::vector<SynthUtterance> utterances;
  std::vector<CorpusManifestEntry> manifest;
};

/// n independent utterances with seeds spec.seed + index.
SynthCorpus synth_corpus(const CorpusSpec& spec, int n_utterances);

/// JSON corpus spec parser (schema-checked, unknown keys rejected).
CorpusSpec parse_corpus_spec(const std::string& json_text,
                             const std::string& path_for_errors);
CorpusSpec load_corpus_spec(const std::string& path);

}  // namespace diar

#endif  // DIAR_CORPUS_HPP
