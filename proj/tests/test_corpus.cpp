#include <algorithm>
#include <cmath>
#include <numeric>

#include "diar/corpus.hpp"
#include "diar/eval.hpp"
#include "diar/features.hpp"
#include "doctest.h"

using namespace diar;

TEST_CASE("alternating layout: labels alternate and changes match boundaries") {
  CorpusSpec spec = CorpusSpec::ttsf_preset();
  spec.seed = 9;
  SynthUtterance utt = synth_utterance(spec, spec.seed);

  REQUIRE(utt.reference.segments.size() >= 2);
  for (std::size_t s = 1; s < utt.reference.segments.size(); ++s)
    CHECK(utt.reference.segments[s].label !=
          utt.reference.segments[s - 1].label);
  CHECK(utt.change_times.size() == utt.reference.segments.size() - 1);

  // independent boundary-extraction pass over the reference
  CHECK(utt.change_times == utt.reference.change_times());

  // reference tiles the utterance exactly (no silence in this preset)
  double cursor = 0.0;
  for (const auto& seg : utt.reference.segments) {
    CHECK(seg.onset == doctest::Approx(cursor).epsilon(1e-12));
    cursor = seg.end();
  }
  const long frames = utt.features.num_frames();
  CHECK(cursor == doctest::Approx(frames * spec.frame_shift));
}

TEST_CASE("determinism: same spec and seed give identical output") {
  CorpusSpec spec = CorpusSpec::mscs_preset();
  spec.seed = 21;
  SynthUtterance a = synth_utterance(spec, 21);
  SynthUtterance b = synth_utterance(spec, 21);
  CHECK((a.features.features - b.features.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.features.energies == b.features.energies);
  CHECK(a.change_times == b.change_times);
  REQUIRE(a.reference.segments.size() == b.reference.segments.size());

  SynthUtterance c = synth_utterance(spec, 22);
  CHECK(a.reference.segments.size() != c.reference.segments.size());
}

TEST_CASE("mscs preset: silence gaps exist and the VAD removes them") {
  CorpusSpec spec = CorpusSpec::mscs_preset();
  spec.seed = 33;
  SynthUtterance utt = synth_utterance(spec, 33);

  const long total = utt.features.num_frames();
  FeatureSequence voiced = energy_vad(utt.features, 0.06);
  long speech_frames = 0;
  for (const auto& seg : utt.reference.segments)
    speech_frames += std::lround(seg.duration / spec.frame_shift);
  CHECK(voiced.num_voiced() == speech_frames);
  CHECK(voiced.num_voiced() < total);
}

TEST_CASE("mscs preset: 4:1 imbalance and duration means over a corpus") {
  CorpusSpec spec = CorpusSpec::mscs_preset();
  spec.seed = 70;
  SynthCorpus corpus = synth_corpus(spec, 20);
  REQUIRE(corpus.manifest.size() == 20);

  double primary = 0.0, secondary = 0.0;
  std::vector<double> secondary_durations;
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    primary += corpus.manifest[u].class_time[0];
    secondary += corpus.manifest[u].class_time[1];
    for (const auto& seg : corpus.utterances[u].reference.segments)
      if (seg.label == 1) secondary_durations.push_back(seg.duration);
  }
  const double ratio = primary / secondary;
  CHECK(ratio > 3.0);   // within +-25% of 4:1
  CHECK(ratio < 5.0);
  const double mean_secondary =
      std::accumulate(secondary_durations.begin(), secondary_durations.end(), 0.0) /
      secondary_durations.size();
  CHECK(mean_secondary == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("segment duration medians converge to the spec median") {
  CorpusSpec spec = CorpusSpec::ttsf_preset();
  spec.seed = 5;
  spec.target_duration = 40.0;
  SynthCorpus corpus = synth_corpus(spec, 20);

  std::vector<double> durations;
  for (const auto& utt : corpus.utterances)
    for (const auto& seg : utt.reference.segments)
      durations.push_back(seg.duration);
  REQUIRE(durations.size() >= 200);
  std::sort(durations.begin(), durations.end());
  const double median = durations[durations.size() / 2];
  CHECK(median == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("derived seeds: corpus utterance i equals a direct seed+i call") {
  CorpusSpec spec = CorpusSpec::ttsf_preset();
  spec.seed = 100;
  SynthCorpus corpus = synth_corpus(spec, 3);
  for (int i = 0; i < 3; ++i) {
    SynthUtterance direct = synth_utterance(spec, 100 + i);
    CHECK((corpus.utterances[i].features.features - direct.features.features)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("class geometry: separation controls the mean gap") {
  CorpusSpec spec = CorpusSpec::ttsf_preset();
  spec.separation = 4.0;
  spec.seed = 8;
  SynthUtterance utt = synth_utterance(spec, 8);

  Vector mean0 = Vector::Zero(spec.feature_dim);
  Vector mean1 = Vector::Zero(spec.feature_dim);
  long n0 = 0, n1 = 0;
  const auto starts = utt.features.frame_starts;
  for (long f = 0; f < utt.features.num_frames(); ++f) {
    const double t = starts[f] + 1e-9;
    for (const auto& seg : utt.reference.segments) {
      if (t >= seg.onset && t < seg.end()) {
        if (seg.label == 0) {
          mean0 += utt.features.features.row(f).transpose();
          ++n0;
        } else {
          mean1 += utt.features.features.row(f).transpose();
          ++n1;
        }
        break;
      }
    }
  }
  mean0 /= n0;
  mean1 /= n1;
  CHECK((mean0 - mean1).norm() == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("corpus spec JSON parsing and validation") {
  CorpusSpec spec = parse_corpus_spec(
      R"({"preset":"mscs","seed":7,"target_duration":12.0})", "mem");
  CHECK(spec.switch_model == SwitchModel::kMarkov);
  CHECK(spec.seed == 7);
  CHECK(spec.target_duration == doctest::Approx(12.0));

  CHECK_THROWS_AS(parse_corpus_spec(R"({"presett":"mscs"})", "mem"), ConfigError);
  CHECK_THROWS_AS(parse_corpus_spec(R"({"preset":"unknown"})", "mem"), ConfigError);
  CHECK_THROWS_AS(parse_corpus_spec(R"({"target_duration":-1})", "mem"), ConfigError);

  CorpusSpec custom = parse_corpus_spec(
      R"({"classes":[{"median":2.0},{"median":1.0,"log_sigma":0.3}],
          "switch":{"model":"markov","stay_prob":[0.5,0.0]},
          "silence":{"median":0.2}, "dim":4, "separation":2.0})",
      "mem");
  CHECK(custom.n_classes == 2);
  CHECK(custom.classes[0].duration.median == doctest::Approx(2.0));
  CHECK(custom.classes[1].duration.log_sigma == doctest::Approx(0.3));
  CHECK(custom.has_silence);
  CHECK(custom.stay_prob == std::vector<double>{0.5, 0.0});
}

TEST_CASE("corpus scales to hundreds of utterances") {
  CorpusSpec spec = CorpusSpec::mscs_preset();
  spec.seed = 4000;
  spec.target_duration = 10.0;
  SynthCorpus corpus = synth_corpus(spec, 400);
  REQUIRE(corpus.manifest.size() == 400);
  for (const auto& entry : corpus.manifest) {
    CHECK(entry.duration > 0.0);
    CHECK(entry.class_time.size() == 2);
  }
}

TEST_CASE("zero-duration spec rejected") {
  CorpusSpec spec = CorpusSpec::ttsf_preset();
  spec.target_duration = 0.0;
  CHECK_THROWS_AS(synth_utterance(spec, 1), ConfigError);
}
