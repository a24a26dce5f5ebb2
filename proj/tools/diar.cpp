// diar — embedding-agnostic spoken language / speaker diarization toolkit.
//
// Subcommands: synth, train-backend, diarize, score, cpd-score, trials-eer,
// vad, info. Exit codes: 0 success, 1 usage, 2 data/file error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diar/audio.hpp"
#include "diar/corpus.hpp"
#include "diar/diarize.hpp"
#include "diar/eval.hpp"
#include "diar/features.hpp"
#include "diar/io.hpp"
#include "diar/kernels.hpp"
#include "diar/rng.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace diar;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ManifestUtterance {
  std::string id;
  std::string features;
  std::string energy;
  std::string rttm;
};

std::vector<ManifestUtterance> read_manifest_file(const fs::path& path);

std::vector<ManifestUtterance> read_manifest(const fs::path& dir) {
  return read_manifest_file(dir / "manifest.json");
}

std::vector<ManifestUtterance> read_manifest_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), "cannot open manifest");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  std::vector<ManifestUtterance> utterances;
  for (const auto& u : doc.at("utterances")) {
    ManifestUtterance entry;
    entry.id = u.at("id").get<std::string>();
    entry.features = u.at("features").get<std::string>();
    entry.energy = u.value("energy", "");
    entry.rttm = u.value("rttm", "");
    utterances.push_back(std::move(entry));
  }
  std::sort(utterances.begin(), utterances.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return utterances;
}

FeatureSequence load_feature_file(const fs::path& feats, const fs::path& energy) {
  MatrixFile file = read_matrix(feats.string());
  if (!file.times)
    throw FormatError(feats.string(), "feature file lacks frame start times");
  FeatureSequence seq;
  seq.features = file.values;
  seq.frame_starts = *file.times;
  if (seq.frame_starts.size() < 2)
    throw FormatError(feats.string(), "need at least 2 frames");
  const double shift = seq.frame_starts[1] - seq.frame_starts[0];
  seq.spec.frame_shift = shift;
  seq.spec.frame_len = shift;

  MatrixFile efile = read_matrix(energy.string());
  if (efile.values.cols() != 1 || efile.values.rows() != seq.features.rows())
    throw FormatError(energy.string(), "energy file shape mismatch");
  seq.energies.resize(efile.values.rows());
  for (long r = 0; r < efile.values.rows(); ++r) seq.energies[r] = efile.values(r, 0);
  seq.voiced_mask.assign(seq.features.rows(), true);
  return seq;
}

FeatureSequence load_wav_features(const fs::path& path, const FrameSpec& frame) {
  AudioSignal signal = read_wav(path.string());
  MfccConfig cfg;
  cfg.frame = frame;
  FeatureSequence seq = mfcc(signal, cfg);
  return deltas(seq, 2);
}

// class-pooled voiced frames of a labeled corpus, for backend training and
// trial construction
std::vector<Matrix> pool_class_frames(const fs::path& dir,
                                      const std::vector<ManifestUtterance>& utts,
                                      double vad_factor, int n_classes) {
  std::vector<std::vector<Eigen::RowVectorXd>> pools(n_classes);
  for (const auto& utt : utts) {
    if (utt.rttm.empty())
      throw DataError("utterance " + utt.id + " has no reference RTTM in the manifest");
    FeatureSequence seq = load_feature_file(dir / utt.features, dir / utt.energy);
    FeatureSequence voiced = energy_vad(seq, vad_factor);
    Diarization ref = read_rttm_file((dir / utt.rttm).string());
    for (long f = 0; f < voiced.num_frames(); ++f) {
      if (!voiced.voiced_mask[f]) continue;
      const double t = voiced.frame_starts[f] + 1e-9;
      for (const auto& seg : ref.segments) {
        if (t >= seg.onset && t < seg.end()) {
          if (seg.label >= 0 && seg.label < n_classes)
            pools[seg.label].push_back(voiced.features.row(f));
          break;
        }
      }
    }
  }
  std::vector<Matrix> out;
  for (int c = 0; c < n_classes; ++c) {
    Matrix pool(pools[c].size(), pools[c].empty() ? 0 : pools[c][0].cols());
    for (std::size_t r = 0; r < pools[c].size(); ++r) pool.row(r) = pools[c][r];
    out.push_back(std::move(pool));
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string(), "cannot open for writing");
  out << content;
}

// configs given by bare name fall back to $DIAR_CONFIG_DIR
std::string resolve_config_path(const std::string& path) {
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("DIAR_CONFIG_DIR")) {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

// ---- synth ------------------------------------------------------------------

int run_synth(const std::string& spec_path, const std::string& out_dir, int count,
              std::optional<std::uint64_t> seed) {
  CorpusSpec spec = load_corpus_spec(spec_path);
  if (seed) spec.seed = *seed;
  SynthCorpus corpus = synth_corpus(spec, count);

  fs::create_directories(out_dir);
  json manifest;
  manifest["n_classes"] = spec.n_classes;
  manifest["seed"] = spec.seed;
  manifest["frame_shift"] = spec.frame_shift;
  manifest["utterances"] = json::array();

  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    const auto& utt = corpus.utterances[u];
    const auto& entry = corpus.manifest[u];
    const std::string feats = entry.id + ".feats.dkm";
    const std::string energy = entry.id + ".energy.dkm";
    const std::string rttm = entry.id + ".rttm";

    write_matrix((fs::path(out_dir) / feats).string(), utt.features.features,
                 &utt.features.frame_starts);
    Matrix energies(utt.features.energies.size(), 1);
    for (std::size_t r = 0; r < utt.features.energies.size(); ++r)
      energies(r, 0) = utt.features.energies[r];
    write_matrix((fs::path(out_dir) / energy).string(), energies);
    write_rttm_file(utt.reference, (fs::path(out_dir) / rttm).string());

    json record;
    record["id"] = entry.id;
    record["duration"] = entry.duration;
    record["class_time"] = entry.class_time;
    record["features"] = feats;
    record["energy"] = energy;
    record["rttm"] = rttm;
    record["change_times"] = utt.change_times;
    manifest["utterances"].push_back(std::move(record));
  }
  write_text_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << corpus.utterances.size() << " utterances to " << out_dir
            << "\n";
  return 0;
}

// ---- train-backend -------------------------------------------------------------

int run_train_backend(const std::string& features_dir, const std::string& labels_path,
                      const std::string& out_path, const std::string& chain,
                      long lda_dim, long window_len, long window_shift,
                      const std::string& extractor_name,
                      const std::string& scorer_name, double vad_factor) {
  const fs::path manifest_path = labels_path.empty()
                                     ? fs::path(features_dir) / "manifest.json"
                                     : fs::path(labels_path);
  const auto utts = read_manifest_file(manifest_path);
  const json manifest = json::parse(std::ifstream(manifest_path));
  const int n_classes = manifest.value("n_classes", 2);

  const auto pools =
      pool_class_frames(features_dir, utts, vad_factor, n_classes);
  for (int c = 0; c < n_classes; ++c)
    if (pools[c].rows() < window_len)
      throw DataError("class " + std::to_string(c) + " has " +
                      std::to_string(pools[c].rows()) + " voiced frames < N=" +
                      std::to_string(window_len));

  const auto extractor = make_extractor(extractor_kind_from_string(extractor_name),
                                        pools[0].cols());
  if (window_shift <= 0) window_shift = std::max<long>(1, window_len / 2);

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<int> labels;
  for (int c = 0; c < n_classes; ++c) {
    const long count = (pools[c].rows() - window_len) / window_shift + 1;
    for (long i = 0; i < count; ++i) {
      rows.push_back(extractor
                         ->extract(pools[c].middleRows(i * window_shift, window_len))
                         .transpose());
      labels.push_back(c);
    }
  }
  Matrix X(rows.size(), rows[0].cols());
  for (std::size_t r = 0; r < rows.size(); ++r) X.row(r) = rows[r];

  // fixed composition order: mean -> lda -> wccn -> whiten -> lnorm
  std::set<std::string> stages;
  std::stringstream chain_stream(chain);
  std::string stage;
  while (std::getline(chain_stream, stage, ',')) {
    if (stage != "lda" && stage != "wccn" && stage != "whiten" && stage != "lnorm")
      throw ConfigError("unknown chain stage '" + stage + "'");
    stages.insert(stage);
  }

  BackendModel model;
  model.scorer = scorer_kind_from_string(scorer_name);
  model.projections.mean = X.colwise().mean();
  Matrix projected = X.rowwise() - model.projections.mean.transpose();

  if (stages.count("lda")) {
    bool rank_warning = false;
    model.projections.lda = train_lda(projected, labels, lda_dim, &rank_warning);
    if (rank_warning)
      std::cerr << "warning: lda dimension " << lda_dim
                << " exceeds the between-class rank (" << n_classes - 1
                << "); trailing directions are not discriminative\n";
    projected = projected * model.projections.lda->transpose();
  }
  if (stages.count("wccn")) {
    model.projections.wccn = train_wccn(projected, labels);
    projected = projected * model.projections.wccn->transpose();
  }
  if (stages.count("whiten")) {
    Vector whiten_mean;
    Matrix whitener;
    train_whitener(projected, &whiten_mean, &whitener);
    model.projections.whitener = whitener;
    projected = projected * whitener.transpose();
  }
  model.projections.apply_length_norm = stages.count("lnorm") > 0;
  if (model.projections.apply_length_norm)
    for (long r = 0; r < projected.rows(); ++r)
      projected.row(r) = length_normalize(projected.row(r).transpose()).transpose();

  if (model.scorer == ScorerKind::kGplda)
    model.gplda = train_gplda(projected, labels);

  write_model(out_path, model);
  std::cout << "trained backend on " << X.rows() << " windows (N=" << window_len
            << ", shift=" << window_shift << ", dim " << X.cols() << " -> "
            << projected.cols() << "), wrote " << out_path << "\n";
  return 0;
}

// ---- diarize ------------------------------------------------------------------

int run_diarize(const std::string& mode_flag, const std::string& config_path,
                const std::string& preset, const std::string& model_path,
                const std::string& in_dir, const std::string& out_dir, int jobs,
                std::uint64_t window_override) {
  LoadedConfig config;
  if (!config_path.empty()) {
    config = load_config(resolve_config_path(config_path));
  } else {
    json doc = json::object();
    if (!preset.empty()) doc["preset"] = preset;
    config = parse_config(doc.dump(), "<defaults>");
  }
  if (!mode_flag.empty()) {
    if (mode_flag != "fixed" && mode_flag != "changepoint")
      throw ConfigError("--mode must be fixed or changepoint");
    config.mode = mode_flag == "fixed" ? PipelineMode::kFixed
                                       : PipelineMode::kChangePoint;
  }
  if (window_override > 0) {
    config.pipeline.window_len = static_cast<long>(window_override);
    config.pipeline.change_point.window_len = config.pipeline.window_len;
  }

  if (!model_path.empty()) {
    BackendModel model = read_model(model_path);
    config.pipeline.projections = model.projections;
    if (model.gplda) config.pipeline.gplda = *model.gplda;
    config.pipeline.scorer = model.scorer;
  }
  if (jobs > 0) kernels::set_threads(jobs);

  fs::create_directories(out_dir);

  struct Item {
    std::string id;
    fs::path features;
    fs::path energy;
    enum class Kind { kFeatures, kWav, kEmbeddings } kind = Kind::kFeatures;
  };
  std::vector<Item> items;
  const bool external = config.pipeline.extractor == ExtractorKind::kExternalFile;
  if (external) {
    // precomputed embedding files, fixed-segmentation clustering only
    if (config.mode != PipelineMode::kFixed)
      throw ConfigError(
          "external-file embeddings support --mode fixed only (the "
          "change-point pipeline re-extracts windows around midpoints)");
    for (const auto& entry : fs::directory_iterator(in_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 8 && name.ends_with(".emb.dkm"))
        items.push_back({name.substr(0, name.size() - 8), entry.path(), {},
                         Item::Kind::kEmbeddings});
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
  } else if (fs::exists(fs::path(in_dir) / "manifest.json")) {
    for (const auto& utt : read_manifest(in_dir))
      items.push_back({utt.id, fs::path(in_dir) / utt.features,
                       fs::path(in_dir) / utt.energy, Item::Kind::kFeatures});
  } else {
    for (const auto& entry : fs::directory_iterator(in_dir))
      if (entry.path().extension() == ".wav")
        items.push_back(
            {entry.path().stem().string(), entry.path(), {}, Item::Kind::kWav});
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  if (items.empty()) throw DataError("no inputs found in " + in_dir);

  std::cout << "effective config:\n" << config.effective_json << "\n";

  std::vector<std::string> errors(items.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs > 0 ? jobs : kernels::threads()))
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      Diarization hyp;
      if (items[i].kind == Item::Kind::kEmbeddings) {
        EmbeddingSequence emb = load_external_embeddings(
            items[i].features.string(), config.pipeline.extractor_dim);
        hyp = diarize_embeddings(emb, config.pipeline, 0.0, items[i].id);
      } else {
        FeatureSequence seq =
            items[i].kind == Item::Kind::kWav
                ? load_wav_features(items[i].features, config.frame)
                : load_feature_file(items[i].features, items[i].energy);
        hyp = config.mode == PipelineMode::kFixed
                  ? diarize_fixed(seq, config.pipeline, items[i].id)
                  : diarize_changepoint(seq, config.pipeline, items[i].id);
      }
      write_rttm_file(hyp, (fs::path(out_dir) / (items[i].id + ".rttm")).string());
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!errors[i].empty())
      throw DataError("utterance " + items[i].id + ": " + errors[i]);
  std::cout << "diarized " << items.size() << " utterances into " << out_dir << "\n";
  return 0;
}

// ---- score / cpd-score ------------------------------------------------------------

std::vector<std::pair<fs::path, fs::path>> match_rttm_pairs(const std::string& ref_dir,
                                                            const std::string& hyp_dir) {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  std::vector<fs::path> refs;
  for (const auto& entry : fs::directory_iterator(ref_dir))
    if (entry.path().extension() == ".rttm") refs.push_back(entry.path());
  std::sort(refs.begin(), refs.end());
  for (const auto& ref : refs) {
    const fs::path hyp = fs::path(hyp_dir) / ref.filename();
    if (!fs::exists(hyp))
      throw DataError("missing hypothesis for " + ref.filename().string());
    pairs.emplace_back(ref, hyp);
  }
  if (pairs.empty()) throw DataError("no reference RTTM files in " + ref_dir);
  return pairs;
}

int run_score(const std::string& ref_dir, const std::string& hyp_dir,
              const std::string& report_path, double collar, int jobs) {
  const auto pairs = match_rttm_pairs(ref_dir, hyp_dir);

  struct Row {
    std::string id;
    double der, jer;
  };
  std::vector<Row> rows(pairs.size());
  std::vector<std::string> errors(pairs.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      Diarization ref = read_rttm_file(pairs[i].first.string());
      Diarization hyp = read_rttm_file(pairs[i].second.string());
      ScoreReport report = score_diarization(ref, hyp, collar);
      rows[i] = {ref.utterance_id, report.der, report.jer};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (!errors[i].empty())
      throw DataError(pairs[i].first.string() + ": " + errors[i]);

  double der_sum = 0.0, jer_sum = 0.0;
  json utterances = json::array();
  std::printf("%-12s %8s %8s\n", "utterance", "DER", "JER");
  for (const auto& row : rows) {
    der_sum += row.der;
    jer_sum += row.jer;
    std::printf("%-12s %8.2f %8.2f\n", row.id.c_str(), row.der, row.jer);
    utterances.push_back({{"id", row.id}, {"der", row.der}, {"jer", row.jer}});
  }
  const double der_avg = der_sum / rows.size();
  const double jer_avg = jer_sum / rows.size();
  std::printf("%-12s %8.2f %8.2f\n", "AVG", der_avg, jer_avg);

  if (!report_path.empty()) {
    json report;
    report["collar"] = collar;
    report["utterances"] = utterances;
    report["average"] = {{"der", der_avg}, {"jer", jer_avg}};
    write_text_file(report_path, report.dump(2) + "\n");
  }
  return 0;
}

int run_cpd_score(const std::string& ref_dir, const std::string& hyp_dir,
                  const std::string& report_path) {
  const auto pairs = match_rttm_pairs(ref_dir, hyp_dir);

  double idr = 0.0, mr = 0.0, far = 0.0, dm = 0.0;
  json utterances = json::array();
  std::printf("%-12s %8s %8s %8s %8s\n", "utterance", "IDR", "MR", "FAR", "Dm");
  for (const auto& [ref_path, hyp_path] : pairs) {
    Diarization ref = read_rttm_file(ref_path.string());
    Diarization hyp = read_rttm_file(hyp_path.string());
    CpdReport report = cpd_metrics(ref.change_times(), hyp.change_times(), 0.0,
                                   ref.span_end());
    idr += report.idr;
    mr += report.mr;
    far += report.far;
    dm += report.dm;
    std::printf("%-12s %8.2f %8.2f %8.2f %8.3f\n", ref.utterance_id.c_str(),
                report.idr, report.mr, report.far, report.dm);
    utterances.push_back({{"id", ref.utterance_id},
                          {"idr", report.idr},
                          {"mr", report.mr},
                          {"far", report.far},
                          {"dm", report.dm}});
  }
  const double n = static_cast<double>(pairs.size());
  std::printf("%-12s %8.2f %8.2f %8.2f %8.3f\n", "AVG", idr / n, mr / n, far / n,
              dm / n);

  if (!report_path.empty()) {
    json report;
    report["utterances"] = utterances;
    report["average"] = {
        {"idr", idr / n}, {"mr", mr / n}, {"far", far / n}, {"dm", dm / n}};
    write_text_file(report_path, report.dump(2) + "\n");
  }
  return 0;
}

// ---- trials-eer ---------------------------------------------------------------

int run_trials_eer(const std::string& features_dir, const std::string& labels_path,
                   const std::string& model_path, int pairs, long window_len,
                   std::uint64_t seed, const std::string& report_path,
                   double vad_factor) {
  const fs::path manifest_path = labels_path.empty()
                                     ? fs::path(features_dir) / "manifest.json"
                                     : fs::path(labels_path);
  const auto utts = read_manifest_file(manifest_path);
  const json manifest = json::parse(std::ifstream(manifest_path));
  const int n_classes = manifest.value("n_classes", 2);

  BackendModel model = read_model(model_path);
  const auto pools = pool_class_frames(features_dir, utts, vad_factor, n_classes);
  for (int c = 0; c < n_classes; ++c)
    if (pools[c].rows() < window_len)
      throw DataError("class " + std::to_string(c) + " pool too small for N=" +
                      std::to_string(window_len));

  const auto extractor = make_extractor(ExtractorKind::kStatPool, pools[0].cols());
  rng::Xoshiro256ss gen(seed);
  auto draw = [&](int cls) {
    const long start = static_cast<long>(
        gen.next_below(pools[cls].rows() - window_len + 1));
    return model.projections.apply(
        extractor->extract(pools[cls].middleRows(start, window_len)));
  };

  TrialSet trials;
  for (int p = 0; p < pairs; ++p) {
    const int cls = static_cast<int>(gen.next_below(n_classes));
    trials.target_pairs.emplace_back(draw(cls), draw(cls));
  }
  for (int p = 0; p < pairs; ++p) {
    const int a = static_cast<int>(gen.next_below(n_classes));
    int b = static_cast<int>(gen.next_below(n_classes - 1));
    if (b >= a) ++b;
    trials.nontarget_pairs.emplace_back(draw(a), draw(b));
  }

  Scorer scorer;
  scorer.kind = model.scorer;
  if (model.gplda) scorer.model = &*model.gplda;
  TrialScores scores = score_trials(scorer, trials);
  const double result = eer(scores.target, scores.nontarget);
  std::printf("EER %.3f%% (%d target / %d nontarget pairs, N=%ld, scorer=%s)\n",
              result, pairs, pairs, window_len, to_string(model.scorer).c_str());

  if (!report_path.empty()) {
    json report;
    report["eer"] = result;
    report["pairs"] = pairs;
    report["N"] = window_len;
    report["scorer"] = to_string(model.scorer);
    write_text_file(report_path, report.dump(2) + "\n");
  }
  return 0;
}

// ---- vad ----------------------------------------------------------------------

int run_vad(const std::string& in_path, double factor, const std::string& out_path) {
  AudioSignal signal = read_wav(in_path);
  FrameSpec spec;
  std::vector<double> starts;
  Matrix frames = frame_signal(signal, spec, &starts);

  FeatureSequence seq;
  seq.features = Matrix::Zero(frames.rows(), 1);
  seq.frame_starts = starts;
  seq.energies = frame_energy(frames);
  seq.voiced_mask.assign(frames.rows(), true);
  seq.spec = spec;
  FeatureSequence voiced = energy_vad(seq, factor);

  std::vector<int> labels(voiced.voiced_mask.size());
  for (std::size_t f = 0; f < voiced.voiced_mask.size(); ++f)
    labels[f] = voiced.voiced_mask[f] ? 1 : 0;
  Diarization all = labels_to_segments(labels, starts, spec.frame_shift,
                                       fs::path(in_path).stem().string());
  Diarization speech;
  speech.utterance_id = all.utterance_id;
  for (const auto& seg : all.segments)
    if (seg.label == 1) speech.segments.push_back({seg.onset, seg.duration, 0});

  if (out_path.empty()) {
    write_rttm(speech, std::cout);
  } else {
    write_rttm_file(speech, out_path);
  }
  std::cerr << "voiced " << voiced.num_voiced() << "/" << frames.rows()
            << " frames (factor " << factor << ")\n";
  return 0;
}

int run_info() {
  std::cout << "diar " << kVersion << "\n";
#ifdef _OPENMP
  std::cout << "openmp: yes (max threads " << omp_get_max_threads() << ")\n";
#else
  std::cout << "openmp: no\n";
#endif
  std::cout << "presets:\n";
  for (const auto& preset : known_presets())
    std::printf("  %-14s alpha=%.1f delta=%.1f gamma=%.1f N=%ld scorer=%s\n",
                preset.name.c_str(), preset.alpha, preset.delta, preset.gamma,
                preset.window_len, to_string(preset.scorer).c_str());
  std::cout << "formats: RTTM (text), DKM1 matrix, DKM2 model container, JSON config\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embedding-agnostic spoken language / speaker diarization toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic code-switched corpus");
  std::string synth_spec, synth_out;
  int synth_count = 20;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--spec", synth_spec, "corpus spec JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("-n,--count", synth_count, "number of utterances");
  synth->add_option("--seed", synth_seed, "override the spec seed");

  // train-backend
  auto* train = app.add_subcommand("train-backend", "train the projection chain and GPLDA");
  std::string train_features, train_labels, train_out, train_chain = "whiten,lnorm";
  std::string train_extractor = "stat-pool", train_scorer = "gplda";
  long train_lda_dim = 150, train_window = 50, train_shift = 0;
  double train_vad = 0.06;
  train->add_option("--features", train_features, "corpus directory (with manifest.json)")
      ->required();
  train->add_option("--labels", train_labels,
                    "manifest path (default <features>/manifest.json)");
  train->add_option("--out", train_out, "output model path")->required();
  train->add_option("--chain", train_chain, "stages: lda,wccn,whiten,lnorm");
  train->add_option("--lda-dim", train_lda_dim, "LDA output dimension");
  train->add_option("-N,--window", train_window, "analysis window N (voiced frames)");
  train->add_option("--window-shift", train_shift, "training window shift (default N/2)");
  train->add_option("--extractor", train_extractor, "stat-pool|mean-pool");
  train->add_option("--scorer", train_scorer, "gplda|cosine");
  train->add_option("--vad-factor", train_vad, "energy VAD factor");

  // diarize
  auto* diarize = app.add_subcommand("diarize", "run a diarization pipeline");
  std::string dz_mode, dz_config, dz_preset, dz_model, dz_in, dz_out;
  int dz_jobs = 0;
  std::uint64_t dz_window = 0;
  diarize->add_option("--mode", dz_mode, "fixed|changepoint");
  diarize->add_option("--config", dz_config, "pipeline config JSON");
  diarize->add_option("--preset", dz_preset, "named preset (see info)");
  diarize->add_option("--model", dz_model, "trained backend model");
  diarize->add_option("--in", dz_in, "corpus directory or directory of WAVs")->required();
  diarize->add_option("--out", dz_out, "output RTTM directory")->required();
  diarize->add_option("--jobs", dz_jobs, "worker threads (0 = auto)");
  diarize->add_option("-N,--window", dz_window, "override analysis window N");

  // score
  auto* score = app.add_subcommand("score", "DER/JER against reference RTTMs");
  std::string sc_ref, sc_hyp, sc_report;
  double sc_collar = 0.0;
  int sc_jobs = 1;
  score->add_option("--ref", sc_ref, "reference RTTM directory")->required();
  score->add_option("--hyp", sc_hyp, "hypothesis RTTM directory")->required();
  score->add_option("--report", sc_report, "JSON report path");
  score->add_option("--collar", sc_collar, "forgiveness collar in seconds");
  score->add_option("--jobs", sc_jobs, "worker threads");

  // cpd-score
  auto* cpd = app.add_subcommand("cpd-score", "change-detection IDR/MR/FAR/Dm");
  std::string cpd_ref, cpd_hyp, cpd_report;
  cpd->add_option("--ref", cpd_ref, "reference RTTM directory")->required();
  cpd->add_option("--hyp", cpd_hyp, "hypothesis RTTM directory")->required();
  cpd->add_option("--report", cpd_report, "JSON report path");

  // trials-eer
  auto* trials = app.add_subcommand("trials-eer", "within/between-class trial EER");
  std::string tr_features, tr_labels, tr_model, tr_report;
  int tr_pairs = 2000;
  long tr_window = 50;
  std::uint64_t tr_seed = 1;
  double tr_vad = 0.06;
  trials->add_option("--features", tr_features, "corpus directory")->required();
  trials->add_option("--labels", tr_labels,
                     "manifest path (default <features>/manifest.json)");
  trials->add_option("--model", tr_model, "trained backend model")->required();
  trials->add_option("--pairs", tr_pairs, "trial pairs per side");
  trials->add_option("-N,--window", tr_window, "analysis window N");
  trials->add_option("--seed", tr_seed, "trial sampling seed");
  trials->add_option("--report", tr_report, "JSON report path");
  trials->add_option("--vad-factor", tr_vad, "energy VAD factor");

  // vad
  auto* vad = app.add_subcommand("vad", "energy VAD over a WAV file");
  std::string vad_in, vad_out;
  double vad_factor = 0.06;
  vad->add_option("--in", vad_in, "input WAV")->required();
  vad->add_option("--factor", vad_factor, "threshold factor on the mean energy");
  vad->add_option("--out", vad_out, "output RTTM (stdout when omitted)");

  app.add_subcommand("info", "version, presets and build info");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 1;
  }

  try {
    if (app.got_subcommand("synth"))
      return run_synth(synth_spec, synth_out, synth_count, synth_seed);
    if (app.got_subcommand("train-backend"))
      return run_train_backend(train_features, train_labels, train_out, train_chain,
                               train_lda_dim, train_window, train_shift,
                               train_extractor, train_scorer, train_vad);
    if (app.got_subcommand("diarize"))
      return run_diarize(dz_mode, dz_config, dz_preset, dz_model, dz_in, dz_out,
                         dz_jobs, dz_window);
    if (app.got_subcommand("score"))
      return run_score(sc_ref, sc_hyp, sc_report, sc_collar, sc_jobs);
    if (app.got_subcommand("cpd-score"))
      return run_cpd_score(cpd_ref, cpd_hyp, cpd_report);
    if (app.got_subcommand("trials-eer"))
      return run_trials_eer(tr_features, tr_labels, tr_model, tr_pairs, tr_window,
                            tr_seed, tr_report, tr_vad);
    if (app.got_subcommand("vad")) return run_vad(vad_in, vad_factor, vad_out);
    if (app.got_subcommand("info")) return run_info();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
