#include "diar/diarize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numeric>

#include "diar/kernels.hpp"

namespace diar {

namespace {
// Relative tolerance for "equal" merge distances. The production clustering
// maintains pairwise-sum aggregates while the reference oracle recomputes
// means, so genuinely tied distances can differ by a few ulps between the
// two routes; both resolve ties through this same window.
constexpr double kTieRelTol = 1e-12;

constexpr double kTimeEps = 1e-9;
}  // namespace

long round_to_odd(double x) {
  // nearest odd integer, ties toward +inf
  const long k = std::lround((x - 1.0) / 2.0);
  return 2 * k + 1;
}

void ChangePointConfig::validate() const {
  if (alpha <= 0.0 || delta <= 0.0 || gamma <= 0.0)
    throw ConfigError("change-point parameters must be positive");
  if (window_len < 1) throw ConfigError("N must be >= 1");
  if (smoothing_len() < 1) throw ConfigError("smoothing length collapses to zero");
}

Diarization Diarization::from_segments(std::string utterance_id,
                                       std::vector<Segment> segments) {
  for (const auto& seg : segments) {
    if (seg.duration <= 0.0) throw DataError("segment with non-positive duration");
    if (seg.onset < 0.0) throw DataError("segment with negative onset");
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& a, const Segment& b) { return a.onset < b.onset; });

  Diarization d;
  d.utterance_id = std::move(utterance_id);
  for (const auto& seg : segments) {
    if (!d.segments.empty() && d.segments.back().label == seg.label &&
        std::abs(d.segments.back().end() - seg.onset) <= kTimeEps) {
      d.segments.back().duration = seg.end() - d.segments.back().onset;
    } else {
      d.segments.push_back(seg);
    }
  }
  return d;
}

double Diarization::span_end() const {
  double end = 0.0;
  for (const auto& seg : segments) end = std::max(end, seg.end());
  return end;
}

std::vector<double> Diarization::change_times() const {
  std::vector<double> times;
  for (std::size_t k = 1; k < segments.size(); ++k)
    if (segments[k].label != segments[k - 1].label)
      times.push_back(segments[k].onset);
  return times;
}

DivergenceContour divergence_contour(const Matrix& voiced,
                                     const std::vector<double>& voiced_starts,
                                     const Extractor& extractor,
                                     const ProjectionSet& projections,
                                     const Scorer& scorer, long window_len) {
  const long l = voiced.rows();
  if (window_len < 1) throw ConfigError("divergence_contour: N must be >= 1");
  if (l < 2 * window_len)
    throw DataError("too short for change detection: " + std::to_string(l) +
                    " voiced frames < 2N=" + std::to_string(2 * window_len));

  DivergenceContour contour;
  contour.values = kernels::divergence_values_parallel(extractor, projections,
                                                       scorer, voiced, window_len);
  const long count = static_cast<long>(contour.values.size());
  contour.positions.resize(count);
  contour.times.resize(count);
  for (long k = 0; k < count; ++k) {
    contour.positions[k] = window_len + k;
    contour.times[k] = voiced_starts[window_len + k];
  }
  for (double v : contour.values)
    if (!std::isfinite(v)) throw DataError("divergence contour contains non-finite values");
  return contour;
}

std::vector<double> smooth_contour(const std::vector<double>& values,
                                   long smoothing_len) {
  const long n = static_cast<long>(values.size());
  if (smoothing_len < 1 || smoothing_len % 2 == 0)
    throw ConfigError("smoothing length must be odd and >= 1");
  if (smoothing_len > n)
    throw DataError("smoothing window longer than the contour");

  std::vector<double> taps(smoothing_len);
  if (smoothing_len == 1) {
    taps[0] = 1.0;
  } else {
    double sum = 0.0;
    for (long i = 0; i < smoothing_len; ++i) {
      taps[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (smoothing_len - 1));
      sum += taps[i];
    }
    for (auto& t : taps) t /= sum;  // unit DC gain
  }

  const long half = smoothing_len / 2;
  std::vector<double> out(n);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long t = 0; t < smoothing_len; ++t) {
      long idx = i + t - half;
      if (idx < 0) idx = -idx;                    // reflect, no edge repeat
      if (idx > n - 1) idx = 2 * (n - 1) - idx;
      acc += taps[t] * values[idx];
    }
    out[i] = acc;
  }
  return out;
}

double threshold_contour(const std::vector<double>& smoothed, double alpha) {
  if (smoothed.empty()) throw DataError("threshold_contour: empty contour");
  const double mean =
      std::accumulate(smoothed.begin(), smoothed.end(), 0.0) / smoothed.size();
  return alpha * mean;
}

std::vector<long> pick_change_points(const std::vector<double>& smoothed,
                                     double threshold, long min_dist) {
  const long n = static_cast<long>(smoothed.size());
  if (min_dist < 1) min_dist = 1;

  // plateau-aware local maxima; a plateau counts once, at its first index
  std::vector<long> candidates;
  for (long i = 1; i < n - 1; ++i) {
    if (!(smoothed[i] > smoothed[i - 1])) continue;
    long j = i;
    while (j + 1 < n && smoothed[j + 1] == smoothed[i]) ++j;
    if (j < n - 1 && smoothed[j + 1] < smoothed[i] && smoothed[i] > threshold)
      candidates.push_back(i);
    i = j;
  }

  // greedy by descending height, ties to the earlier index; suppression is
  // strict (peaks exactly min_dist apart both survive)
  std::sort(candidates.begin(), candidates.end(), [&](long a, long b) {
    if (smoothed[a] != smoothed[b]) return smoothed[a] > smoothed[b];
    return a < b;
  });
  std::vector<long> kept;
  for (long cand : candidates) {
    bool suppressed = false;
    for (long k : kept)
      if (std::labs(cand - k) < min_dist) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(cand);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

SegmentEmbeddings midpoints_and_segment_embeddings(
    const Matrix& voiced, const std::vector<double>& voiced_starts,
    const std::vector<double>& change_times, long window_len,
    const Extractor& extractor, const ProjectionSet& projections) {
  const long l = voiced.rows();
  if (l < 1) throw DataError("no voiced frames");

  // change times -> voiced-frame indices; virtual boundaries close the span
  std::vector<long> bounds;
  bounds.push_back(0);
  for (double t : change_times) {
    const auto it = std::lower_bound(voiced_starts.begin(), voiced_starts.end(),
                                     t - kTimeEps);
    long idx = static_cast<long>(it - voiced_starts.begin());
    idx = std::clamp(idx, 1L, l - 1);
    if (idx > bounds.back()) bounds.push_back(idx);
  }
  bounds.push_back(l);

  // fold sub-minimum segments into the shorter adjacent neighbor
  constexpr long kMinFrames = 4;
  int merged = 0;
  bool changed = true;
  while (changed && bounds.size() > 2) {
    changed = false;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      const long len = bounds[k + 1] - bounds[k];
      if (len >= kMinFrames) continue;
      if (k == 0) {
        bounds.erase(bounds.begin() + 1);
      } else if (k + 2 == bounds.size()) {
        bounds.erase(bounds.end() - 2);
      } else {
        const long left_len = bounds[k] - bounds[k - 1];
        const long right_len = bounds[k + 2] - bounds[k + 1];
        bounds.erase(bounds.begin() + (left_len <= right_len ? k : k + 1));
      }
      ++merged;
      changed = true;
      break;
    }
  }

  if (merged > 0)
    std::cerr << "warning: merged " << merged
              << " sub-minimum segment(s) into their neighbors\n";

  const long n_segments = static_cast<long>(bounds.size()) - 1;
  SegmentEmbeddings result;
  result.boundaries = bounds;
  result.merged_segments = merged;

  for (long k = 0; k < n_segments; ++k) {
    const long lo = bounds[k], hi = bounds[k + 1];
    const double mid = (lo + hi - 1) / 2.0;
    long start = std::lround(mid - window_len / 2.0 + 1.0);
    long end = start + window_len - 1;  // inclusive
    start = std::max(start, lo);
    end = std::min(end, hi - 1);
    const Matrix window = voiced.middleRows(start, end - start + 1);
    const Vector projected = projections.apply(extractor.extract(window));
    if (k == 0) result.projected.resize(n_segments, projected.size());
    result.projected.row(k) = projected.transpose();
  }
  return result;
}

namespace {

struct TieMin {
  double value = std::numeric_limits<double>::infinity();
  long a = -1, b = -1;  // a < b

  // smaller distance wins; within the tie window the smaller index pair wins
  void offer(double d, long i, long j) {
    if (b < 0) {
      value = d;
      a = i;
      b = j;
      return;
    }
    const double tol = kTieRelTol * std::max({1.0, std::abs(d), std::abs(value)});
    if (d < value - tol) {
      value = d;
      a = i;
      b = j;
    } else if (d <= value + tol) {
      if (i < a || (i == a && j < b)) {
        // keep the numerically smaller of the tied values for stability
        value = std::min(value, d);
        a = i;
        b = j;
      } else {
        value = std::min(value, d);
      }
    }
  }
};

}  // namespace

namespace {

// Sum-maintained unweighted average linkage: a cluster pair's distance is the
// mean of the original pairwise distances, kept as sums / (size_i * size_j).
// A cluster lives in the slot of its smallest member, and merges always fold
// the larger slot into the smaller one.
std::vector<int> ahc_impl(Matrix distances, int num_clusters) {
  const long n = distances.rows();
  if (n != distances.cols()) throw DataError("ahc: distance matrix not square");
  if (num_clusters < 1) throw ConfigError("ahc: K must be >= 1");

  std::vector<bool> active(n, true);
  std::vector<long> sizes(n, 1);
  std::vector<long> owner(n);  // member index -> cluster slot
  std::iota(owner.begin(), owner.end(), 0L);
  Matrix& sums = distances;

  long active_count = n;
  const long target = std::min<long>(num_clusters, n);

  std::vector<double> best_dist(n, std::numeric_limits<double>::infinity());
  std::vector<long> best_to(n, -1);
  auto pair_dist = [&](long i, long j) {
    return sums(std::min(i, j), std::max(i, j)) /
           (static_cast<double>(sizes[i]) * sizes[j]);
  };
  auto refresh_row = [&](long i) {
    TieMin best;
    for (long j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      best.offer(pair_dist(i, j), std::min(i, j), std::max(i, j));
    }
    best_dist[i] = best.value;
    best_to[i] = best.a == i ? best.b : best.a;
  };
  if (active_count > target)
    for (long i = 0; i < n; ++i) refresh_row(i);

  while (active_count > target) {
    TieMin global;
    for (long i = 0; i < n; ++i) {
      if (!active[i] || best_to[i] < 0) continue;
      global.offer(best_dist[i], std::min(i, best_to[i]), std::max(i, best_to[i]));
    }
    const long a = global.a, b = global.b;

    for (long c = 0; c < n; ++c) {
      if (!active[c] || c == a || c == b) continue;
      sums(std::min(a, c), std::max(a, c)) =
          sums(std::min(a, c), std::max(a, c)) + sums(std::min(b, c), std::max(b, c));
    }
    sizes[a] += sizes[b];
    active[b] = false;
    for (long m = 0; m < n; ++m)
      if (owner[m] == b) owner[m] = a;
    --active_count;
    if (active_count <= target) break;

    refresh_row(a);
    for (long i = 0; i < n; ++i) {
      if (!active[i] || i == a) continue;
      if (best_to[i] == a || best_to[i] == b) {
        refresh_row(i);
      } else {
        TieMin best;
        best.value = best_dist[i];
        best.a = std::min(i, best_to[i]);
        best.b = std::max(i, best_to[i]);
        best.offer(pair_dist(i, a), std::min(i, a), std::max(i, a));
        best_dist[i] = best.value;
        best_to[i] = best.a == i ? best.b : best.a;
      }
    }
  }

  std::vector<int> labels(n, -1);
  int next_label = 0;
  std::vector<int> slot_label(n, -1);
  for (long m = 0; m < n; ++m) {
    if (slot_label[owner[m]] < 0) slot_label[owner[m]] = next_label++;
    labels[m] = slot_label[owner[m]];
  }
  return labels;
}

}  // namespace

std::vector<int> ahc_from_distances(Matrix distances, int num_clusters) {
  return ahc_impl(std::move(distances), num_clusters);
}

std::vector<int> ahc(const Matrix& rows, const Scorer& scorer, int num_clusters) {
  if (rows.rows() < 1) throw DataError("ahc: no vectors");
  if (rows.rows() < num_clusters) {
    // fewer vectors than clusters: every vector is its own cluster
    std::cerr << "warning: ahc received " << rows.rows() << " vectors for K="
              << num_clusters << "; returning singleton clusters\n";
    std::vector<int> labels(rows.rows());
    std::iota(labels.begin(), labels.end(), 0);
    return labels;
  }
  return ahc_impl(kernels::pairwise_distances_parallel(scorer, rows), num_clusters);
}

Diarization labels_to_segments(const std::vector<int>& labels,
                               const std::vector<double>& locations,
                               double step, std::string utterance_id) {
  if (labels.size() != locations.size())
    throw DataError("labels_to_segments: labels/locations length mismatch");
  if (step <= 0.0) throw ConfigError("labels_to_segments: step must be positive");

  std::vector<Segment> segments;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i == labels.size() || labels[i] != labels[run_start]) {
      Segment seg;
      seg.onset = locations[run_start];
      seg.duration = locations[i - 1] + step - seg.onset;
      seg.label = labels[run_start];
      segments.push_back(seg);
      run_start = i;
    }
  }
  return Diarization::from_segments(std::move(utterance_id), std::move(segments));
}

namespace {

struct VoicedView {
  Matrix features;
  std::vector<double> starts;
  double span_end;
};

VoicedView voiced_view(const FeatureSequence& features, double vad_factor) {
  const FeatureSequence voiced = energy_vad(features, vad_factor);
  VoicedView view;
  view.features = voiced.voiced_features();
  view.starts = voiced.voiced_starts();
  view.span_end = features.frame_starts.back() + features.spec.frame_shift;
  return view;
}

std::unique_ptr<Extractor> pipeline_extractor(const PipelineConfig& config,
                                              long input_dim) {
  return make_extractor(config.extractor, input_dim, config.extractor_dim,
                        config.extractor_seed);
}

Scorer pipeline_scorer(const PipelineConfig& config) {
  Scorer scorer;
  scorer.kind = config.scorer;
  if (config.scorer == ScorerKind::kGplda) {
    if (config.gplda.sigma_w.size() == 0)
      throw ConfigError("gplda scorer selected but no model is loaded");
    scorer.model = &config.gplda;
  }
  return scorer;
}

}  // namespace

Diarization diarize_fixed(const FeatureSequence& features,
                          const PipelineConfig& config,
                          std::string utterance_id) {
  const VoicedView view = voiced_view(features, config.vad_factor);
  const auto extractor = pipeline_extractor(config, view.features.cols());

  EmbeddingSequence embeddings = sliding_extract(*extractor, view.features,
                                                 view.starts, config.window_len, 1);
  return diarize_embeddings(embeddings, config, features.spec.frame_shift,
                            std::move(utterance_id));
}

Diarization diarize_embeddings(const EmbeddingSequence& embeddings,
                               const PipelineConfig& config, double step,
                               std::string utterance_id) {
  if (embeddings.size() < 1) throw DataError("no embeddings to cluster");
  if (step <= 0.0) {
    if (embeddings.size() < 2)
      throw DataError("cannot infer the label span from a single embedding");
    step = embeddings.starts[1] - embeddings.starts[0];
    for (std::size_t i = 2; i < embeddings.starts.size(); ++i)
      if (std::abs(embeddings.starts[i] - embeddings.starts[i - 1] - step) >
          1e-6)
        throw DataError("embedding starts are not uniformly spaced; pass step");
  }
  const Scorer scorer = pipeline_scorer(config);
  const Matrix projected = config.projections.apply_rows(embeddings.embeddings);
  const std::vector<int> labels = ahc(projected, scorer, config.num_clusters);
  return labels_to_segments(labels, embeddings.starts, step,
                            std::move(utterance_id));
}

std::vector<double> detect_change_times(const FeatureSequence& features,
                                        const PipelineConfig& config) {
  const VoicedView view = voiced_view(features, config.vad_factor);
  const auto extractor = pipeline_extractor(config, view.features.cols());
  const Scorer scorer = pipeline_scorer(config);
  ChangePointConfig cp = config.change_point;
  cp.window_len = config.window_len;
  cp.validate();

  const DivergenceContour contour = divergence_contour(
      view.features, view.starts, *extractor, config.projections, scorer,
      config.window_len);
  const std::vector<double> smoothed =
      smooth_contour(contour.values, cp.smoothing_len());
  const double threshold = threshold_contour(smoothed, cp.alpha);
  const std::vector<long> peaks =
      pick_change_points(smoothed, threshold, cp.min_peak_distance());

  std::vector<double> times;
  times.reserve(peaks.size());
  for (long p : peaks) times.push_back(contour.times[p]);
  return times;
}

Diarization diarize_changepoint(const FeatureSequence& features,
                                const PipelineConfig& config,
                                std::string utterance_id) {
  const VoicedView view = voiced_view(features, config.vad_factor);
  const auto extractor = pipeline_extractor(config, view.features.cols());
  const Scorer scorer = pipeline_scorer(config);

  const std::vector<double> change_times = detect_change_times(features, config);
  const SegmentEmbeddings segs = midpoints_and_segment_embeddings(
      view.features, view.starts, change_times, config.window_len, *extractor,
      config.projections);

  std::vector<int> labels;
  if (segs.projected.rows() == 1) {
    labels = {0};
  } else {
    labels = ahc(segs.projected, scorer, config.num_clusters);
  }

  // boundary indices -> times; virtual endpoints snap to the utterance span
  std::vector<Segment> segments;
  const long n_segments = segs.projected.rows();
  for (long k = 0; k < n_segments; ++k) {
    const double onset = k == 0 ? 0.0 : view.starts[segs.boundaries[k]];
    const double end =
        k == n_segments - 1 ? view.span_end : view.starts[segs.boundaries[k + 1]];
    Segment seg;
    seg.onset = onset;
    seg.duration = end - onset;
    seg.label = labels[k];
    segments.push_back(seg);
  }
  return Diarization::from_segments(std::move(utterance_id), std::move(segments));
}

}  // namespace diar
