#ifndef DIAR_DIARIZE_HPP
#define DIAR_DIARIZE_HPP

#include <memory>
#include <string>
#include <vector>

#include "diar/backend.hpp"
#include "diar/common.hpp"
#include "diar/embedding.hpp"
#include "diar/features.hpp"

namespace diar {

/// Nearest odd integer (ties round up); smoothing windows need a center tap.
long round_to_odd(double x);

/// Change-point hyperparameters. alpha scales the threshold, delta divides N
/// for the smoothing length, gamma scales N for the minimum peak distance.
struct ChangePointConfig {
  double alpha = 3.2;
  double delta = 1.3;
  double gamma = 0.9;
  long window_len = 200;  // N, in voiced frames

  long smoothing_len() const { return round_to_odd(window_len / delta); }
  long min_peak_distance() const {
    return std::max<long>(1, std::lround(gamma * window_len));
  }
  void validate() const;
};

struct Segment {
  double onset = 0.0;
  double duration = 0.0;
  int label = 0;

  double end() const { return onset + duration; }
};

/// Ordered labeled segments for one utterance. Construction sorts by onset
/// and merges same-label adjacent segments with zero gap.
struct Diarization {
  std::string utterance_id;
  std::vector<Segment> segments;

  static Diarization from_segments(std::string utterance_id,
                                   std::vector<Segment> segments);
  double span_end() const;
  /// Onsets of label changes (gap-split segments of one label are not
  /// changes).
  std::vector<double> change_times() const;
};

/// D(i) over valid positions with the voiced-frame index and time of each.
struct DivergenceContour {
  std::vector<double> values;
  std::vector<long> positions;  // voiced-frame indices
  std::vector<double> times;    // via P_v
};

DivergenceContour divergence_contour(const Matrix& voiced,
                                     const std::vector<double>& voiced_starts,
                                     const Extractor& extractor,
                                     const ProjectionSet& projections,
                                     const Scorer& scorer, long window_len);

/// Unit-sum Hamming smoothing with reflected edges; output length preserved.
std::vector<double> smooth_contour(const std::vector<double>& values,
                                   long smoothing_len);

/// Constant threshold alpha * mean(smoothed contour).
double threshold_contour(const std::vector<double>& smoothed, double alpha);

/// Local maxima strictly above the threshold; greedy suppression by
/// descending height keeps peaks at least min_dist apart (strict
/// less-than, ties to the earlier index). Returns sorted indices into
/// `smoothed`; empty output is valid.
std::vector<long> pick_change_points(const std::vector<double>& smoothed,
                                     double threshold, long min_dist);

/// Per-segment embeddings for the regions delimited by the change points,
/// with virtual boundaries at the utterance start and end. Each embedding
/// comes from the window of up to N frames centered at the segment midpoint,
/// clipped to the segment; segments left with fewer than 4 frames are merged
/// into the shorter neighbor.
struct SegmentEmbeddings {
  Matrix projected;                 // one row per surviving segment
  std::vector<long> boundaries;     // voiced-frame indices, size = rows + 1
  int merged_segments = 0;          // count of sub-minimum segments folded in
};

SegmentEmbeddings midpoints_and_segment_embeddings(
    const Matrix& voiced, const std::vector<double>& voiced_starts,
    const std::vector<double>& change_times, long window_len,
    const Extractor& extractor, const ProjectionSet& projections);

/// Bottom-up average-linkage clustering down to K clusters. Cluster distance
/// is the unweighted mean of the original pairwise distances; ties break to
/// the smallest index pair. Labels 0..K-1 by first occurrence.
std::vector<int> ahc(const Matrix& rows, const Scorer& scorer, int num_clusters = 2);
std::vector<int> ahc_from_distances(Matrix distances, int num_clusters);

/// Run-length conversion of a label sequence at the given locations into
/// segments; each run ends `step` after its last location.
Diarization labels_to_segments(const std::vector<int>& labels,
                               const std::vector<double>& locations,
                               double step, std::string utterance_id);

struct PipelineConfig {
  ExtractorKind extractor = ExtractorKind::kStatPool;
  long extractor_dim = 0;        // test-linear / external only
  std::uint64_t extractor_seed = 7;
  long window_len = 200;         // N, voiced frames
  ScorerKind scorer = ScorerKind::kCosine;
  int num_clusters = 2;
  double vad_factor = 0.06;
  double tick = 0.2;             // label-sequence step, seconds
  ChangePointConfig change_point;

  ProjectionSet projections;     // identity-sized defaults when untrained
  GpldaModel gplda;              // required when scorer == kGplda
};

/// VAD -> sliding windows (shift 1) -> project -> AHC -> segments.
Diarization diarize_fixed(const FeatureSequence& features,
                          const PipelineConfig& config,
                          std::string utterance_id);

/// Fixed-segmentation clustering of precomputed embeddings (the
/// external-extractor route). `step` is the label span per embedding; when 0
/// it is taken from the spacing of the starts (which must be uniform).
Diarization diarize_embeddings(const EmbeddingSequence& embeddings,
                               const PipelineConfig& config, double step,
                               std::string utterance_id);

/// VAD -> divergence contour -> smooth -> threshold -> peaks -> segment
/// embeddings -> AHC; boundaries at the detected change times.
Diarization diarize_changepoint(const FeatureSequence& features,
                                const PipelineConfig& config,
                                std::string utterance_id);

/// The detected change times alone (the change-detection stage of
/// diarize_changepoint), for CPD scoring.
std::vector<double> detect_change_times(const FeatureSequence& features,
                                        const PipelineConfig& config);

}  // namespace diar

#endif  // DIAR_DIARIZE_HPP
