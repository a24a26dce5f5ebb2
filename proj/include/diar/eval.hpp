#ifndef DIAR_EVAL_HPP
#define DIAR_EVAL_HPP

#include <map>
#include <vector>

#include "diar/common.hpp"
#include "diar/diarize.hpp"

namespace diar {

/// Injective hypothesis-label -> reference-label mapping minimizing DER.
/// Exhaustive over at most 8 classes per side; ties resolve to the
/// lexicographically smallest mapping (unmapped sorts last).
std::map<int, int> best_mapping(const Diarization& ref, const Diarization& hyp);

/// Missed + false alarm + confusion time over total reference time, percent.
/// Interval-exact; the millisecond-grid oracle lives in the tests. Collar
/// excludes +-collar around reference boundaries (default 0).
double der(const Diarization& ref, const Diarization& hyp, double collar = 0.0);

/// Mean over reference classes of 1 - Jaccard(time(r), time(mapped hyp)),
/// percent; unmapped classes score 100. Shares the DER mapping.
double jer(const Diarization& ref, const Diarization& hyp);

struct ScoreReport {
  double der = 0.0;
  double jer = 0.0;
  std::map<int, int> mapping;
  std::map<int, double> per_class_jaccard_error;
};

ScoreReport score_diarization(const Diarization& ref, const Diarization& hyp,
                              double collar = 0.0);

/// ROI-based change detection: each reference change owns the region between
/// the midpoints to its neighbors (span edges for the first/last). Exactly
/// one detection -> IDR, none -> MR, more -> FAR; Dm averages |hyp - ref|
/// over the IDR regions.
struct CpdReport {
  double idr = 0.0;
  double mr = 0.0;
  double far = 0.0;
  double dm = 0.0;
};

CpdReport cpd_metrics(const std::vector<double>& ref_changes,
                      const std::vector<double>& hyp_changes,
                      double span_start, double span_end);

/// Equal error rate, percent: threshold sweep over the union of scores with
/// linear interpolation between the bracketing thresholds.
double eer(const std::vector<double>& target_scores,
           const std::vector<double>& nontarget_scores);

}  // namespace diar

#endif  // DIAR_EVAL_HPP
