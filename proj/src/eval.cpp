#include "diar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace diar {

namespace {

constexpr int kMaxClasses = 8;
constexpr double kTimeEps = 1e-9;

struct LabeledInterval {
  double start;
  double end;
  int label;
};

// sorted non-overlapping intervals; same-label overlaps are unioned,
// cross-label overlap is an error (overlap-aware scoring is out of scope)
std::vector<LabeledInterval> normalize(const Diarization& d) {
  std::vector<LabeledInterval> intervals;
  intervals.reserve(d.segments.size());
  for (const auto& seg : d.segments)
    intervals.push_back({seg.onset, seg.end(), seg.label});
  std::sort(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<LabeledInterval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.start < out.back().end - kTimeEps) {
      if (iv.label != out.back().label)
        throw DataError("overlapping segments with different labels in '" +
                        d.utterance_id + "'");
      out.back().end = std::max(out.back().end, iv.end);
    } else if (!out.empty() && out.back().label == iv.label &&
               iv.start <= out.back().end + kTimeEps) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

std::vector<int> class_list(const std::vector<LabeledInterval>& intervals) {
  std::set<int> labels;
  for (const auto& iv : intervals) labels.insert(iv.label);
  return {labels.begin(), labels.end()};
}

// Everything DER/JER needs, collected in one boundary sweep.
struct SweepStats {
  std::vector<int> ref_classes;
  std::vector<int> hyp_classes;
  std::vector<double> ref_time;            // per ref class
  std::vector<double> hyp_time;            // per hyp class
  std::vector<std::vector<double>> overlap;  // [ref][hyp]
  double ref_total = 0.0;
  double hyp_fa = 0.0;  // hypothesis time outside reference speech
};

SweepStats sweep(const std::vector<LabeledInterval>& ref,
                 const std::vector<LabeledInterval>& hyp, double collar) {
  SweepStats stats;
  stats.ref_classes = class_list(ref);
  stats.hyp_classes = class_list(hyp);
  stats.ref_time.assign(stats.ref_classes.size(), 0.0);
  stats.hyp_time.assign(stats.hyp_classes.size(), 0.0);
  stats.overlap.assign(stats.ref_classes.size(),
                       std::vector<double>(stats.hyp_classes.size(), 0.0));

  auto ref_index = [&](int label) {
    return std::lower_bound(stats.ref_classes.begin(), stats.ref_classes.end(),
                            label) -
           stats.ref_classes.begin();
  };
  auto hyp_index = [&](int label) {
    return std::lower_bound(stats.hyp_classes.begin(), stats.hyp_classes.end(),
                            label) -
           stats.hyp_classes.begin();
  };

  std::vector<double> bounds;
  for (const auto& iv : ref) {
    bounds.push_back(iv.start);
    bounds.push_back(iv.end);
    if (collar > 0.0) {
      bounds.push_back(std::max(0.0, iv.start - collar));
      bounds.push_back(iv.start + collar);
      bounds.push_back(std::max(0.0, iv.end - collar));
      bounds.push_back(iv.end + collar);
    }
  }
  for (const auto& iv : hyp) {
    bounds.push_back(iv.start);
    bounds.push_back(iv.end);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  auto in_collar = [&](double t) {
    if (collar <= 0.0) return false;
    for (const auto& iv : ref)
      if ((t > iv.start - collar - kTimeEps && t < iv.start + collar - kTimeEps) ||
          (t > iv.end - collar - kTimeEps && t < iv.end + collar - kTimeEps))
        return true;
    return false;
  };
  auto label_at = [](const std::vector<LabeledInterval>& ivs, double t) {
    for (const auto& iv : ivs)
      if (t >= iv.start - kTimeEps && t < iv.end - kTimeEps) return iv.label;
    return -1;
  };

  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const double len = bounds[k + 1] - bounds[k];
    if (len <= 0.0) continue;
    const double mid = 0.5 * (bounds[k] + bounds[k + 1]);
    if (in_collar(mid)) continue;
    const int r = label_at(ref, mid);
    const int h = label_at(hyp, mid);
    if (r >= 0) {
      stats.ref_time[ref_index(r)] += len;
      stats.ref_total += len;
    }
    if (h >= 0) stats.hyp_time[hyp_index(h)] += len;
    if (r >= 0 && h >= 0) stats.overlap[ref_index(r)][hyp_index(h)] += len;
    if (r < 0 && h >= 0) stats.hyp_fa += len;
  }
  return stats;
}

struct MappingSearch {
  const SweepStats& stats;
  std::vector<int> current;      // per hyp class: ref class index or -1
  std::vector<bool> ref_used;
  std::vector<int> best;
  double best_matched = -1.0;

  explicit MappingSearch(const SweepStats& s)
      : stats(s),
        current(s.hyp_classes.size(), -1),
        ref_used(s.ref_classes.size(), false) {}

  // options are explored in ascending ref order with "unmapped" last, so the
  // first assignment reaching a given matched total is the lexicographically
  // smallest one
  void recurse(std::size_t h, double matched) {
    if (h == current.size()) {
      if (matched > best_matched + 1e-12) {
        best_matched = matched;
        best = current;
      }
      return;
    }
    for (std::size_t r = 0; r < stats.ref_classes.size(); ++r) {
      if (ref_used[r]) continue;
      ref_used[r] = true;
      current[h] = static_cast<int>(r);
      recurse(h + 1, matched + stats.overlap[r][h]);
      ref_used[r] = false;
    }
    current[h] = -1;
    recurse(h + 1, matched);
  }
};

std::vector<int> best_mapping_indices(const SweepStats& stats) {
  if (stats.ref_classes.size() > kMaxClasses ||
      stats.hyp_classes.size() > kMaxClasses)
    throw DataError("best_mapping: more than 8 classes on one side");
  MappingSearch search(stats);
  search.recurse(0, 0.0);
  return search.best;
}

double der_from(const SweepStats& stats, const std::vector<int>& mapping) {
  if (stats.ref_total <= 0.0) throw DataError("der: empty reference");
  double matched = 0.0;
  for (std::size_t h = 0; h < mapping.size(); ++h)
    if (mapping[h] >= 0) matched += stats.overlap[mapping[h]][h];
  const double error = (stats.ref_total - matched) + stats.hyp_fa;
  return 100.0 * error / stats.ref_total;
}

std::map<int, double> jaccard_errors(const SweepStats& stats,
                                     const std::vector<int>& mapping) {
  // invert: ref class index -> hyp class index
  std::vector<int> ref_to_hyp(stats.ref_classes.size(), -1);
  for (std::size_t h = 0; h < mapping.size(); ++h)
    if (mapping[h] >= 0) ref_to_hyp[mapping[h]] = static_cast<int>(h);

  std::map<int, double> errors;
  for (std::size_t r = 0; r < stats.ref_classes.size(); ++r) {
    double err = 1.0;
    const int h = ref_to_hyp[r];
    if (h >= 0) {
      const double inter = stats.overlap[r][h];
      const double uni = stats.ref_time[r] + stats.hyp_time[h] - inter;
      if (uni > 0.0) err = 1.0 - inter / uni;
    }
    errors[stats.ref_classes[r]] = 100.0 * err;
  }
  return errors;
}

}  // namespace

std::map<int, int> best_mapping(const Diarization& ref, const Diarization& hyp) {
  const SweepStats stats = sweep(normalize(ref), normalize(hyp), 0.0);
  const std::vector<int> mapping = best_mapping_indices(stats);
  std::map<int, int> out;
  for (std::size_t h = 0; h < mapping.size(); ++h)
    if (mapping[h] >= 0)
      out[stats.hyp_classes[h]] = stats.ref_classes[mapping[h]];
  return out;
}

double der(const Diarization& ref, const Diarization& hyp, double collar) {
  const SweepStats stats = sweep(normalize(ref), normalize(hyp), collar);
  return der_from(stats, best_mapping_indices(stats));
}

double jer(const Diarization& ref, const Diarization& hyp) {
  const SweepStats stats = sweep(normalize(ref), normalize(hyp), 0.0);
  if (stats.ref_total <= 0.0) throw DataError("jer: empty reference");
  const auto errors = jaccard_errors(stats, best_mapping_indices(stats));
  double sum = 0.0;
  for (const auto& [label, err] : errors) sum += err;
  return sum / errors.size();
}

ScoreReport score_diarization(const Diarization& ref, const Diarization& hyp,
                              double collar) {
  const SweepStats stats = sweep(normalize(ref), normalize(hyp), collar);
  if (stats.ref_total <= 0.0) throw DataError("score: empty reference");
  const std::vector<int> mapping = best_mapping_indices(stats);

  ScoreReport report;
  report.der = der_from(stats, mapping);
  report.per_class_jaccard_error = jaccard_errors(stats, mapping);
  double sum = 0.0;
  for (const auto& [label, err] : report.per_class_jaccard_error) sum += err;
  report.jer = sum / report.per_class_jaccard_error.size();
  for (std::size_t h = 0; h < mapping.size(); ++h)
    if (mapping[h] >= 0)
      report.mapping[stats.hyp_classes[h]] = stats.ref_classes[mapping[h]];
  return report;
}

CpdReport cpd_metrics(const std::vector<double>& ref_changes,
                      const std::vector<double>& hyp_changes,
                      double span_start, double span_end) {
  if (ref_changes.empty()) throw DataError("cpd_metrics: empty reference change set");
  if (!std::is_sorted(ref_changes.begin(), ref_changes.end()))
    throw DataError("cpd_metrics: reference changes not sorted");
  if (ref_changes.front() < span_start - kTimeEps ||
      ref_changes.back() > span_end + kTimeEps)
    throw DataError("cpd_metrics: reference change outside the span");

  const std::size_t m = ref_changes.size();
  std::vector<double> edges(m + 1);
  edges[0] = span_start;
  for (std::size_t k = 1; k < m; ++k)
    edges[k] = 0.5 * (ref_changes[k - 1] + ref_changes[k]);
  edges[m] = span_end;

  long one = 0, none = 0, many = 0;
  double deviation_sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const bool last = k + 1 == m;
    long count = 0;
    double hyp_at = 0.0;
    for (double h : hyp_changes) {
      const bool inside = last ? (h >= edges[k] && h <= edges[k + 1])
                               : (h >= edges[k] && h < edges[k + 1]);
      if (inside) {
        ++count;
        hyp_at = h;
      }
    }
    if (count == 1) {
      ++one;
      deviation_sum += std::abs(hyp_at - ref_changes[k]);
    } else if (count == 0) {
      ++none;
    } else {
      ++many;
    }
  }

  CpdReport report;
  report.idr = 100.0 * one / m;
  report.mr = 100.0 * none / m;
  // the accounting identity idr + mr + far == 100 must hold bit-exactly;
  // start from the complement and nudge far by ulps until the evaluated sum
  // lands on 100 (far stays within an ulp of 100*many/m)
  report.far = 100.0 - (report.idr + report.mr);
  while (report.idr + report.mr + report.far > 100.0)
    report.far = std::nextafter(report.far, -std::numeric_limits<double>::infinity());
  while (report.idr + report.mr + report.far < 100.0)
    report.far = std::nextafter(report.far, std::numeric_limits<double>::infinity());
  report.dm = one > 0 ? deviation_sum / one : 0.0;
  return report;
}

double eer(const std::vector<double>& target_scores,
           const std::vector<double>& nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty())
    throw DataError("eer: empty score list");

  std::vector<double> thresholds;
  thresholds.reserve(target_scores.size() + nontarget_scores.size());
  thresholds.insert(thresholds.end(), target_scores.begin(), target_scores.end());
  thresholds.insert(thresholds.end(), nontarget_scores.begin(), nontarget_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<double> sorted_targets = target_scores;
  std::vector<double> sorted_nontargets = nontarget_scores;
  std::sort(sorted_targets.begin(), sorted_targets.end());
  std::sort(sorted_nontargets.begin(), sorted_nontargets.end());

  auto frr_at = [&](double t) {
    const auto it = std::lower_bound(sorted_targets.begin(), sorted_targets.end(), t);
    return static_cast<double>(it - sorted_targets.begin()) / sorted_targets.size();
  };
  auto far_at = [&](double t) {
    const auto it =
        std::lower_bound(sorted_nontargets.begin(), sorted_nontargets.end(), t);
    return static_cast<double>(sorted_nontargets.end() - it) /
           sorted_nontargets.size();
  };

  // FRR - FAR rises from -FAR(min) to +1 at the sentinel past the max score;
  // interpolate linearly inside the bracketing pair of thresholds
  double prev_frr = frr_at(thresholds.front());
  double prev_far = far_at(thresholds.front());
  double prev_diff = prev_frr - prev_far;
  if (prev_diff >= 0.0) return 100.0 * 0.5 * (prev_frr + prev_far);

  for (std::size_t k = 1; k <= thresholds.size(); ++k) {
    double frr, far;
    if (k < thresholds.size()) {
      frr = frr_at(thresholds[k]);
      far = far_at(thresholds[k]);
    } else {
      frr = 1.0;  // sentinel above every score
      far = 0.0;
    }
    const double diff = frr - far;
    if (diff >= 0.0) {
      const double lambda = prev_diff / (prev_diff - diff);
      return 100.0 * (prev_frr + lambda * (frr - prev_frr));
    }
    prev_frr = frr;
    prev_diff = diff;
  }
  return 100.0;  // unreachable: the sentinel always closes the bracket
}

}  // namespace diar
