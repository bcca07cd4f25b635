// Copyright 2026 the framescore authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "framescore/eval_detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "framescore/kernels.hpp"

namespace framescore {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<double> filtered_curve(const EvalUtterance& utt, double medfilt_ms) {
  std::vector<double> out(utt.curve.size());
  if (out.empty()) return out;
  auto window =
      static_cast<std::size_t>(std::lround(medfilt_ms * utt.frame_rate / 1000.0));
  if (window % 2 == 0 && window > 0) --window;
  if (window < 1) window = 1;
  kernels::median_filter_frames(utt.curve, window, out);
  return out;
}

DetectionOutcome aggregate_outcome(std::span<const EvalUtterance> utterances,
                                   const std::vector<std::vector<double>>& curves,
                                   double threshold, double rho_dtc) {
  DetectionOutcome total;
  total.threshold = threshold;
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    const auto& utt = utterances[u];
    const auto events = events_at(curves[u], utt.frame_rate, threshold);
    DetectionOutcome one = intersection_match(events, utt.gt, rho_dtc);
    total.hits += one.hits;
    total.misses += one.misses;
    total.false_alarms += one.false_alarms;
    total.total_gt += one.total_gt;
    total.total_audio_seconds +=
        static_cast<double>(utt.curve.size()) / utt.frame_rate;
  }
  return total;
}

std::vector<double> merged_thresholds(const std::vector<std::vector<double>>& curves) {
  std::set<double> values;
  for (const auto& c : curves) values.insert(c.begin(), c.end());
  std::vector<double> thresholds(values.begin(), values.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());  // zero-detection sentinel
  return thresholds;
}

double integrate_envelope(std::vector<RocPoint> points, double e_max, std::vector<RocPoint>* env) {
  std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    if (a.efpr != b.efpr) return a.efpr < b.efpr;
    return a.tpr < b.tpr;
  });
  // Upper envelope: running max of tpr over increasing efpr.
  std::vector<RocPoint> envelope;
  double best = 0.0;
  for (const auto& p : points) {
    if (p.efpr > e_max) break;
    if (p.tpr > best) {
      best = p.tpr;
      envelope.push_back({p.efpr, best});
    }
  }
  if (envelope.empty() || envelope.front().efpr > 0.0) {
    envelope.insert(envelope.begin(), {0.0, 0.0});
  }
  double auc = 0.0;
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    const double e0 = envelope[i].efpr;
    const double e1 = i + 1 < envelope.size() ? envelope[i + 1].efpr : e_max;
    auc += (std::min(e1, e_max) - std::min(e0, e_max)) * envelope[i].tpr;
  }
  if (env != nullptr) *env = std::move(envelope);
  return e_max > 0.0 ? auc / e_max : 0.0;
}

}  // namespace

std::vector<GroundTruthEvent> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open ground truth file: ", path.string());
  std::string line;
  if (!std::getline(in, line)) fail(path.string(), ": empty ground truth file");
  {
    const auto header = split_tabs(line);
    if (header.size() != 5 || header[0] != "utterance_id" || header[1] != "onset" ||
        header[2] != "offset" || header[3] != "class" || header[4] != "seed") {
      fail(path.string(), " line 1: expected header 'utterance_id\\tonset\\toffset\\tclass\\tseed'");
    }
  }
  std::vector<GroundTruthEvent> events;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      fail(path.string(), " line ", line_no, ": expected 5 fields, got ", fields.size());
    }
    GroundTruthEvent ev;
    ev.utterance_id = fields[0];
    try {
      ev.onset = std::stod(fields[1]);
      ev.offset = std::stod(fields[2]);
      ev.seed = std::stoull(fields[4]);
    } catch (const std::exception&) {
      fail(path.string(), " line ", line_no, ": cannot parse numeric field");
    }
    ev.klass = fields[3];
    if (!(ev.offset > ev.onset)) {
      fail(path.string(), " line ", line_no, ": offset <= onset");
    }
    events.push_back(std::move(ev));
  }
  std::sort(events.begin(), events.end(), [](const GroundTruthEvent& a, const GroundTruthEvent& b) {
    if (a.utterance_id != b.utterance_id) return a.utterance_id < b.utterance_id;
    return a.onset < b.onset;
  });
  return events;
}

std::vector<double> detection_curve_from_scores(std::span<const double> scores) {
  std::vector<double> curve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) curve[i] = 6.0 - scores[i];
  return curve;
}

EvalUtterance make_eval_utterance(const FrameScoreSequence& scores, std::vector<Interval> gt,
                                  std::string klass) {
  EvalUtterance utt;
  utt.utterance_id = scores.utterance_id;
  utt.curve = detection_curve_from_scores(scores.scores);
  utt.frame_rate = scores.frame_rate;
  utt.gt = std::move(gt);
  std::sort(utt.gt.begin(), utt.gt.end(),
            [](const Interval& a, const Interval& b) { return a.onset < b.onset; });
  utt.klass = std::move(klass);
  return utt;
}

std::vector<Interval> events_at(std::span<const double> curve, double frame_rate,
                                double threshold) {
  std::vector<Interval> events;
  std::size_t t = 0;
  const std::size_t n = curve.size();
  while (t < n) {
    if (!(curve[t] >= threshold)) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < n && curve[end] >= threshold) ++end;
    events.push_back({static_cast<double>(t) / frame_rate, static_cast<double>(end) / frame_rate});
    t = end;
  }
  return events;
}

std::vector<DetectionEvent> extract_events(const FrameScoreSequence& scores, double medfilt_ms,
                                           double threshold) {
  const FrameScoreSequence filtered = median_filter(scores, medfilt_ms);
  const auto curve = detection_curve_from_scores(filtered.scores);
  const auto intervals = events_at(curve, filtered.frame_rate, 6.0 - threshold);
  std::vector<DetectionEvent> events;
  events.reserve(intervals.size());
  for (const auto& iv : intervals) {
    DetectionEvent ev;
    ev.utterance_id = scores.utterance_id;
    ev.onset = iv.onset;
    ev.offset = iv.offset;
    const auto first = static_cast<std::size_t>(std::lround(iv.onset * filtered.frame_rate));
    const auto last = static_cast<std::size_t>(std::lround(iv.offset * filtered.frame_rate));
    double conf = -std::numeric_limits<double>::infinity();
    for (std::size_t t = first; t < last && t < curve.size(); ++t) conf = std::max(conf, curve[t]);
    ev.confidence = conf;
    events.push_back(std::move(ev));
  }
  return events;
}

DetectionOutcome intersection_match(std::span<const Interval> detections,
                                    std::span<const Interval> ground_truth, double rho_dtc,
                                    double rho_gtc) {
  if (rho_dtc < 0.0 || rho_dtc > 1.0) fail("rho_dtc must be in [0, 1]");
  if (rho_gtc < 0.0) rho_gtc = rho_dtc;
  if (rho_gtc > 1.0) fail("rho_gtc must be in [0, 1]");

  DetectionOutcome outcome;
  outcome.total_gt = static_cast<std::int64_t>(ground_truth.size());

  // Detection tolerance: sorted sweep over the ground truth.
  std::vector<Interval> valid;
  std::size_t gi = 0;
  for (const auto& d : detections) {
    while (gi < ground_truth.size() && ground_truth[gi].offset <= d.onset) ++gi;
    double inter = 0.0;
    for (std::size_t j = gi; j < ground_truth.size() && ground_truth[j].onset < d.offset; ++j) {
      inter += overlap_seconds(d, ground_truth[j]);
    }
    const double dur = d.duration();
    if (dur <= 0.0) continue;
    if (inter / dur >= rho_dtc) {
      valid.push_back(d);
    } else if (inter <= 0.0) {
      ++outcome.false_alarms;
    }
    // Invalid but intersecting detections are neither hits nor false alarms.
  }

  // Ground-truth tolerance against the valid detections only.
  std::size_t vi = 0;
  for (const auto& g : ground_truth) {
    while (vi < valid.size() && valid[vi].offset <= g.onset) ++vi;
    double inter = 0.0;
    for (std::size_t j = vi; j < valid.size() && valid[j].onset < g.offset; ++j) {
      inter += overlap_seconds(g, valid[j]);
    }
    const double dur = g.duration();
    if (dur > 0.0 && inter / dur >= rho_gtc) {
      ++outcome.hits;
    } else {
      ++outcome.misses;
    }
  }
  return outcome;
}

DetectionOutcome intersection_match(std::span<const DetectionEvent> detections,
                                    std::span<const Interval> ground_truth, double rho_dtc,
                                    double rho_gtc) {
  std::vector<Interval> intervals;
  intervals.reserve(detections.size());
  for (const auto& d : detections) intervals.push_back({d.onset, d.offset});
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.onset < b.onset; });
  return intersection_match(intervals, ground_truth, rho_dtc, rho_gtc);
}

RocCurve roc_auc(std::span<const EvalUtterance> utterances, double medfilt_ms, double rho_dtc,
                 double e_max) {
  if (utterances.empty()) fail("roc_auc: no utterances");
  if (e_max <= 0.0) fail("roc_auc: e_max must be positive");
  std::int64_t total_gt = 0;
  double total_seconds = 0.0;
  for (const auto& u : utterances) {
    total_gt += static_cast<std::int64_t>(u.gt.size());
    total_seconds += static_cast<double>(u.curve.size()) / u.frame_rate;
  }
  if (total_gt == 0) fail("roc_auc: no ground truth events");
  const double total_hours = total_seconds / 3600.0;
  if (total_hours <= 0.0) fail("roc_auc: no audio");

  std::vector<std::vector<double>> curves(utterances.size());
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    curves[u] = filtered_curve(utterances[u], medfilt_ms);
  }
  const auto thresholds = merged_thresholds(curves);

  std::vector<RocPoint> points(thresholds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const DetectionOutcome outcome =
        aggregate_outcome(utterances, curves, thresholds[i], rho_dtc);
    points[i].tpr = static_cast<double>(outcome.hits) / static_cast<double>(total_gt);
    points[i].efpr = static_cast<double>(outcome.false_alarms) / total_hours;
  }

  RocCurve curve;
  curve.e_max = e_max;
  curve.auc = integrate_envelope(std::move(points), e_max, &curve.points);
  return curve;
}

SweepResult sweep_median_filter(std::span<const EvalUtterance> utterances, double rho_dtc,
                                std::span<const double> lengths_ms, double e_max) {
  if (lengths_ms.empty()) fail("sweep_median_filter: no filter lengths");
  std::vector<double> lengths(lengths_ms.begin(), lengths_ms.end());
  std::sort(lengths.begin(), lengths.end());
  SweepResult result;
  double best_auc = -1.0;
  for (double length : lengths) {
    const double auc = roc_auc(utterances, length, rho_dtc, e_max).auc;
    result.table.emplace_back(length, auc);
    if (auc > best_auc) {  // strict: ties keep the shortest filter
      best_auc = auc;
      result.best_length_ms = length;
    }
  }
  return result;
}

double f1_at_threshold(std::span<const EvalUtterance> utterances, double curve_threshold,
                       double medfilt_ms, double rho_dtc) {
  std::vector<std::vector<double>> curves(utterances.size());
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    curves[u] = filtered_curve(utterances[u], medfilt_ms);
  }
  const DetectionOutcome o = aggregate_outcome(utterances, curves, curve_threshold, rho_dtc);
  const double precision =
      o.hits + o.false_alarms > 0
          ? static_cast<double>(o.hits) / static_cast<double>(o.hits + o.false_alarms)
          : 0.0;
  const double recall =
      o.total_gt > 0 ? static_cast<double>(o.hits) / static_cast<double>(o.total_gt) : 0.0;
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> soft_scores_from_annotations(std::span<const int> counts, int ratings) {
  if (ratings <= 0) fail("soft_scores_from_annotations: ratings count must be positive");
  std::vector<double> curve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0 || counts[i] > ratings) {
      fail("soft_scores_from_annotations: frame ", i, " has ", counts[i], " marks for ", ratings,
           " ratings");
    }
    curve[i] = static_cast<double>(counts[i]) / static_cast<double>(ratings);
  }
  return curve;
}

KfoldResult kfold_tune(std::span<const EvalUtterance> utterances, int k,
                       std::span<const double> medfilt_lengths_ms, double rho_dtc, double e_max) {
  if (k < 2) fail("kfold_tune: k must be at least 2 (no held-out data otherwise)");
  if (utterances.size() < static_cast<std::size_t>(k)) {
    fail("kfold_tune: ", utterances.size(), " utterances cannot fill ", k, " folds");
  }

  // Deterministic assignment: round-robin over sorted utterance ids.
  std::vector<std::size_t> order(utterances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return utterances[a].utterance_id < utterances[b].utterance_id;
  });
  std::vector<int> fold_of(utterances.size(), 0);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    fold_of[order[rank]] = static_cast<int>(rank % static_cast<std::size_t>(k));
  }

  KfoldResult result;
  for (int f = 0; f < k; ++f) {
    std::vector<EvalUtterance> train, test;
    for (std::size_t i = 0; i < utterances.size(); ++i) {
      (fold_of[i] == f ? test : train).push_back(utterances[i]);
    }
    FoldResult fr;
    fr.fold = f;

    const SweepResult sweep = sweep_median_filter(train, rho_dtc, medfilt_lengths_ms, e_max);
    fr.tuned_medfilt_ms = sweep.best_length_ms;

    // Tune the operating threshold by F1 on the training folds.
    std::vector<std::vector<double>> train_curves(train.size());
    for (std::size_t u = 0; u < train.size(); ++u) {
      train_curves[u] = filtered_curve(train[u], fr.tuned_medfilt_ms);
    }
    const auto thresholds = merged_thresholds(train_curves);
    double best_f1 = -1.0;
    for (double c : thresholds) {
      if (!std::isfinite(c)) continue;
      const double f1 = f1_at_threshold(train, c, fr.tuned_medfilt_ms, rho_dtc);
      if (f1 > best_f1) {
        best_f1 = f1;
        fr.tuned_threshold = c;
      }
    }

    fr.test_auc = roc_auc(test, fr.tuned_medfilt_ms, rho_dtc, e_max).auc;
    fr.test_f1 = f1_at_threshold(test, fr.tuned_threshold, fr.tuned_medfilt_ms, rho_dtc);
    result.folds.push_back(fr);
    result.mean_auc += fr.test_auc;
    result.mean_f1 += fr.test_f1;
  }
  result.mean_auc /= static_cast<double>(k);
  result.mean_f1 /= static_cast<double>(k);
  return result;
}

}  // namespace framescore
