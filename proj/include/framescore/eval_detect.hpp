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

#ifndef FRAMESCORE_EVAL_DETECT_HPP
#define FRAMESCORE_EVAL_DETECT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "framescore/common.hpp"
#include "framescore/scoring.hpp"

namespace framescore {

struct DetectionEvent {
  std::string utterance_id;
  double onset = 0.0;
  double offset = 0.0;
  double confidence = 0.0;  // higher = more confidently distorted
};

struct DetectionOutcome {
  double threshold = 0.0;
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t false_alarms = 0;
  std::int64_t total_gt = 0;
  double total_audio_seconds = 0.0;
};

struct RocPoint {
  double efpr = 0.0;  // false alarms per hour
  double tpr = 0.0;   // hit ratio
};

struct RocCurve {
  std::vector<RocPoint> points;  // upper envelope, sorted by efpr
  double e_max = 100.0;
  double auc = 0.0;  // normalized area below the envelope up to e_max
};

struct GroundTruthEvent {
  std::string utterance_id;
  double onset = 0.0;
  double offset = 0.0;
  std::string klass;
  std::uint64_t seed = 0;
};

/// Parses the ground-truth TSV written by the distortion stage.
std::vector<GroundTruthEvent> read_ground_truth(const std::filesystem::path& path);

/// One utterance prepared for detection evaluation. The curve is a per-frame
/// detection strength (higher = more distorted); MOS-style quality scores
/// enter as 6 - score.
struct EvalUtterance {
  std::string utterance_id;
  std::vector<double> curve;
  double frame_rate = 50.0;
  std::vector<Interval> gt;
  std::string klass;  // distortion class, for per-class breakdowns
};

std::vector<double> detection_curve_from_scores(std::span<const double> scores);

EvalUtterance make_eval_utterance(const FrameScoreSequence& scores, std::vector<Interval> gt,
                                  std::string klass = "");

/// Maximal runs of curve >= threshold as half-open intervals on the frame
/// grid.
std::vector<Interval> events_at(std::span<const double> curve, double frame_rate,
                                double threshold);

/// Median-filters the quality scores, thresholds them at `threshold`
/// (detected where filtered score <= threshold) and returns the maximal
/// detected runs. Event confidence is the largest detection-curve value
/// (6 - filtered score) inside the run, i.e. the loosest threshold at which
/// the run survives.
std::vector<DetectionEvent> extract_events(const FrameScoreSequence& scores, double medfilt_ms,
                                           double threshold);

/// Intersection-based matching. A detection is valid when its summed
/// intersection with all ground-truth events is at least rho_dtc of its own
/// duration; invalid detections with zero intersection are false alarms,
/// invalid ones with nonzero intersection count as neither. A ground-truth
/// event is a hit when its summed intersection with the valid detections
/// reaches rho_gtc of its duration. rho_gtc < 0 defaults it to rho_dtc.
DetectionOutcome intersection_match(std::span<const Interval> detections,
                                    std::span<const Interval> ground_truth, double rho_dtc,
                                    double rho_gtc = -1.0);

DetectionOutcome intersection_match(std::span<const DetectionEvent> detections,
                                    std::span<const Interval> ground_truth, double rho_dtc,
                                    double rho_gtc = -1.0);

/// Threshold-free detection evaluation: sweeps the merged distinct filtered
/// curve values, aggregates outcomes over utterances per threshold, builds
/// the upper envelope of (false alarms per hour, hit ratio) points and
/// integrates it up to e_max (the ratio is held constant past the last
/// operating point).
RocCurve roc_auc(std::span<const EvalUtterance> utterances, double medfilt_ms, double rho_dtc,
                 double e_max = 100.0);

struct SweepResult {
  double best_length_ms = 0.0;
  std::vector<std::pair<double, double>> table;  // (length_ms, auc), ascending length
};

/// Evaluates roc_auc per filter length and returns the best (ties go to the
/// shortest filter).
SweepResult sweep_median_filter(std::span<const EvalUtterance> utterances, double rho_dtc,
                                std::span<const double> lengths_ms, double e_max = 100.0);

/// F1 of the aggregate outcome at one detection-curve threshold (for
/// MOS-derived curves pass 6 - score_threshold).
double f1_at_threshold(std::span<const EvalUtterance> utterances, double curve_threshold,
                       double medfilt_ms, double rho_dtc);

/// Per-frame annotator mark counts normalized by the ratings count: a soft
/// detection curve in [0, 1].
std::vector<double> soft_scores_from_annotations(std::span<const int> counts, int ratings);

struct FoldResult {
  int fold = 0;
  double tuned_medfilt_ms = 0.0;
  double tuned_threshold = 0.0;
  double test_auc = 0.0;
  double test_f1 = 0.0;
};

struct KfoldResult {
  std::vector<FoldResult> folds;
  double mean_auc = 0.0;
  double mean_f1 = 0.0;
};

/// Deterministic k-fold cross validation: utterances are assigned to folds
/// round-robin in sorted id order; the filter length is tuned by AUC and the
/// threshold by F1 on the training folds.
KfoldResult kfold_tune(std::span<const EvalUtterance> utterances, int k,
                       std::span<const double> medfilt_lengths_ms, double rho_dtc,
                       double e_max = 100.0);

}  // namespace framescore

#endif  // FRAMESCORE_EVAL_DETECT_HPP
