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

#ifndef FRAMESCORE_EVAL_CORR_HPP
#define FRAMESCORE_EVAL_CORR_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "framescore/common.hpp"
#include "framescore/scoring.hpp"

namespace framescore {

/// (true, predicted) pair.
using RatedPair = std::pair<double, double>;

struct RatedUtterance {
  std::string utterance_id;
  std::string system_id;
  double true_mos = 0.0;
  double predicted_mos = 0.0;
};

double mse(std::span<const RatedPair> pairs);

/// Pearson correlation. Needs >= 2 pairs and nonzero variance on both sides.
double lcc(std::span<const RatedPair> pairs);

/// Spearman rank correlation: Pearson of average-ranked data (ties get the
/// mean of the ranks they span).
double srcc(std::span<const RatedPair> pairs);

struct CorrMetrics {
  std::optional<double> mse, lcc, srcc;
  std::size_t count = 0;
};

/// All three metrics; degenerate correlations are reported as missing
/// rather than zero.
CorrMetrics corr_metrics(std::span<const RatedPair> pairs);

CorrMetrics utterance_level(std::span<const RatedUtterance> rated);

/// Averages true and predicted MOS per system, then applies the
/// utterance-level metrics to the per-system pairs. Needs >= 2 systems.
CorrMetrics system_level(std::span<const RatedUtterance> rated);

/// Classical DTW with |a_i - b_j| local cost, steps (i-1,j), (i,j-1),
/// (i-1,j-1) at unit weight, boundary-anchored, unnormalized total cost.
double dtw_cost(std::span<const double> a, std::span<const double> b);

struct CouplingReport {
  std::optional<double> lpcc, rpcc;  // Pearson of the before/after subsequences
  std::optional<double> ldtw, rdtw;  // DTW alignment cost of the same
  double collar = 0.2;
};

/// Compares the frame-score subsequences left and right of the distorted
/// region (collar excluded) before vs after injecting the distortion. With
/// several events the outermost boundaries are used. `source_events` carries
/// the pre-injection timeline when it differs (vowel stretch); it defaults
/// to `events`. A side shorter than 2 frames is recorded as missing. Two
/// bit-identical subsequences count as perfectly correlated even when they
/// are constant.
CouplingReport coupling_analysis(const FrameScoreSequence& before, const FrameScoreSequence& after,
                                 std::span<const Interval> events, double collar = 0.2,
                                 std::span<const Interval> source_events = {});

/// (pred - target)^2 when |pred - target| > tau, else 0. The band boundary
/// is strict: |diff| == tau incurs no loss.
double clipped_mse_loss(double pred, double target, double tau = 0.1);

/// Pairwise rank-difference hinge:
/// max(0, |(pred_i - pred_j) - (target_i - target_j)| - alpha).
double contrastive_loss(double pred_i, double pred_j, double target_i, double target_j,
                        double alpha = 0.1);

}  // namespace framescore

#endif  // FRAMESCORE_EVAL_CORR_HPP
