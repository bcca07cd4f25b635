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

#ifndef FRAMESCORE_DISTORTION_HPP
#define FRAMESCORE_DISTORTION_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "framescore/alignment.hpp"
#include "framescore/audio.hpp"

namespace framescore {

enum class DistortionKind { pink_noise, random_phase, pitch_shift, vowel_stretch };

constexpr DistortionKind kAllDistortionKinds[] = {
    DistortionKind::pink_noise, DistortionKind::random_phase, DistortionKind::pitch_shift,
    DistortionKind::vowel_stretch};

std::string_view to_string(DistortionKind kind);
std::optional<DistortionKind> distortion_kind_from_string(std::string_view s);

/// Constraint class whose segment onsets anchor this distortion.
SegmentClass constraint_class(DistortionKind kind);

/// Piecewise-linear mapping from pre-injection to post-injection time.
struct TimelineMap {
  std::vector<std::pair<double, double>> nodes;  // (pre, post), sorted, starts at (0, 0)

  bool identity() const { return nodes.empty(); }
  double map(double pre_seconds) const;
  double inverse(double post_seconds) const;
};

/// Full provenance of one injected distortion.
struct DistortionRecord {
  std::string utterance_id;
  DistortionKind kind = DistortionKind::pink_noise;
  double noise_sigma = 0.1;                  // pink_noise
  double pitch_magnitude = 0.0;              // pitch_shift: 2^(1/4) or 2^(1/2)
  std::vector<double> area_pitch_ratios;     // pitch_shift: per-area, magnitude^(+-1)
  double stretch_factor = 0.0;               // vowel_stretch
  std::vector<Interval> events;              // post-injection timeline, sorted
  std::vector<Interval> source_events;       // pre-injection timeline, sorted
  std::uint64_t seed = 0;
  int requested_areas = 0;
  TimelineMap timeline;                      // identity for non-stretch classes
  std::size_t clipped_samples = 0;           // set by inject
};

struct PlanOptions {
  int n_areas = 3;
  double min_duration = 0.4;  // seconds
  double max_duration = 0.7;  // seconds
  std::vector<DistortionKind> allowed{kAllDistortionKinds,
                                      kAllDistortionKinds + std::size(kAllDistortionKinds)};
};

/// Samples a distortion plan: one class per utterance, chosen uniformly over
/// classes with at least n_areas eligible onsets (falling back to classes
/// with at least one); onsets drawn without replacement, durations i.i.d.
/// uniform in [min, max] clipped to the utterance end; colliding areas are
/// re-drawn up to 100 times and then dropped. Pure function of (track, seed).
DistortionRecord sample_plan(const AlignmentTrack& track, std::uint64_t seed,
                             const PlanOptions& options = {});

/// Applies the planned distortion. Outside the distortion areas (and their
/// 10 ms splice fades, which lie inside the areas) the output equals the
/// input bit-exactly; vowel stretching shifts later samples per the returned
/// timeline. The result is peak-clipped to [-1, 1] with a counter.
std::pair<AudioBuffer, DistortionRecord> inject(const AudioBuffer& buffer,
                                                const DistortionRecord& plan);

/// Ground-truth TSV: `utterance_id\tonset\toffset\tclass\tseed`, one event
/// per row, sorted by (utterance_id, onset).
void write_ground_truth(std::span<const DistortionRecord> records,
                        const std::filesystem::path& path);

}  // namespace framescore

#endif  // FRAMESCORE_DISTORTION_HPP
