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

#ifndef FRAMESCORE_ALIGNMENT_HPP
#define FRAMESCORE_ALIGNMENT_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "framescore/audio.hpp"

namespace framescore {

enum class SegmentClass { fricative, vowel, voiced, pitched, other };

std::string_view to_string(SegmentClass klass);
std::optional<SegmentClass> segment_class_from_string(std::string_view s);

/// Labeled time interval from a forced alignment or a detector.
struct SegmentAnnotation {
  double onset = 0.0;   // seconds
  double offset = 0.0;  // seconds, > onset
  std::string label;
  SegmentClass klass = SegmentClass::other;
};

struct AlignmentTrack {
  std::string utterance_id;
  double duration = 0.0;  // seconds
  std::vector<SegmentAnnotation> segments;  // sorted by onset, merged per class
};

/// Sorts segments and merges overlapping segments of the same class (the
/// first segment's label wins). Validates offsets against the duration with
/// a 1 ms tolerance.
AlignmentTrack normalize_track(AlignmentTrack track);

/// Parses the alignment TSV (header `onset\toffset\tlabel\tclass`). Errors
/// name the offending line. If duration == 0 it is inferred from the last
/// offset. The utterance id defaults to the file stem.
AlignmentTrack parse_alignment(const std::filesystem::path& path, double duration = 0.0);

void serialize_alignment(const AlignmentTrack& track, const std::filesystem::path& path);

using PhoneClassMap = std::map<std::string, SegmentClass, std::less<>>;

/// ARPAbet fricatives and vowels.
PhoneClassMap default_phone_class_map();

/// Mapping TSV: `label\tclass`, one row per phone label.
PhoneClassMap load_phone_class_map(const std::filesystem::path& path);

/// Reassigns each segment's class by label lookup (unmapped labels become
/// `other`) and renormalizes.
AlignmentTrack apply_phone_class_map(AlignmentTrack track, const PhoneClassMap& map);

/// Signal-based voicing fallback: 25 ms / 10 ms frames, voiced when the
/// normalized autocorrelation peak in the 60-400 Hz lag range exceeds 0.45
/// and the frame RMS exceeds 5% of the utterance RMS. Runs under 50 ms are
/// discarded. Each voiced segment is also emitted as `pitched` with the
/// median F0 recorded in the label. Thresholds are defaults, not a contract.
std::vector<SegmentAnnotation> detect_voicing(const AudioBuffer& buffer);

/// Adds detector-derived voiced/pitched segments when the track has none.
AlignmentTrack with_voicing_fallback(AlignmentTrack track, const AudioBuffer& buffer);

struct EligibleOnset {
  double onset = 0.0;
  double max_duration = 0.0;  // time remaining until utterance end
};

/// Constraint segments of `klass` whose onset leaves at least min_duration
/// before the utterance end.
std::vector<EligibleOnset> eligible_onsets(const AlignmentTrack& track, SegmentClass klass,
                                           double min_duration);

}  // namespace framescore

#endif  // FRAMESCORE_ALIGNMENT_HPP
