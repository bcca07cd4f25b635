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

#include "framescore/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "framescore/noise.hpp"
#include "framescore/rng.hpp"
#include "framescore/vocoder.hpp"

namespace framescore {

namespace {

constexpr double kFadeSeconds = 0.010;
constexpr int kMaxPlacementAttempts = 100;

/// Per-area RNG stream derived from the record seed; documented so that
/// outputs are reproducible from the ground-truth TSV alone.
std::uint64_t area_seed(std::uint64_t record_seed, std::size_t area_index) {
  return splitmix64(record_seed + 0x9E3779B97F4A7C15ull * (area_index + 1));
}

bool intervals_overlap(const Interval& a, const Interval& b) {
  return a.onset < b.offset && b.onset < a.offset;
}

std::size_t to_sample(double seconds, std::uint32_t sr) {
  return static_cast<std::size_t>(std::llround(seconds * sr));
}

/// Linear crossfade of `proc` against the original segment at both edges.
/// The fades live inside the area, so samples outside it stay untouched.
void splice_with_fades(std::vector<double>& out, std::size_t area_start,
                       std::span<const double> original, std::span<const double> proc,
                       std::size_t fade) {
  const std::size_t len = proc.size();
  const std::size_t f = std::min(fade, len / 2);
  for (std::size_t k = 0; k < len; ++k) out[area_start + k] = proc[k];
  for (std::size_t k = 0; k < f; ++k) {
    const double a = static_cast<double>(k + 1) / static_cast<double>(f);
    out[area_start + k] = (1.0 - a) * original[k] + a * proc[k];
    const std::size_t tail = len - 1 - k;
    const std::size_t orig_tail = original.size() - 1 - k;
    out[area_start + tail] = (1.0 - a) * original[orig_tail] + a * proc[tail];
  }
}

}  // namespace

std::string_view to_string(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::pink_noise: return "pink_noise";
    case DistortionKind::random_phase: return "random_phase";
    case DistortionKind::pitch_shift: return "pitch_shift";
    case DistortionKind::vowel_stretch: return "vowel_stretch";
  }
  return "pink_noise";
}

std::optional<DistortionKind> distortion_kind_from_string(std::string_view s) {
  if (s == "pink_noise") return DistortionKind::pink_noise;
  if (s == "random_phase") return DistortionKind::random_phase;
  if (s == "pitch_shift") return DistortionKind::pitch_shift;
  if (s == "vowel_stretch") return DistortionKind::vowel_stretch;
  return std::nullopt;
}

SegmentClass constraint_class(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::pink_noise: return SegmentClass::fricative;
    case DistortionKind::random_phase: return SegmentClass::voiced;
    case DistortionKind::pitch_shift: return SegmentClass::pitched;
    case DistortionKind::vowel_stretch: return SegmentClass::vowel;
  }
  return SegmentClass::other;
}

double TimelineMap::map(double pre_seconds) const {
  if (nodes.empty()) return pre_seconds;
  if (pre_seconds <= nodes.front().first) return pre_seconds;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (pre_seconds <= nodes[i + 1].first) {
      const auto& [p0, q0] = nodes[i];
      const auto& [p1, q1] = nodes[i + 1];
      if (p1 == p0) return q1;
      return q0 + (pre_seconds - p0) * (q1 - q0) / (p1 - p0);
    }
  }
  return pre_seconds + (nodes.back().second - nodes.back().first);
}

double TimelineMap::inverse(double post_seconds) const {
  if (nodes.empty()) return post_seconds;
  if (post_seconds <= nodes.front().second) return post_seconds;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (post_seconds <= nodes[i + 1].second) {
      const auto& [p0, q0] = nodes[i];
      const auto& [p1, q1] = nodes[i + 1];
      if (q1 == q0) return p1;
      return p0 + (post_seconds - q0) * (p1 - p0) / (q1 - q0);
    }
  }
  return post_seconds - (nodes.back().second - nodes.back().first);
}

DistortionRecord sample_plan(const AlignmentTrack& track, std::uint64_t seed,
                             const PlanOptions& options) {
  if (options.n_areas < 1) fail("sample_plan: n_areas must be >= 1");
  if (!(options.min_duration > 0.0) || options.max_duration < options.min_duration) {
    fail("sample_plan: invalid duration range");
  }
  if (options.allowed.empty()) fail("sample_plan: empty distortion class set");

  // Eligible onsets per class, in canonical class order.
  std::vector<std::pair<DistortionKind, std::vector<EligibleOnset>>> eligible;
  for (DistortionKind kind : kAllDistortionKinds) {
    if (std::find(options.allowed.begin(), options.allowed.end(), kind) ==
        options.allowed.end()) {
      continue;
    }
    auto onsets = eligible_onsets(track, constraint_class(kind), options.min_duration);
    if (!onsets.empty()) eligible.emplace_back(kind, std::move(onsets));
  }
  if (eligible.empty()) {
    fail("sample_plan: no eligible constraint segments for any distortion class in '",
         track.utterance_id, "'");
  }

  // Prefer classes that can host the full number of areas.
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    if (eligible[i].second.size() >= static_cast<std::size_t>(options.n_areas)) pool.push_back(i);
  }
  if (pool.empty()) {
    for (std::size_t i = 0; i < eligible.size(); ++i) pool.push_back(i);
  }

  Rng rng(seed);
  const auto& chosen = eligible[pool[rng.integer(pool.size())]];

  DistortionRecord record;
  record.utterance_id = track.utterance_id;
  record.kind = chosen.first;
  record.seed = seed;
  record.requested_areas = options.n_areas;

  // Class-level parameter draws, in a fixed order.
  if (record.kind == DistortionKind::pitch_shift) {
    record.pitch_magnitude = rng.uniform() < 0.5 ? std::pow(2.0, 0.25) : std::pow(2.0, 0.5);
  } else if (record.kind == DistortionKind::vowel_stretch) {
    record.stretch_factor = rng.uniform(2.0, 3.0);
  }

  auto onsets = chosen.second;
  rng.shuffle(onsets);

  std::vector<Interval> accepted;
  std::vector<double> ratios;
  std::size_t cursor = 0;
  for (int area = 0; area < options.n_areas && cursor < onsets.size(); ++area) {
    for (int attempt = 0; attempt < kMaxPlacementAttempts && cursor < onsets.size(); ++attempt) {
      const EligibleOnset cand = onsets[cursor++];
      const double duration =
          std::min(rng.uniform(options.min_duration, options.max_duration), cand.max_duration);
      const Interval interval{cand.onset, cand.onset + duration};
      const bool collides = std::any_of(accepted.begin(), accepted.end(), [&](const Interval& x) {
        return intervals_overlap(interval, x);
      });
      if (collides) continue;
      accepted.push_back(interval);
      if (record.kind == DistortionKind::pitch_shift) {
        const double direction = rng.uniform() < 0.5 ? 1.0 : -1.0;
        ratios.push_back(std::pow(record.pitch_magnitude, direction));
      }
      break;
    }
  }
  if (accepted.empty()) {
    fail("sample_plan: could not place any distortion area in '", track.utterance_id, "'");
  }

  std::vector<std::size_t> order(accepted.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return accepted[a].onset < accepted[b].onset; });
  for (std::size_t i : order) {
    record.source_events.push_back(accepted[i]);
    if (!ratios.empty()) record.area_pitch_ratios.push_back(ratios[i]);
  }
  record.events = record.source_events;
  return record;
}

std::pair<AudioBuffer, DistortionRecord> inject(const AudioBuffer& buffer,
                                                const DistortionRecord& plan) {
  const std::uint32_t sr = buffer.sample_rate;
  if (sr == 0) fail("inject: buffer has no sample rate");
  const std::size_t n = buffer.samples.size();
  for (const auto& ev : plan.source_events) {
    if (ev.onset < 0.0 || !(ev.offset > ev.onset) || to_sample(ev.offset, sr) > n) {
      fail("inject: area [", ev.onset, ", ", ev.offset, ") does not fit the audio of '",
           plan.utterance_id, "' (plan/audio mismatch)");
    }
  }

  DistortionRecord record = plan;
  AudioBuffer out;
  out.sample_rate = sr;
  const std::size_t fade = to_sample(kFadeSeconds, sr);

  if (plan.kind == DistortionKind::vowel_stretch) {
    const double factor = plan.stretch_factor;
    if (!(factor > 0.0)) fail("inject: vowel_stretch plan lacks a stretch factor");
    record.events.clear();
    record.timeline.nodes.clear();
    record.timeline.nodes.emplace_back(0.0, 0.0);
    out.samples.clear();
    std::size_t cursor = 0;
    for (const auto& ev : plan.source_events) {
      const std::size_t a = to_sample(ev.onset, sr);
      const std::size_t b = to_sample(ev.offset, sr);
      out.samples.insert(out.samples.end(), buffer.samples.begin() + cursor,
                         buffer.samples.begin() + a);
      AudioBuffer segment{{buffer.samples.begin() + a, buffer.samples.begin() + b}, sr};
      AudioBuffer stretched = time_stretch(segment, factor);
      const std::size_t post_start = out.samples.size();
      out.samples.resize(post_start + stretched.samples.size());
      splice_with_fades(out.samples, post_start, segment.samples, stretched.samples, fade);
      const std::size_t post_end = out.samples.size();
      record.events.push_back({static_cast<double>(post_start) / sr,
                               static_cast<double>(post_end) / sr});
      record.timeline.nodes.emplace_back(ev.onset, static_cast<double>(post_start) / sr);
      record.timeline.nodes.emplace_back(ev.offset, static_cast<double>(post_end) / sr);
      cursor = b;
    }
    out.samples.insert(out.samples.end(), buffer.samples.begin() + cursor, buffer.samples.end());
    record.timeline.nodes.emplace_back(buffer.duration(), out.duration());
  } else {
    out.samples = buffer.samples;
    for (std::size_t i = 0; i < plan.source_events.size(); ++i) {
      const auto& ev = plan.source_events[i];
      const std::size_t a = to_sample(ev.onset, sr);
      const std::size_t b = to_sample(ev.offset, sr);
      const std::size_t len = b - a;
      std::span<const double> original(buffer.samples.data() + a, len);
      switch (plan.kind) {
        case DistortionKind::pink_noise: {
          AudioBuffer noise = pink_noise(len, plan.noise_sigma, area_seed(plan.seed, i), sr);
          const std::size_t f = std::min(fade, len / 2);
          for (std::size_t k = 0; k < f; ++k) {
            const double ramp = static_cast<double>(k) / static_cast<double>(f);
            noise.samples[k] *= ramp;
            noise.samples[len - 1 - k] *= ramp;
          }
          for (std::size_t k = 0; k < len; ++k) out.samples[a + k] += noise.samples[k];
          break;
        }
        case DistortionKind::random_phase: {
          AudioBuffer segment{{original.begin(), original.end()}, sr};
          AudioBuffer proc = phase_randomize(segment, area_seed(plan.seed, i));
          splice_with_fades(out.samples, a, original, proc.samples, fade);
          break;
        }
        case DistortionKind::pitch_shift: {
          if (i >= plan.area_pitch_ratios.size()) {
            fail("inject: pitch_shift plan lacks a per-area ratio");
          }
          AudioBuffer segment{{original.begin(), original.end()}, sr};
          AudioBuffer proc = pitch_shift(segment, plan.area_pitch_ratios[i]);
          splice_with_fades(out.samples, a, original, proc.samples, fade);
          break;
        }
        case DistortionKind::vowel_stretch:
          break;  // handled above
      }
    }
  }

  std::size_t clipped = 0;
  for (double& x : out.samples) {
    if (x > 1.0) {
      x = 1.0;
      ++clipped;
    } else if (x < -1.0) {
      x = -1.0;
      ++clipped;
    }
  }
  record.clipped_samples = clipped;
  return {std::move(out), std::move(record)};
}

void write_ground_truth(std::span<const DistortionRecord> records,
                        const std::filesystem::path& path) {
  struct Row {
    std::string id;
    Interval event;
    std::string klass;
    std::uint64_t seed;
  };
  std::vector<Row> rows;
  for (const auto& rec : records) {
    for (const auto& ev : rec.events) {
      rows.push_back({rec.utterance_id, ev, std::string(to_string(rec.kind)), rec.seed});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.id != b.id) return a.id < b.id;
    return a.event.onset < b.event.onset;
  });

  std::ofstream outstream(path, std::ios::trunc);
  if (!outstream) fail("cannot write ground truth file: ", path.string());
  outstream << "utterance_id\tonset\toffset\tclass\tseed\n";
  outstream.precision(17);
  for (const auto& row : rows) {
    outstream << row.id << '\t' << row.event.onset << '\t' << row.event.offset << '\t'
              << row.klass << '\t' << row.seed << '\n';
  }
  if (!outstream) fail("short write to ground truth file: ", path.string());
}

}  // namespace framescore
