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

#include "framescore/alignment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace framescore {

namespace {

constexpr double kOffsetTolerance = 1e-3;  // 1 ms

// Voicing detector defaults.
constexpr double kVoicingWindowS = 0.025;
constexpr double kVoicingHopS = 0.010;
constexpr double kVoicingAutocorrThreshold = 0.45;
constexpr double kVoicingRmsFraction = 0.05;
constexpr double kVoicingMinSegmentS = 0.050;
constexpr double kVoicingF0Lo = 60.0;
constexpr double kVoicingF0Hi = 400.0;

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

double parse_seconds(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(path.string(), " line ", line, ": cannot parse time value '", s, "'");
  }
}

}  // namespace

std::string_view to_string(SegmentClass klass) {
  switch (klass) {
    case SegmentClass::fricative: return "fricative";
    case SegmentClass::vowel: return "vowel";
    case SegmentClass::voiced: return "voiced";
    case SegmentClass::pitched: return "pitched";
    case SegmentClass::other: return "other";
  }
  return "other";
}

std::optional<SegmentClass> segment_class_from_string(std::string_view s) {
  if (s == "fricative") return SegmentClass::fricative;
  if (s == "vowel") return SegmentClass::vowel;
  if (s == "voiced") return SegmentClass::voiced;
  if (s == "pitched") return SegmentClass::pitched;
  if (s == "other") return SegmentClass::other;
  return std::nullopt;
}

AlignmentTrack normalize_track(AlignmentTrack track) {
  for (const auto& seg : track.segments) {
    if (!(seg.offset > seg.onset)) {
      fail("segment [", seg.onset, ", ", seg.offset, ") in ", track.utterance_id,
           " has offset <= onset");
    }
    if (seg.onset < 0.0) fail("segment with negative onset in ", track.utterance_id);
  }
  if (track.duration <= 0.0) {
    for (const auto& seg : track.segments) track.duration = std::max(track.duration, seg.offset);
  }
  for (const auto& seg : track.segments) {
    if (seg.offset > track.duration + kOffsetTolerance) {
      fail("segment offset ", seg.offset, " exceeds utterance duration ", track.duration, " in ",
           track.utterance_id);
    }
  }

  std::stable_sort(track.segments.begin(), track.segments.end(),
                   [](const SegmentAnnotation& a, const SegmentAnnotation& b) {
                     if (a.onset != b.onset) return a.onset < b.onset;
                     return a.klass < b.klass;
                   });

  // Merge overlapping segments per class; the earlier label wins.
  std::vector<SegmentAnnotation> merged;
  for (const auto& seg : track.segments) {
    SegmentAnnotation* last = nullptr;
    for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
      if (it->klass == seg.klass) {
        last = &*it;
        break;
      }
    }
    if (last != nullptr && seg.onset <= last->offset) {
      last->offset = std::max(last->offset, seg.offset);
    } else {
      merged.push_back(seg);
    }
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const SegmentAnnotation& a, const SegmentAnnotation& b) {
                     if (a.onset != b.onset) return a.onset < b.onset;
                     return a.klass < b.klass;
                   });
  track.segments = std::move(merged);
  return track;
}

AlignmentTrack parse_alignment(const std::filesystem::path& path, double duration) {
  std::ifstream in(path);
  if (!in) fail("cannot open alignment file: ", path.string());

  AlignmentTrack track;
  track.utterance_id = path.stem().string();
  track.duration = duration;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(path.string(), ": empty alignment file (header required)");
  ++line_no;
  {
    const auto header = split_tabs(line);
    if (header.size() != 4 || header[0] != "onset" || header[1] != "offset" ||
        header[2] != "label" || header[3] != "class") {
      fail(path.string(), " line 1: expected header 'onset\\toffset\\tlabel\\tclass'");
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      fail(path.string(), " line ", line_no, ": expected 4 tab-separated fields, got ",
           fields.size());
    }
    SegmentAnnotation seg;
    seg.onset = parse_seconds(fields[0], path, line_no);
    seg.offset = parse_seconds(fields[1], path, line_no);
    seg.label = fields[2];
    const auto klass = segment_class_from_string(fields[3]);
    if (!klass) fail(path.string(), " line ", line_no, ": unknown class '", fields[3], "'");
    seg.klass = *klass;
    if (!(seg.offset > seg.onset)) {
      fail(path.string(), " line ", line_no, ": offset ", seg.offset, " <= onset ", seg.onset);
    }
    if (seg.onset < 0.0) fail(path.string(), " line ", line_no, ": negative onset");
    track.segments.push_back(std::move(seg));
  }
  return normalize_track(std::move(track));
}

void serialize_alignment(const AlignmentTrack& track, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot write alignment file: ", path.string());
  out << "onset\toffset\tlabel\tclass\n";
  out.precision(17);
  for (const auto& seg : track.segments) {
    out << seg.onset << '\t' << seg.offset << '\t' << seg.label << '\t' << to_string(seg.klass)
        << '\n';
  }
  if (!out) fail("short write to alignment file: ", path.string());
}

PhoneClassMap default_phone_class_map() {
  PhoneClassMap map;
  for (const char* p : {"S", "SH", "F", "TH", "Z", "ZH", "V", "DH", "HH"}) {
    map[p] = SegmentClass::fricative;
  }
  for (const char* p : {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW",
                        "OY", "UH", "UW"}) {
    map[p] = SegmentClass::vowel;
  }
  return map;
}

PhoneClassMap load_phone_class_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open phone class map: ", path.string());
  PhoneClassMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      fail(path.string(), " line ", line_no, ": expected 'label\\tclass'");
    }
    const auto klass = segment_class_from_string(fields[1]);
    if (!klass) fail(path.string(), " line ", line_no, ": unknown class '", fields[1], "'");
    map[fields[0]] = *klass;
  }
  return map;
}

AlignmentTrack apply_phone_class_map(AlignmentTrack track, const PhoneClassMap& map) {
  for (auto& seg : track.segments) {
    // Strip a trailing stress digit (ARPAbet style, e.g. AA1).
    std::string label = seg.label;
    while (!label.empty() && std::isdigit(static_cast<unsigned char>(label.back()))) {
      label.pop_back();
    }
    const auto it = map.find(label);
    seg.klass = it != map.end() ? it->second : SegmentClass::other;
  }
  return normalize_track(std::move(track));
}

std::vector<SegmentAnnotation> detect_voicing(const AudioBuffer& buffer) {
  std::vector<SegmentAnnotation> out;
  if (buffer.sample_rate < 8000) fail("detect_voicing: sample rate must be >= 8 kHz");
  const std::size_t n = buffer.samples.size();
  const std::size_t win = static_cast<std::size_t>(std::lround(kVoicingWindowS * buffer.sample_rate));
  const std::size_t hop = static_cast<std::size_t>(std::lround(kVoicingHopS * buffer.sample_rate));
  if (n < win || win == 0 || hop == 0) return out;

  const double utt_rms = rms(buffer.samples);
  if (utt_rms <= 0.0) return out;

  const std::size_t lag_lo =
      static_cast<std::size_t>(std::floor(buffer.sample_rate / kVoicingF0Hi));
  const std::size_t lag_hi =
      std::min(win - 1, static_cast<std::size_t>(std::ceil(buffer.sample_rate / kVoicingF0Lo)));

  const std::size_t n_frames = (n - win) / hop + 1;
  std::vector<char> voiced(n_frames, 0);
  std::vector<double> f0(n_frames, 0.0);

#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n_frames; ++j) {
    const double* x = buffer.samples.data() + j * hop;
    double energy = 0.0;
    for (std::size_t i = 0; i < win; ++i) energy += x[i] * x[i];
    const double frame_rms = std::sqrt(energy / static_cast<double>(win));
    if (frame_rms <= kVoicingRmsFraction * utt_rms) continue;

    double best = 0.0;
    std::size_t best_lag = 0;
    for (std::size_t lag = lag_lo; lag <= lag_hi && lag < win; ++lag) {
      double num = 0.0, e0 = 0.0, e1 = 0.0;
      for (std::size_t i = 0; i + lag < win; ++i) {
        num += x[i] * x[i + lag];
        e0 += x[i] * x[i];
        e1 += x[i + lag] * x[i + lag];
      }
      const double den = std::sqrt(e0 * e1);
      if (den <= 0.0) continue;
      const double r = num / den;
      if (r > best) {
        best = r;
        best_lag = lag;
      }
    }
    if (best > kVoicingAutocorrThreshold && best_lag > 0) {
      voiced[j] = 1;
      f0[j] = static_cast<double>(buffer.sample_rate) / static_cast<double>(best_lag);
    }
  }

  // Merge contiguous voiced frames; drop runs shorter than 50 ms.
  std::size_t j = 0;
  while (j < n_frames) {
    if (!voiced[j]) {
      ++j;
      continue;
    }
    std::size_t k = j;
    while (k < n_frames && voiced[k]) ++k;
    const double onset = static_cast<double>(j * hop) / buffer.sample_rate;
    const double offset =
        static_cast<double>(std::min<std::size_t>((k - 1) * hop + win, n)) / buffer.sample_rate;
    if (offset - onset >= kVoicingMinSegmentS) {
      std::vector<double> f0s(f0.begin() + static_cast<std::ptrdiff_t>(j),
                              f0.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(f0s.begin(), f0s.end());
      const double median_f0 = f0s[f0s.size() / 2];
      out.push_back({onset, offset, "voiced", SegmentClass::voiced});
      std::ostringstream label;
      label.precision(6);
      label << "f0=" << median_f0;
      out.push_back({onset, offset, label.str(), SegmentClass::pitched});
    }
    j = k;
  }
  return out;
}

AlignmentTrack with_voicing_fallback(AlignmentTrack track, const AudioBuffer& buffer) {
  const bool has_voiced = std::any_of(track.segments.begin(), track.segments.end(),
                                      [](const auto& s) { return s.klass == SegmentClass::voiced; });
  const bool has_pitched = std::any_of(track.segments.begin(), track.segments.end(),
                                       [](const auto& s) { return s.klass == SegmentClass::pitched; });
  if (has_voiced && has_pitched) return track;
  for (auto& seg : detect_voicing(buffer)) {
    if ((seg.klass == SegmentClass::voiced && !has_voiced) ||
        (seg.klass == SegmentClass::pitched && !has_pitched)) {
      track.segments.push_back(std::move(seg));
    }
  }
  if (track.duration <= 0.0) track.duration = buffer.duration();
  return normalize_track(std::move(track));
}

std::vector<EligibleOnset> eligible_onsets(const AlignmentTrack& track, SegmentClass klass,
                                           double min_duration) {
  std::vector<EligibleOnset> out;
  for (const auto& seg : track.segments) {
    if (seg.klass != klass) continue;
    const double remaining = track.duration - seg.onset;
    if (remaining >= min_duration) out.push_back({seg.onset, remaining});
  }
  return out;
}

}  // namespace framescore
