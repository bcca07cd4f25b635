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

#ifndef FRAMESCORE_SCORING_HPP
#define FRAMESCORE_SCORING_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framescore/audio.hpp"

namespace framescore {

/// Per-frame scalar quality scores at a fixed frame rate.
struct FrameScoreSequence {
  std::string utterance_id;
  std::vector<double> scores;
  double frame_rate = 50.0;
  /// Set to (beta - gamma, beta + gamma) by range_clip; (1, 5) with defaults.
  std::optional<std::pair<double, double>> valid_range;
};

/// ceil(n_samples * frame_rate / sample_rate), the frame count convention
/// used throughout.
std::size_t frame_count(std::size_t n_samples, double frame_rate, std::uint32_t sample_rate);

struct ChunkPlan {
  std::size_t block_samples = 0;
  std::size_t shift_samples = 0;
  std::size_t n_chunks = 0;
  std::size_t pad_samples = 0;  // zeros appended to the final chunk
};

/// ceil((N - B) / M + 1) blocks of length B at shift M; signals shorter
/// than B become a single zero-padded block.
ChunkPlan make_chunk_plan(std::size_t n_samples, std::size_t block, std::size_t shift);

/// Materialized fixed-size chunks; chunk i starts at sample i * shift.
std::vector<std::vector<double>> chunk_signal(const AudioBuffer& buffer, std::size_t block,
                                              std::size_t shift);

/// Multi-resolution configuration. Weights are stored as logits and
/// softmax-normalized, so they are always nonnegative and sum to one.
struct ResolutionFusion {
  std::vector<double> block_seconds{1.0, 0.6, 0.4};
  double shift_fraction = 0.5;  // shift = fraction * block
  std::vector<double> weight_logits;  // empty -> uniform

  std::vector<double> weights() const;
};

struct ChunkContext {
  std::size_t index = 0;
  std::size_t sample_offset = 0;
  std::size_t block_samples = 0;
  std::size_t valid_samples = 0;  // non-padding samples in this chunk
  std::uint32_t sample_rate = 0;
  double frame_rate = 50.0;
};

/// Maps one audio chunk (plus an optional clean reference chunk) to raw
/// per-frame scores. Implementations must be stateless across chunks; the
/// pipeline may score chunks concurrently.
class FrameScorer {
 public:
  virtual ~FrameScorer() = default;
  virtual bool needs_reference() const { return false; }
  /// clean is empty unless needs_reference(). Must return about one score
  /// per frame of the chunk; outputs are truncated or edge-padded to the
  /// expected frame count.
  virtual std::vector<double> score_chunk(std::span<const double> degraded,
                                          std::span<const double> clean,
                                          const ChunkContext& ctx) const = 0;
};

class ConstantScorer final : public FrameScorer {
 public:
  explicit ConstantScorer(double raw = 0.0) : raw_(raw) {}
  std::vector<double> score_chunk(std::span<const double> degraded, std::span<const double>,
                                  const ChunkContext& ctx) const override;

 private:
  double raw_;
};

/// Serves precomputed full-utterance scores (e.g. exported from a trained
/// model); chunked processing slices by the chunk's frame offset.
class FileBackedScorer final : public FrameScorer {
 public:
  FileBackedScorer(std::vector<double> scores, double frame_rate)
      : scores_(std::move(scores)), frame_rate_(frame_rate) {}
  std::vector<double> score_chunk(std::span<const double> degraded, std::span<const double>,
                                  const ChunkContext& ctx) const override;

 private:
  std::vector<double> scores_;
  double frame_rate_;
};

/// Reference-based stand-in scorer: per STFT frame at the score frame rate,
/// raw = offset - slope * d where d is the mean absolute log-magnitude
/// distance between the degraded and clean frame (magnitudes floored at
/// 1e-8). Frame-local within the chunk by construction.
class SpectralReferenceScorer final : public FrameScorer {
 public:
  explicit SpectralReferenceScorer(double offset = 1.5, double slope = 1.0,
                                   std::size_t fft_size = 1024)
      : offset_(offset), slope_(slope), fft_size_(fft_size) {}
  bool needs_reference() const override { return true; }
  std::vector<double> score_chunk(std::span<const double> degraded, std::span<const double> clean,
                                  const ChunkContext& ctx) const override;

 private:
  double offset_;
  double slope_;
  std::size_t fft_size_;
};

/// Uniform-weight overlap-add of per-chunk frame sequences, trimmed to
/// total_frames. shift_samples must be frame-aligned.
std::vector<double> overlap_add(const std::vector<std::vector<double>>& chunk_outputs,
                                std::size_t shift_samples, double frame_rate,
                                std::uint32_t sample_rate, std::size_t total_frames);

/// Elementwise convex combination of equally long sequences.
std::vector<double> fuse_resolutions(const std::vector<std::vector<double>>& per_resolution,
                                     std::span<const double> weights);

/// s = gamma * tanh(raw) + beta, mapping raw scores into the MOS range.
FrameScoreSequence range_clip(const FrameScoreSequence& raw, double gamma = 2.0,
                              double beta = 3.0);

/// Arithmetic mean of the frame scores.
double pool_utterance_score(const FrameScoreSequence& scores);

/// Running median; the window is the largest odd frame count not exceeding
/// round(length_ms * frame_rate / 1000), minimum 1. length_ms == 0 is the
/// identity.
FrameScoreSequence median_filter(const FrameScoreSequence& scores, double length_ms);

struct ScoreOptions {
  /// Multi-resolution chunking; nullopt scores the whole utterance as one
  /// block (global context).
  std::optional<ResolutionFusion> fusion = ResolutionFusion{};
  bool clip = true;
  double gamma = 2.0;
  double beta = 3.0;
  double frame_rate = 50.0;
  double target_dbfs = -18.0;
};

/// The full pipeline: loudness-normalize, chunk at each resolution, score
/// chunks independently, overlap-add, fuse resolutions, range-clip. Chunk
/// scoring is parallel; the result is identical to sequential evaluation.
FrameScoreSequence score_utterance(const AudioBuffer& degraded, const FrameScorer& scorer,
                                   const ScoreOptions& options = {},
                                   const AudioBuffer* clean = nullptr,
                                   const std::string& utterance_id = "");

/// Score files: text (one value per line) or binary little-endian float32
/// (`.f32`) with a JSON sidecar `{"frame_rate": ..., "count": ...}` at
/// path + ".json".
void write_score_file(const FrameScoreSequence& scores, const std::filesystem::path& path,
                      bool binary = false);
FrameScoreSequence read_score_file(const std::filesystem::path& path,
                                   double default_frame_rate = 50.0);

}  // namespace framescore

#endif  // FRAMESCORE_SCORING_HPP
