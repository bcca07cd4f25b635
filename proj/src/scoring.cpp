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

#include "framescore/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "framescore/kernels.hpp"
#include "framescore/stft.hpp"

namespace framescore {

namespace {

constexpr double kMagnitudeFloor = 1e-8;

void check_frame_grid(double frame_rate, std::uint32_t sample_rate) {
  if (frame_rate <= 0.0 || frame_rate != std::floor(frame_rate)) {
    fail("frame_rate must be a positive integer, got ", frame_rate);
  }
  if (sample_rate == 0 || sample_rate % static_cast<std::uint32_t>(frame_rate) != 0) {
    fail("sample rate ", sample_rate, " is not divisible by frame rate ", frame_rate);
  }
}

std::size_t frame_samples(double frame_rate, std::uint32_t sample_rate) {
  check_frame_grid(frame_rate, sample_rate);
  return sample_rate / static_cast<std::uint32_t>(frame_rate);
}

/// Truncate or edge-pad a scorer output to the expected frame count.
std::vector<double> fit_frames(std::vector<double> raw, std::size_t expected) {
  if (raw.empty()) fail("scorer returned an empty frame sequence");
  if (raw.size() > expected) {
    raw.resize(expected);
  } else {
    raw.resize(expected, raw.back());
  }
  return raw;
}

}  // namespace

std::size_t frame_count(std::size_t n_samples, double frame_rate, std::uint32_t sample_rate) {
  check_frame_grid(frame_rate, sample_rate);
  const auto fr = static_cast<std::size_t>(frame_rate);
  return (n_samples * fr + sample_rate - 1) / sample_rate;
}

ChunkPlan make_chunk_plan(std::size_t n_samples, std::size_t block, std::size_t shift) {
  if (block == 0) fail("chunk plan: block length must be positive");
  if (shift == 0 || shift > block) fail("chunk plan: need 0 < shift <= block");
  if (n_samples == 0) fail("chunk plan: empty signal");
  ChunkPlan plan;
  plan.block_samples = block;
  plan.shift_samples = shift;
  if (n_samples <= block) {
    plan.n_chunks = 1;
  } else {
    plan.n_chunks = (n_samples - block + shift - 1) / shift + 1;
  }
  plan.pad_samples = (plan.n_chunks - 1) * shift + block - n_samples;
  return plan;
}

std::vector<std::vector<double>> chunk_signal(const AudioBuffer& buffer, std::size_t block,
                                              std::size_t shift) {
  const ChunkPlan plan = make_chunk_plan(buffer.samples.size(), block, shift);
  std::vector<std::vector<double>> chunks(plan.n_chunks);
  for (std::size_t c = 0; c < plan.n_chunks; ++c) {
    const std::size_t start = c * shift;
    std::vector<double>& chunk = chunks[c];
    chunk.assign(block, 0.0);
    const std::size_t avail = buffer.samples.size() - start;
    const std::size_t m = std::min(block, avail);
    std::copy_n(buffer.samples.begin() + static_cast<std::ptrdiff_t>(start), m, chunk.begin());
  }
  return chunks;
}

std::vector<double> ResolutionFusion::weights() const {
  const std::size_t k = block_seconds.size();
  if (k == 0) fail("ResolutionFusion: no block lengths");
  std::vector<double> logits = weight_logits;
  if (logits.empty()) logits.assign(k, 0.0);
  if (logits.size() != k) fail("ResolutionFusion: ", logits.size(), " logits for ", k, " blocks");
  const double m = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) {
    w[i] = std::exp(logits[i] - m);
    denom += w[i];
  }
  for (double& x : w) x /= denom;
  return w;
}

std::vector<double> ConstantScorer::score_chunk(std::span<const double>, std::span<const double>,
                                                const ChunkContext& ctx) const {
  const std::size_t n = frame_count(ctx.block_samples, ctx.frame_rate, ctx.sample_rate);
  return std::vector<double>(n, raw_);
}

std::vector<double> FileBackedScorer::score_chunk(std::span<const double>,
                                                  std::span<const double>,
                                                  const ChunkContext& ctx) const {
  if (frame_rate_ != ctx.frame_rate) {
    fail("file-backed scores are at ", frame_rate_, " fps but the pipeline runs at ",
         ctx.frame_rate);
  }
  const std::size_t fs = frame_samples(ctx.frame_rate, ctx.sample_rate);
  if (ctx.sample_offset % fs != 0) fail("chunk offset is not frame-aligned");
  const std::size_t frame_offset = ctx.sample_offset / fs;
  const std::size_t n = frame_count(ctx.block_samples, ctx.frame_rate, ctx.sample_rate);
  if (scores_.empty()) fail("file-backed scorer has no scores");
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t src = std::min(frame_offset + t, scores_.size() - 1);
    out[t] = scores_[src];
  }
  return out;
}

std::vector<double> SpectralReferenceScorer::score_chunk(std::span<const double> degraded,
                                                         std::span<const double> clean,
                                                         const ChunkContext& ctx) const {
  if (clean.size() != degraded.size()) {
    fail("spectral reference scorer needs equal-length degraded and clean chunks");
  }
  const std::size_t hop = frame_samples(ctx.frame_rate, ctx.sample_rate);
  if (hop > fft_size_) fail("spectral scorer: frame hop exceeds the FFT size");
  const std::size_t n_frames = frame_count(ctx.block_samples, ctx.frame_rate, ctx.sample_rate);
  const std::size_t half = fft_size_ / 2;
  const std::size_t padded_len =
      std::max((n_frames - 1) * hop + fft_size_, degraded.size() + fft_size_);

  const auto window = make_window("hann", fft_size_);
  const std::size_t n_bins = fft_size_ / 2 + 1;

  std::vector<double> padded_deg(padded_len, 0.0), padded_clean(padded_len, 0.0);
  std::copy(degraded.begin(), degraded.end(), padded_deg.begin() + static_cast<std::ptrdiff_t>(half));
  std::copy(clean.begin(), clean.end(), padded_clean.begin() + static_cast<std::ptrdiff_t>(half));

  std::vector<std::complex<double>> spec_deg(n_frames * n_bins), spec_clean(n_frames * n_bins);
  kernels::stft_frames(padded_deg, fft_size_, hop, window, n_frames, spec_deg.data());
  kernels::stft_frames(padded_clean, fft_size_, hop, window, n_frames, spec_clean.data());

  std::vector<double> raw(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) {
    double dist = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double dm = std::max(std::abs(spec_deg[t * n_bins + k]), kMagnitudeFloor);
      const double cm = std::max(std::abs(spec_clean[t * n_bins + k]), kMagnitudeFloor);
      dist += std::abs(std::log(dm) - std::log(cm));
    }
    raw[t] = offset_ - slope_ * dist / static_cast<double>(n_bins);
  }
  return raw;
}

std::vector<double> overlap_add(const std::vector<std::vector<double>>& chunk_outputs,
                                std::size_t shift_samples, double frame_rate,
                                std::uint32_t sample_rate, std::size_t total_frames) {
  if (chunk_outputs.empty()) fail("overlap_add: no chunks");
  const std::size_t fpc = chunk_outputs.front().size();
  for (const auto& c : chunk_outputs) {
    if (c.size() != fpc) fail("overlap_add: chunks disagree on frame count");
  }
  const std::size_t fs = frame_samples(frame_rate, sample_rate);
  if (shift_samples % fs != 0) {
    fail("overlap_add: shift of ", shift_samples, " samples is not frame-aligned at ", frame_rate,
         " fps");
  }
  const std::size_t shift_frames = shift_samples / fs;
  const std::size_t n_chunks = chunk_outputs.size();
  const std::size_t padded = (n_chunks - 1) * shift_frames + fpc;
  if (total_frames > padded) fail("overlap_add: chunks cover fewer frames than requested");

  std::vector<double> flat(n_chunks * fpc);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    std::copy(chunk_outputs[c].begin(), chunk_outputs[c].end(), flat.begin() + c * fpc);
  }
  std::vector<double> out(padded);
  kernels::overlap_add_frames(flat.data(), n_chunks, fpc, shift_frames, out);
  out.resize(total_frames);
  return out;
}

std::vector<double> fuse_resolutions(const std::vector<std::vector<double>>& per_resolution,
                                     std::span<const double> weights) {
  if (per_resolution.empty()) fail("fuse_resolutions: no sequences");
  if (per_resolution.size() != weights.size()) {
    fail("fuse_resolutions: ", per_resolution.size(), " sequences but ", weights.size(),
         " weights");
  }
  const std::size_t t = per_resolution.front().size();
  for (const auto& seq : per_resolution) {
    if (seq.size() != t) fail("fuse_resolutions: sequence length mismatch");
  }
  std::vector<double> flat(per_resolution.size() * t);
  for (std::size_t k = 0; k < per_resolution.size(); ++k) {
    std::copy(per_resolution[k].begin(), per_resolution[k].end(), flat.begin() + k * t);
  }
  std::vector<double> out(t);
  kernels::fuse_frames(flat.data(), weights, per_resolution.size(), t, out);
  return out;
}

FrameScoreSequence range_clip(const FrameScoreSequence& raw, double gamma, double beta) {
  FrameScoreSequence out = raw;
  for (double& s : out.scores) {
    if (!std::isfinite(s)) fail("range_clip: non-finite raw score");
    s = gamma * std::tanh(s) + beta;
  }
  out.valid_range = std::make_pair(beta - gamma, beta + gamma);
  return out;
}

double pool_utterance_score(const FrameScoreSequence& scores) {
  if (scores.scores.empty()) fail("pool_utterance_score: empty sequence");
  return mean(scores.scores);
}

FrameScoreSequence median_filter(const FrameScoreSequence& scores, double length_ms) {
  if (length_ms < 0.0) fail("median_filter: negative length");
  FrameScoreSequence out = scores;
  if (scores.scores.empty()) return out;
  auto window =
      static_cast<std::size_t>(std::lround(length_ms * scores.frame_rate / 1000.0));
  if (window % 2 == 0 && window > 0) --window;
  if (window < 1) window = 1;
  kernels::median_filter_frames(scores.scores, window, out.scores);
  return out;
}

FrameScoreSequence score_utterance(const AudioBuffer& degraded, const FrameScorer& scorer,
                                   const ScoreOptions& options, const AudioBuffer* clean,
                                   const std::string& utterance_id) {
  if (degraded.samples.empty()) fail("score_utterance: empty audio");
  const std::uint32_t sr = degraded.sample_rate;
  const std::size_t fs = frame_samples(options.frame_rate, sr);
  if (scorer.needs_reference()) {
    if (clean == nullptr) fail("score_utterance: scorer requires a clean reference");
    if (clean->samples.size() != degraded.samples.size() || clean->sample_rate != sr) {
      fail("score_utterance: clean reference does not match the degraded audio");
    }
  }

  // Loudness normalization is part of the pipeline contract; silence is
  // passed through unchanged.
  AudioBuffer deg = rms(degraded.samples) > 0.0 ? loudness_normalize(degraded, options.target_dbfs)
                                                : degraded;
  AudioBuffer ref;
  if (scorer.needs_reference()) {
    ref = rms(clean->samples) > 0.0 ? loudness_normalize(*clean, options.target_dbfs) : *clean;
  }

  const std::size_t n = deg.samples.size();
  const std::size_t total_frames = frame_count(n, options.frame_rate, sr);

  // Resolve block/shift pairs in samples.
  std::vector<std::pair<std::size_t, std::size_t>> resolutions;
  std::vector<double> weights;
  if (options.fusion.has_value()) {
    const auto& fusion = *options.fusion;
    weights = fusion.weights();
    for (double seconds : fusion.block_seconds) {
      const auto block = static_cast<std::size_t>(std::llround(seconds * sr));
      if (block == 0 || block % fs != 0) {
        fail("block length ", seconds, " s is not a whole number of frames at ",
             options.frame_rate, " fps");
      }
      const auto shift = static_cast<std::size_t>(
          std::llround(static_cast<double>(block) * fusion.shift_fraction));
      if (shift == 0 || shift > block || shift % fs != 0) {
        fail("block shift ", fusion.shift_fraction, " * ", seconds,
             " s is not a whole number of frames at ", options.frame_rate, " fps");
      }
      resolutions.emplace_back(block, shift);
    }
  } else {
    // Global context: one block spanning the utterance.
    const std::size_t block = (n + fs - 1) / fs * fs;
    resolutions.emplace_back(block, block);
    weights.assign(1, 1.0);
  }

  std::vector<std::vector<double>> per_resolution;
  per_resolution.reserve(resolutions.size());
  for (const auto& [block, shift] : resolutions) {
    const ChunkPlan plan = make_chunk_plan(n, block, shift);
    const auto deg_chunks = chunk_signal(deg, block, shift);
    std::vector<std::vector<double>> ref_chunks;
    if (scorer.needs_reference()) ref_chunks = chunk_signal(ref, block, shift);

    const std::size_t fpc = frame_count(block, options.frame_rate, sr);
    std::vector<std::vector<double>> outputs(plan.n_chunks);
    std::string error;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t c = 0; c < plan.n_chunks; ++c) {
      try {
        ChunkContext ctx;
        ctx.index = c;
        ctx.sample_offset = c * shift;
        ctx.block_samples = block;
        ctx.valid_samples = std::min(block, n - ctx.sample_offset);
        ctx.sample_rate = sr;
        ctx.frame_rate = options.frame_rate;
        std::span<const double> ref_span;
        if (scorer.needs_reference()) ref_span = ref_chunks[c];
        outputs[c] = fit_frames(scorer.score_chunk(deg_chunks[c], ref_span, ctx), fpc);
      } catch (const std::exception& e) {
#pragma omp critical
        if (error.empty()) error = e.what();
      }
    }
    if (!error.empty()) fail("chunk scoring failed: ", error);
    per_resolution.push_back(overlap_add(outputs, shift, options.frame_rate, sr, total_frames));
  }

  FrameScoreSequence result;
  result.utterance_id = utterance_id;
  result.frame_rate = options.frame_rate;
  result.scores = per_resolution.size() == 1 && weights.size() == 1 && weights[0] == 1.0
                      ? std::move(per_resolution.front())
                      : fuse_resolutions(per_resolution, weights);
  if (options.clip) result = range_clip(result, options.gamma, options.beta);
  return result;
}

void write_score_file(const FrameScoreSequence& scores, const std::filesystem::path& path,
                      bool binary) {
  if (binary) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write score file: ", path.string());
    for (double s : scores.scores) {
      const float f = static_cast<float>(s);
      std::uint32_t u = 0;
      std::memcpy(&u, &f, 4);
      const unsigned char bytes[4] = {
          static_cast<unsigned char>(u & 0xFF), static_cast<unsigned char>((u >> 8) & 0xFF),
          static_cast<unsigned char>((u >> 16) & 0xFF),
          static_cast<unsigned char>((u >> 24) & 0xFF)};
      out.write(reinterpret_cast<const char*>(bytes), 4);
    }
    if (!out) fail("short write to score file: ", path.string());
    nlohmann::json sidecar{{"frame_rate", scores.frame_rate}, {"count", scores.scores.size()}};
    std::ofstream side(path.string() + ".json", std::ios::trunc);
    if (!side) fail("cannot write score sidecar for ", path.string());
    side << sidecar.dump(2) << '\n';
  } else {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail("cannot write score file: ", path.string());
    out.precision(17);
    for (double s : scores.scores) out << s << '\n';
    if (!out) fail("short write to score file: ", path.string());
  }
}

FrameScoreSequence read_score_file(const std::filesystem::path& path, double default_frame_rate) {
  FrameScoreSequence seq;
  seq.frame_rate = default_frame_rate;
  std::string stem = path.filename().string();
  if (auto pos = stem.find('.'); pos != std::string::npos) stem.resize(pos);
  seq.utterance_id = stem;

  if (path.extension() == ".f32") {
    std::ifstream side(path.string() + ".json");
    if (!side) fail("missing sidecar for binary score file: ", path.string(), ".json");
    nlohmann::json meta = nlohmann::json::parse(side);
    seq.frame_rate = meta.at("frame_rate").get<double>();
    const auto count = meta.at("count").get<std::size_t>();
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open score file: ", path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() != count * 4) {
      fail("score file ", path.string(), " has ", bytes.size(), " bytes, expected ", count * 4);
    }
    seq.scores.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * i]) |
                        (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                        (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                        (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
      float f = 0.0f;
      std::memcpy(&f, &u, 4);
      seq.scores[i] = static_cast<double>(f);
    }
    return seq;
  }

  std::ifstream in(path);
  if (!in) fail("cannot open score file: ", path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(line, &used);
      seq.scores.push_back(v);
      (void)used;
    } catch (const std::exception&) {
      fail(path.string(), " line ", line_no, ": cannot parse score '", line, "'");
    }
  }
  return seq;
}

}  // namespace framescore
