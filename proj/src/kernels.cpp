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

#include "framescore/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "framescore/common.hpp"
#include "framescore/fft.hpp"

namespace framescore::kernels {

namespace {

constexpr double kDenomFloor = 1e-12;

void stft_one_frame(std::span<const double> padded, std::size_t fft_size, std::size_t hop,
                    std::span<const double> window, std::size_t j, std::complex<double>* out,
                    std::vector<double>& frame, std::vector<std::complex<double>>& spec) {
  const std::size_t start = j * hop;
  frame.resize(fft_size);
  for (std::size_t n = 0; n < fft_size; ++n) frame[n] = padded[start + n] * window[n];
  fft::rfft(frame, spec);
  std::copy(spec.begin(), spec.end(), out + j * (fft_size / 2 + 1));
}

// Frames are materialized in the time domain first; then each output sample
// sums its contributors in ascending frame order, which keeps the result
// independent of the thread count.
double istft_sample_at(const std::vector<std::vector<double>>& frames_td, std::size_t n_frames,
                       std::size_t fft_size, std::size_t hop, std::span<const double> window,
                       std::size_t n) {
  std::size_t j_lo = 0;
  if (n >= fft_size) j_lo = (n - fft_size) / hop + 1;
  const std::size_t j_hi = std::min(n_frames - 1, n / hop);
  double num = 0.0, den = 0.0;
  for (std::size_t j = j_lo; j <= j_hi; ++j) {
    const std::size_t k = n - j * hop;
    num += frames_td[j][k] * window[k];
    den += window[k] * window[k];
  }
  return den > kDenomFloor ? num / den : 0.0;
}

std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  // numpy-style 'reflect' without repeating the edge sample.
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return static_cast<std::size_t>(m);
}

double median_at(std::span<const double> in, std::size_t window_frames, std::size_t t,
                 std::vector<double>& scratch) {
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window_frames / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
  scratch.clear();
  for (std::ptrdiff_t d = -half; d <= half; ++d) {
    scratch.push_back(in[reflect_index(static_cast<std::ptrdiff_t>(t) + d, n)]);
  }
  auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(scratch.size() / 2);
  std::nth_element(scratch.begin(), mid, scratch.end());
  return *mid;
}

double ola_at(const double* chunk_frames, std::size_t n_chunks, std::size_t frames_per_chunk,
              std::size_t shift_frames, std::size_t t) {
  std::size_t c_lo = 0;
  if (t >= frames_per_chunk) c_lo = (t - frames_per_chunk) / shift_frames + 1;
  const std::size_t c_hi = std::min(n_chunks - 1, t / shift_frames);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = c_lo; c <= c_hi; ++c) {
    sum += chunk_frames[c * frames_per_chunk + (t - c * shift_frames)];
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double fuse_at(const double* seqs, std::span<const double> weights, std::size_t t_len,
               std::size_t t) {
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) acc += weights[k] * seqs[k * t_len + t];
  return acc;
}

void check_stft_args(std::span<const double> padded, std::size_t fft_size, std::size_t hop,
                     std::span<const double> window, std::size_t n_frames) {
  if (fft_size == 0 || hop == 0) fail("stft_frames: fft_size and hop must be positive");
  if (window.size() != fft_size) fail("stft_frames: window length != fft_size");
  if (n_frames > 0 && (n_frames - 1) * hop + fft_size > padded.size()) {
    fail("stft_frames: padded signal too short for ", n_frames, " frames");
  }
}

std::vector<std::vector<double>> istft_time_frames(const std::complex<double>* spectra,
                                                   std::size_t n_frames, std::size_t fft_size,
                                                   bool parallel) {
  const std::size_t n_bins = fft_size / 2 + 1;
  std::vector<std::vector<double>> frames_td(n_frames);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n_frames; ++j) {
      fft::irfft(std::span<const std::complex<double>>(spectra + j * n_bins, n_bins), fft_size,
                 frames_td[j]);
    }
  } else {
    for (std::size_t j = 0; j < n_frames; ++j) {
      fft::irfft(std::span<const std::complex<double>>(spectra + j * n_bins, n_bins), fft_size,
                 frames_td[j]);
    }
  }
  return frames_td;
}

}  // namespace

void stft_frames(std::span<const double> padded, std::size_t fft_size, std::size_t hop,
                 std::span<const double> window, std::size_t n_frames,
                 std::complex<double>* out) {
  check_stft_args(padded, fft_size, hop, window, n_frames);
#pragma omp parallel
  {
    std::vector<double> frame;
    std::vector<std::complex<double>> spec;
#pragma omp for schedule(static)
    for (std::size_t j = 0; j < n_frames; ++j) {
      stft_one_frame(padded, fft_size, hop, window, j, out, frame, spec);
    }
  }
}

void istft_overlap_add(const std::complex<double>* spectra, std::size_t n_frames,
                       std::size_t fft_size, std::size_t hop, std::span<const double> window,
                       std::span<double> out) {
  if (n_frames == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  auto frames_td = istft_time_frames(spectra, n_frames, fft_size, /*parallel=*/true);
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = istft_sample_at(frames_td, n_frames, fft_size, hop, window, n);
  }
}

void median_filter_frames(std::span<const double> in, std::size_t window_frames,
                          std::span<double> out) {
  if (window_frames % 2 == 0) fail("median_filter_frames: window must be odd");
  if (out.size() != in.size()) fail("median_filter_frames: size mismatch");
  if (in.empty()) return;
  if (window_frames == 1) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
#pragma omp parallel
  {
    std::vector<double> scratch;
    scratch.reserve(window_frames);
#pragma omp for schedule(static)
    for (std::size_t t = 0; t < in.size(); ++t) {
      out[t] = median_at(in, window_frames, t, scratch);
    }
  }
}

void overlap_add_frames(const double* chunk_frames, std::size_t n_chunks,
                        std::size_t frames_per_chunk, std::size_t shift_frames,
                        std::span<double> out) {
  if (n_chunks == 0 || shift_frames == 0) fail("overlap_add_frames: empty input");
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = ola_at(chunk_frames, n_chunks, frames_per_chunk, shift_frames, t);
  }
}

void fuse_frames(const double* seqs, std::span<const double> weights, std::size_t k,
                 std::size_t t, std::span<double> out) {
  if (weights.size() != k) fail("fuse_frames: weight count mismatch");
  if (out.size() != t) fail("fuse_frames: output size mismatch");
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < t; ++i) {
    out[i] = fuse_at(seqs, weights, t, i);
  }
}

namespace serial {

void stft_frames(std::span<const double> padded, std::size_t fft_size, std::size_t hop,
                 std::span<const double> window, std::size_t n_frames,
                 std::complex<double>* out) {
  check_stft_args(padded, fft_size, hop, window, n_frames);
  std::vector<double> frame;
  std::vector<std::complex<double>> spec;
  for (std::size_t j = 0; j < n_frames; ++j) {
    stft_one_frame(padded, fft_size, hop, window, j, out, frame, spec);
  }
}

void istft_overlap_add(const std::complex<double>* spectra, std::size_t n_frames,
                       std::size_t fft_size, std::size_t hop, std::span<const double> window,
                       std::span<double> out) {
  if (n_frames == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  auto frames_td = istft_time_frames(spectra, n_frames, fft_size, /*parallel=*/false);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = istft_sample_at(frames_td, n_frames, fft_size, hop, window, n);
  }
}

void median_filter_frames(std::span<const double> in, std::size_t window_frames,
                          std::span<double> out) {
  if (window_frames % 2 == 0) fail("median_filter_frames: window must be odd");
  if (out.size() != in.size()) fail("median_filter_frames: size mismatch");
  if (in.empty()) return;
  if (window_frames == 1) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  std::vector<double> scratch;
  scratch.reserve(window_frames);
  for (std::size_t t = 0; t < in.size(); ++t) {
    out[t] = median_at(in, window_frames, t, scratch);
  }
}

void overlap_add_frames(const double* chunk_frames, std::size_t n_chunks,
                        std::size_t frames_per_chunk, std::size_t shift_frames,
                        std::span<double> out) {
  if (n_chunks == 0 || shift_frames == 0) fail("overlap_add_frames: empty input");
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = ola_at(chunk_frames, n_chunks, frames_per_chunk, shift_frames, t);
  }
}

void fuse_frames(const double* seqs, std::span<const double> weights, std::size_t k,
                 std::size_t t, std::span<double> out) {
  if (weights.size() != k) fail("fuse_frames: weight count mismatch");
  if (out.size() != t) fail("fuse_frames: output size mismatch");
  for (std::size_t i = 0; i < t; ++i) {
    out[i] = fuse_at(seqs, weights, t, i);
  }
}

}  // namespace serial

}  // namespace framescore::kernels
