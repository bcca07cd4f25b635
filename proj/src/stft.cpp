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

#include "framescore/stft.hpp"

#include <cmath>
#include <numbers>

#include "framescore/kernels.hpp"

namespace framescore {

namespace {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::vector<double> make_window(const std::string& id, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (id == "rect") return w;
  if (id == "hann") {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n));
    }
    return w;
  }
  fail("unknown window id: ", id);
}

bool cola_compliant(const std::string& window, std::size_t fft_size, std::size_t hop) {
  if (hop == 0 || hop > fft_size) return false;
  const auto w = make_window(window, fft_size);
  // Tile shifted copies over a span long enough that the center hop period
  // sees full overlap, then check constancy there.
  const std::size_t span = 4 * fft_size;
  std::vector<double> acc(span, 0.0);
  for (std::size_t start = 0; start + fft_size <= span; start += hop) {
    for (std::size_t i = 0; i < fft_size; ++i) acc[start + i] += w[i];
  }
  const std::size_t center = 2 * fft_size - (2 * fft_size) % hop;
  const double ref = acc[center];
  if (ref <= 0.0) return false;
  for (std::size_t i = 0; i < hop; ++i) {
    if (std::abs(acc[center + i] - ref) > 1e-9 * ref) return false;
  }
  return true;
}

Spectrogram stft(const AudioBuffer& buffer, std::size_t fft_size, std::size_t hop,
                 const std::string& window) {
  if (!is_power_of_two(fft_size)) fail("stft: fft_size must be a power of two, got ", fft_size);
  if (hop == 0 || hop > fft_size) fail("stft: need 0 < hop <= fft_size");
  if (!cola_compliant(window, fft_size, hop)) {
    fail("stft: (", window, ", hop=", hop, ", fft=", fft_size, ") is not COLA-compliant");
  }

  const std::size_t n = buffer.samples.size();
  const std::size_t n_frames = n / hop + 1;
  const std::size_t half = fft_size / 2;
  const std::size_t needed = (n_frames - 1) * hop + fft_size;
  std::vector<double> padded(std::max(needed, n + fft_size), 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[half + i] = buffer.samples[i];

  Spectrogram spec;
  spec.fft_size = fft_size;
  spec.hop = hop;
  spec.window = window;
  spec.sample_rate = buffer.sample_rate;
  spec.signal_length = n;
  spec.n_frames = n_frames;
  spec.frames.resize(n_frames * spec.n_bins());

  const auto w = make_window(window, fft_size);
  kernels::stft_frames(padded, fft_size, hop, w, n_frames, spec.frames.data());
  return spec;
}

AudioBuffer istft(const Spectrogram& spec) {
  if (spec.fft_size == 0 || spec.hop == 0 || spec.hop > spec.fft_size) {
    fail("istft: inconsistent spectrogram metadata");
  }
  if (spec.frames.size() != spec.n_frames * spec.n_bins()) {
    fail("istft: frame storage does not match metadata");
  }
  const std::size_t half = spec.fft_size / 2;
  const std::size_t padded_len =
      spec.n_frames == 0 ? 0 : (spec.n_frames - 1) * spec.hop + spec.fft_size;
  if (padded_len < half + spec.signal_length) {
    fail("istft: spectrogram too short for declared signal length");
  }

  const auto w = make_window(spec.window, spec.fft_size);
  std::vector<double> padded(padded_len, 0.0);
  kernels::istft_overlap_add(spec.frames.data(), spec.n_frames, spec.fft_size, spec.hop, w,
                             padded);

  AudioBuffer out;
  out.sample_rate = spec.sample_rate;
  out.samples.assign(padded.begin() + static_cast<std::ptrdiff_t>(half),
                     padded.begin() + static_cast<std::ptrdiff_t>(half + spec.signal_length));
  return out;
}

}  // namespace framescore
