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

#include "framescore/vocoder.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "framescore/fft.hpp"
#include "framescore/kernels.hpp"
#include "framescore/stft.hpp"

namespace framescore {

namespace {

constexpr std::size_t kFft = 1024;
constexpr std::size_t kSynHop = 256;

double wrap_phase(double x) {
  return x - 2.0 * std::numbers::pi * std::round(x / (2.0 * std::numbers::pi));
}

// Local maxima of the magnitude spectrum over a +-2 bin neighborhood.
std::vector<std::size_t> find_peaks(const std::vector<double>& mag) {
  std::vector<std::size_t> peaks;
  if (mag.size() < 5) return peaks;
  for (std::size_t k = 2; k + 2 < mag.size(); ++k) {
    if (mag[k] > 0.0 && mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > mag[k - 2] &&
        mag[k] > mag[k + 2]) {
      peaks.push_back(k);
    }
  }
  return peaks;
}

}  // namespace

AudioBuffer time_stretch(const AudioBuffer& buffer, double factor) {
  if (factor < 0.25 || factor > 4.0) {
    fail("time_stretch: factor ", factor, " outside [0.25, 4]");
  }
  const std::size_t n = buffer.samples.size();
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  if (n == 0) return out;
  const std::size_t n_out = static_cast<std::size_t>(std::llround(n * factor));
  if (n_out == 0) return out;

  // Zero-pad by one FFT on both sides so the analysis and synthesis edges
  // fall outside the retained region.
  const std::size_t padded_n = n + 2 * kFft;
  std::vector<double> padded(padded_n, 0.0);
  std::copy(buffer.samples.begin(), buffer.samples.end(), padded.begin() + kFft);

  const std::size_t target_len =
      static_cast<std::size_t>(std::llround(padded_n * factor)) + kSynHop;
  const std::size_t n_frames =
      (target_len > kFft ? (target_len - kFft + kSynHop - 1) / kSynHop : 0) + 1;

  const auto window = make_window("hann", kFft);
  const std::size_t n_bins = kFft / 2 + 1;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<std::complex<double>> syn_frames(n_frames * n_bins);
  std::vector<double> mag(n_bins), phase(n_bins), prev_phase(n_bins), syn_phase(n_bins),
      new_syn_phase(n_bins);
  std::vector<double> frame(kFft);
  std::vector<std::complex<double>> spec;

  std::size_t prev_analysis = 0;
  for (std::size_t i = 0; i < n_frames; ++i) {
    std::size_t analysis = static_cast<std::size_t>(std::llround(i * kSynHop / factor));
    if (analysis > padded_n - kFft) analysis = padded_n - kFft;

    for (std::size_t m = 0; m < kFft; ++m) frame[m] = padded[analysis + m] * window[m];
    fft::rfft(frame, spec);
    for (std::size_t k = 0; k < n_bins; ++k) {
      mag[k] = std::abs(spec[k]);
      phase[k] = std::arg(spec[k]);
    }

    if (i == 0) {
      syn_phase = phase;
      std::copy(spec.begin(), spec.end(), syn_frames.begin());
    } else {
      const double hop_in =
          static_cast<double>(analysis > prev_analysis ? analysis - prev_analysis : 1);
      const auto peaks = find_peaks(mag);
      if (peaks.empty()) {
        // No tonal structure; propagate every bin independently.
        for (std::size_t k = 0; k < n_bins; ++k) {
          const double omega = two_pi * static_cast<double>(k) / static_cast<double>(kFft);
          const double dev = wrap_phase(phase[k] - prev_phase[k] - omega * hop_in);
          const double inst = omega + dev / hop_in;
          new_syn_phase[k] = wrap_phase(syn_phase[k] + inst * kSynHop);
        }
      } else {
        // Identity phase locking: propagate the peak phases, then rotate
        // each peak's region rigidly with it.
        const auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
        std::size_t p_idx = 0;
        for (std::size_t k = 0; k < n_bins; ++k) {
          while (p_idx + 1 < peaks.size() && dist(peaks[p_idx + 1], k) <= dist(peaks[p_idx], k)) {
            ++p_idx;
          }
          const std::size_t p = peaks[p_idx];
          const double omega = two_pi * static_cast<double>(p) / static_cast<double>(kFft);
          const double dev = wrap_phase(phase[p] - prev_phase[p] - omega * hop_in);
          const double inst = omega + dev / hop_in;
          const double peak_syn = wrap_phase(syn_phase[p] + inst * kSynHop);
          new_syn_phase[k] = wrap_phase(phase[k] + (peak_syn - phase[p]));
        }
      }
      for (std::size_t k = 0; k < n_bins; ++k) {
        syn_frames[i * n_bins + k] = std::polar(mag[k], new_syn_phase[k]);
      }
      syn_phase.swap(new_syn_phase);
    }
    prev_phase = phase;
    prev_analysis = analysis;
  }

  std::vector<double> synth((n_frames - 1) * kSynHop + kFft, 0.0);
  kernels::istft_overlap_add(syn_frames.data(), n_frames, kFft, kSynHop, window, synth);

  const std::size_t lead = static_cast<std::size_t>(std::llround(kFft * factor));
  out.samples.assign(n_out, 0.0);
  for (std::size_t i = 0; i < n_out && lead + i < synth.size(); ++i) {
    out.samples[i] = synth[lead + i];
  }
  return out;
}

std::vector<double> resample_sinc(std::span<const double> x, double rate, std::size_t out_len) {
  std::vector<double> y(out_len, 0.0);
  if (x.empty() || out_len == 0) return y;
  if (rate == 1.0) {
    const std::size_t m = std::min(out_len, x.size());
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), y.begin());
    return y;
  }
  if (rate <= 0.0) fail("resample_sinc: rate must be positive");

  constexpr int kHalfTaps = 32;
  const double cutoff = 0.95 * std::min(1.0, 1.0 / rate);  // relative to Nyquist
  const double pi = std::numbers::pi;

  for (std::size_t j = 0; j < out_len; ++j) {
    const double pos = static_cast<double>(j) * rate;
    const auto center = static_cast<std::ptrdiff_t>(std::floor(pos));
    double acc = 0.0, norm = 0.0;
    for (std::ptrdiff_t t = center - kHalfTaps + 1; t <= center + kHalfTaps; ++t) {
      const double u = pos - static_cast<double>(t);
      const double sinc = u == 0.0 ? 1.0 : std::sin(pi * cutoff * u) / (pi * cutoff * u);
      const double win = 0.5 + 0.5 * std::cos(pi * u / (kHalfTaps + 1));
      const double h = cutoff * sinc * win;
      norm += h;
      if (t >= 0 && t < static_cast<std::ptrdiff_t>(x.size())) {
        acc += h * x[static_cast<std::size_t>(t)];
      }
    }
    y[j] = norm != 0.0 ? acc / norm : 0.0;
  }
  return y;
}

AudioBuffer pitch_shift(const AudioBuffer& buffer, double ratio) {
  if (ratio < 0.5 || ratio > 2.0) fail("pitch_shift: ratio ", ratio, " outside [0.5, 2]");
  AudioBuffer stretched = time_stretch(buffer, ratio);
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples = resample_sinc(stretched.samples, ratio, buffer.samples.size());
  return out;
}

}  // namespace framescore
