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

#include "framescore/noise.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "framescore/fft.hpp"
#include "framescore/rng.hpp"
#include "framescore/stft.hpp"

namespace framescore {

AudioBuffer pink_noise(std::size_t n_samples, double sigma, std::uint64_t seed,
                       std::uint32_t sample_rate) {
  if (n_samples == 0) fail("pink_noise: n_samples must be positive");
  if (sigma <= 0.0) fail("pink_noise: sigma must be positive");

  Rng rng(seed);
  const std::size_t n_bins = n_samples / 2 + 1;
  std::vector<std::complex<double>> spectrum(n_bins, {0.0, 0.0});
  // Bins in ascending order; two Gaussian draws per non-DC bin. The Nyquist
  // bin of an even-length transform must be real, so its imaginary draw is
  // discarded.
  for (std::size_t k = 1; k < n_bins; ++k) {
    const double re = rng.gaussian();
    const double im = rng.gaussian();
    const double shape = 1.0 / std::sqrt(static_cast<double>(k));
    if (n_samples % 2 == 0 && k == n_bins - 1) {
      spectrum[k] = {re * shape, 0.0};
    } else {
      spectrum[k] = {re * shape, im * shape};
    }
  }

  AudioBuffer out;
  out.sample_rate = sample_rate;
  fft::irfft(spectrum, n_samples, out.samples);

  double m = 0.0;
  for (double x : out.samples) m += x;
  m /= static_cast<double>(n_samples);
  double var = 0.0;
  for (double x : out.samples) var += (x - m) * (x - m);
  const double sd = std::sqrt(var / static_cast<double>(n_samples));
  if (sd <= 0.0) fail("pink_noise: degenerate draw");
  const double scale = sigma / sd;
  for (double& x : out.samples) x = (x - m) * scale;
  return out;
}

AudioBuffer phase_randomize(const AudioBuffer& buffer, std::uint64_t seed, std::size_t fft_size,
                            std::size_t hop) {
  if (buffer.samples.size() < fft_size) {
    fail("phase_randomize: input shorter than the analysis window (", buffer.samples.size(),
         " < ", fft_size, " samples)");
  }
  Spectrogram spec = stft(buffer, fft_size, hop, "hann");

  Rng rng(seed);
  const std::size_t nyquist = spec.n_bins() - 1;
  // Frames ascending, bins ascending; one draw per bin.
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    for (std::size_t k = 0; k < spec.n_bins(); ++k) {
      const double mag = std::abs(spec.at(t, k));
      if (k == 0 || k == nyquist) {
        spec.at(t, k) = {rng.uniform() < 0.5 ? -mag : mag, 0.0};
      } else {
        const double phase = std::numbers::pi * (2.0 * rng.uniform() - 1.0);
        spec.at(t, k) = std::polar(mag, phase);
      }
    }
  }

  AudioBuffer out = istft(spec);
  out.samples.resize(buffer.samples.size(), 0.0);
  return out;
}

}  // namespace framescore
