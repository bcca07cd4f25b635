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

#ifndef FRAMESCORE_STFT_HPP
#define FRAMESCORE_STFT_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "framescore/audio.hpp"

namespace framescore {

struct Spectrogram {
  std::vector<std::complex<double>> frames;  // row-major time x frequency bin
  std::size_t n_frames = 0;
  std::size_t fft_size = 0;
  std::size_t hop = 0;
  std::string window;
  std::uint32_t sample_rate = 0;
  std::size_t signal_length = 0;  // original sample count, for exact istft trim

  std::size_t n_bins() const { return fft_size / 2 + 1; }
  std::complex<double>& at(std::size_t t, std::size_t k) { return frames[t * n_bins() + k]; }
  const std::complex<double>& at(std::size_t t, std::size_t k) const {
    return frames[t * n_bins() + k];
  }
};

/// Supported ids: "hann" (periodic) and "rect".
std::vector<double> make_window(const std::string& id, std::size_t n);

/// Constant-overlap-add check for the analysis configuration: the shifted
/// window copies must sum to a constant (within 1e-9 relative).
bool cola_compliant(const std::string& window, std::size_t fft_size, std::size_t hop);

/// Centered STFT (frames are zero-padded by fft_size/2 on both sides).
/// fft_size must be a power of two, hop <= fft_size, and (window, hop) COLA.
Spectrogram stft(const AudioBuffer& buffer, std::size_t fft_size = 1024, std::size_t hop = 256,
                 const std::string& window = "hann");

/// Overlap-add synthesis with window-square normalization; exact inverse of
/// stft for unmodified spectra.
AudioBuffer istft(const Spectrogram& spec);

}  // namespace framescore

#endif  // FRAMESCORE_STFT_HPP
