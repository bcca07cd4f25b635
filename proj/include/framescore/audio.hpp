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

#ifndef FRAMESCORE_AUDIO_HPP
#define FRAMESCORE_AUDIO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "framescore/common.hpp"

namespace framescore {

/// Mono PCM samples at a known sample rate. The unit of all DSP.
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate = 0;

  double duration() const {
    return sample_rate == 0 ? 0.0 : static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class WavDepth { pcm16, float32 };

/// Reads a RIFF/WAVE file (16-bit PCM or 32-bit IEEE float). Multi-channel
/// input is averaged down to mono; the sample rate is preserved.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes mono WAV. 16-bit quantization rounds half away from zero; 32f is
/// bit-exact. Samples outside [-1, 1] are clipped; returns the clip count.
std::size_t write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
                      WavDepth depth = WavDepth::pcm16);

double rms(std::span<const double> samples);

/// RMS level in dB relative to full scale.
double rms_dbfs(const AudioBuffer& buffer);

/// Pure gain so that the output RMS equals target_dbfs. All-zero input is an
/// error.
AudioBuffer loudness_normalize(const AudioBuffer& buffer, double target_dbfs = -18.0);

}  // namespace framescore

#endif  // FRAMESCORE_AUDIO_HPP
