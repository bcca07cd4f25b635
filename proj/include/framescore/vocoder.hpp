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

#ifndef FRAMESCORE_VOCODER_HPP
#define FRAMESCORE_VOCODER_HPP

#include "framescore/audio.hpp"

namespace framescore {

/// Phase-vocoder time stretch with identity phase locking. Output length is
/// round(input length * factor); pitch is preserved. factor in [0.25, 4].
AudioBuffer time_stretch(const AudioBuffer& buffer, double factor);

/// Pitch shift by time-stretching with `ratio` and resampling back, so the
/// duration is preserved exactly and F0 is multiplied by `ratio`.
/// ratio in [0.5, 2].
AudioBuffer pitch_shift(const AudioBuffer& buffer, double ratio);

/// Band-limited windowed-sinc resampler: y[j] = x(j * rate) for
/// j in [0, out_len). Positions beyond the input read zeros.
std::vector<double> resample_sinc(std::span<const double> x, double rate, std::size_t out_len);

}  // namespace framescore

#endif  // FRAMESCORE_VOCODER_HPP
