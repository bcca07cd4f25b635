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

#ifndef FRAMESCORE_NOISE_HPP
#define FRAMESCORE_NOISE_HPP

#include <cstdint>

#include "framescore/audio.hpp"

namespace framescore {

/// 1/f noise: a complex Gaussian spectrum shaped by 1/sqrt(f) (DC zeroed),
/// inverse-transformed and rescaled so the sample standard deviation equals
/// sigma exactly. Pure function of (n_samples, sigma, seed).
AudioBuffer pink_noise(std::size_t n_samples, double sigma, std::uint64_t seed,
                       std::uint32_t sample_rate = 16000);

/// Replaces STFT phases with i.i.d. draws from U(-pi, pi]; DC and Nyquist
/// bins stay real with randomized sign. Magnitudes are preserved per frame;
/// output is trimmed to the input length.
AudioBuffer phase_randomize(const AudioBuffer& buffer, std::uint64_t seed,
                            std::size_t fft_size = 1024, std::size_t hop = 256);

}  // namespace framescore

#endif  // FRAMESCORE_NOISE_HPP
