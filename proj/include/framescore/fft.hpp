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

#ifndef FRAMESCORE_FFT_HPP
#define FRAMESCORE_FFT_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace framescore::fft {

// Thin wrappers over FFTW. Plans are cached per transform size and shared;
// execution uses the new-array interface and is safe to call concurrently
// with distinct buffers.

/// Real-to-complex forward transform; out has n/2 + 1 bins, unnormalized.
void rfft(std::span<const double> in, std::vector<std::complex<double>>& out);

/// Complex-to-real inverse of rfft, normalized by 1/n so irfft(rfft(x)) == x.
void irfft(std::span<const std::complex<double>> in, std::size_t n, std::vector<double>& out);

}  // namespace framescore::fft

#endif  // FRAMESCORE_FFT_HPP
