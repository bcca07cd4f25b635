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

#ifndef FRAMESCORE_KERNELS_HPP
#define FRAMESCORE_KERNELS_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace framescore::kernels {

// Data-parallel inner loops of the pipeline. Each function has an OpenMP
// version (default) and a serial reference under kernels::serial with the
// same signature. Every output element is computed independently with a
// fixed accumulation order, so the two variants produce bit-identical
// results; tests assert that, and tools/bench_kernels compares their speed.

/// Windowed r2c analysis: frame j covers padded[j*hop, j*hop + fft_size).
/// out is row-major n_frames x (fft_size/2 + 1).
void stft_frames(std::span<const double> padded, std::size_t fft_size, std::size_t hop,
                 std::span<const double> window, std::size_t n_frames,
                 std::complex<double>* out);

/// Inverse of stft_frames: per-frame irfft, synthesis windowing, and
/// overlap-add with window-square normalization. out must already be sized
/// to the padded signal length.
void istft_overlap_add(const std::complex<double>* spectra, std::size_t n_frames,
                       std::size_t fft_size, std::size_t hop, std::span<const double> window,
                       std::span<double> out);

/// Running median with reflected edges. window_frames must be odd; 1 is the
/// identity.
void median_filter_frames(std::span<const double> in, std::size_t window_frames,
                          std::span<double> out);

/// Uniform-weight overlap-add of per-chunk frame sequences: out[t] is the
/// mean over chunks whose frame span covers t. chunk_frames is row-major
/// n_chunks x frames_per_chunk; chunk c starts at frame c*shift_frames.
void overlap_add_frames(const double* chunk_frames, std::size_t n_chunks,
                        std::size_t frames_per_chunk, std::size_t shift_frames,
                        std::span<double> out);

/// Elementwise convex combination of k sequences of length t (row-major).
void fuse_frames(const double* seqs, std::span<const double> weights, std::size_t k,
                 std::size_t t, std::span<double> out);

namespace serial {
void stft_frames(std::span<const double> padded, std::size_t fft_size, std::size_t hop,
                 std::span<const double> window, std::size_t n_frames,
                 std::complex<double>* out);
void istft_overlap_add(const std::complex<double>* spectra, std::size_t n_frames,
                       std::size_t fft_size, std::size_t hop, std::span<const double> window,
                       std::span<double> out);
void median_filter_frames(std::span<const double> in, std::size_t window_frames,
                          std::span<double> out);
void overlap_add_frames(const double* chunk_frames, std::size_t n_chunks,
                        std::size_t frames_per_chunk, std::size_t shift_frames,
                        std::span<double> out);
void fuse_frames(const double* seqs, std::span<const double> weights, std::size_t k,
                 std::size_t t, std::span<double> out);
}  // namespace serial

}  // namespace framescore::kernels

#endif  // FRAMESCORE_KERNELS_HPP
