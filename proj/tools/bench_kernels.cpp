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
//
// Compares the OpenMP kernels against their serial references on
// utterance-scale workloads. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "framescore/kernels.hpp"
#include "framescore/rng.hpp"
#include "framescore/scoring.hpp"
#include "framescore/stft.hpp"

using namespace framescore;

namespace {

constexpr std::size_t kFft = 1024;
constexpr std::size_t kHop = 256;

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-0.5, 0.5);
  return x;
}

struct StftSetup {
  std::vector<double> padded;
  std::vector<double> window = make_window("hann", kFft);
  std::size_t n_frames;
  std::vector<std::complex<double>> out;

  explicit StftSetup(std::size_t seconds) {
    const std::size_t n = seconds * 16000;
    padded = random_signal(n + kFft, 1);
    n_frames = n / kHop + 1;
    out.resize(n_frames * (kFft / 2 + 1));
  }
};

void BM_StftFramesSerial(benchmark::State& state) {
  StftSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::serial::stft_frames(s.padded, kFft, kHop, s.window, s.n_frames, s.out.data());
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_StftFramesSerial)->Arg(10)->Arg(60);

void BM_StftFramesParallel(benchmark::State& state) {
  StftSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::stft_frames(s.padded, kFft, kHop, s.window, s.n_frames, s.out.data());
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_StftFramesParallel)->Arg(10)->Arg(60);

void BM_IstftSerial(benchmark::State& state) {
  StftSetup s(static_cast<std::size_t>(state.range(0)));
  kernels::stft_frames(s.padded, kFft, kHop, s.window, s.n_frames, s.out.data());
  std::vector<double> synth((s.n_frames - 1) * kHop + kFft);
  for (auto _ : state) {
    kernels::serial::istft_overlap_add(s.out.data(), s.n_frames, kFft, kHop, s.window, synth);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_IstftSerial)->Arg(10)->Arg(60);

void BM_IstftParallel(benchmark::State& state) {
  StftSetup s(static_cast<std::size_t>(state.range(0)));
  kernels::stft_frames(s.padded, kFft, kHop, s.window, s.n_frames, s.out.data());
  std::vector<double> synth((s.n_frames - 1) * kHop + kFft);
  for (auto _ : state) {
    kernels::istft_overlap_add(s.out.data(), s.n_frames, kFft, kHop, s.window, synth);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_IstftParallel)->Arg(10)->Arg(60);

void BM_MedianFilterSerial(benchmark::State& state) {
  const auto x = random_signal(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    kernels::serial::median_filter_frames(x, 25, y);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_MedianFilterSerial)->Arg(100000)->Arg(1000000);

void BM_MedianFilterParallel(benchmark::State& state) {
  const auto x = random_signal(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    kernels::median_filter_frames(x, 25, y);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_MedianFilterParallel)->Arg(100000)->Arg(1000000);

void BM_OverlapAddSerial(benchmark::State& state) {
  const std::size_t n_chunks = static_cast<std::size_t>(state.range(0));
  const std::size_t fpc = 50, shift = 25;
  const auto flat = random_signal(n_chunks * fpc, 3);
  std::vector<double> out((n_chunks - 1) * shift + fpc);
  for (auto _ : state) {
    kernels::serial::overlap_add_frames(flat.data(), n_chunks, fpc, shift, out);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_OverlapAddSerial)->Arg(1000)->Arg(100000);

void BM_OverlapAddParallel(benchmark::State& state) {
  const std::size_t n_chunks = static_cast<std::size_t>(state.range(0));
  const std::size_t fpc = 50, shift = 25;
  const auto flat = random_signal(n_chunks * fpc, 3);
  std::vector<double> out((n_chunks - 1) * shift + fpc);
  for (auto _ : state) {
    kernels::overlap_add_frames(flat.data(), n_chunks, fpc, shift, out);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_OverlapAddParallel)->Arg(1000)->Arg(100000);

// End-to-end chunked scoring with the reference spectral scorer; thread
// count via --benchmark_context or OMP_NUM_THREADS.
void BM_ScoreUtteranceChunked(benchmark::State& state) {
  AudioBuffer degraded{random_signal(16000 * static_cast<std::size_t>(state.range(0)), 4), 16000};
  AudioBuffer clean = degraded;
  SpectralReferenceScorer scorer;
  ScoreOptions options;
  for (auto _ : state) {
    auto scores = score_utterance(degraded, scorer, options, &clean, "bench");
    benchmark::DoNotOptimize(scores.scores.data());
  }
}
BENCHMARK(BM_ScoreUtteranceChunked)->Arg(5)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
