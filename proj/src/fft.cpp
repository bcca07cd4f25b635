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

#include "framescore/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "framescore/common.hpp"

namespace framescore::fft {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

std::mutex g_plan_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
  static std::map<std::size_t, PlanPair> cache;
  return cache;
}

// Plans are created once per size with FFTW_UNALIGNED so the new-array
// execute functions accept ordinary vector storage.
PlanPair plans_for(std::size_t n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> real(n, 0.0);
  std::vector<std::complex<double>> cplx(n / 2 + 1);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(),
                                   reinterpret_cast<fftw_complex*>(cplx.data()),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                   reinterpret_cast<fftw_complex*>(cplx.data()), real.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p.forward == nullptr || p.inverse == nullptr) fail("FFTW plan creation failed for n=", n);
  cache[n] = p;
  return p;
}

}  // namespace

void rfft(std::span<const double> in, std::vector<std::complex<double>>& out) {
  const std::size_t n = in.size();
  if (n == 0) fail("rfft of empty input");
  out.assign(n / 2 + 1, {0.0, 0.0});
  // FFTW r2c wants non-const input even though it does not modify it.
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(plans_for(n).forward, scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::size_t n, std::vector<double>& out) {
  if (n == 0) fail("irfft with zero output length");
  if (in.size() != n / 2 + 1) {
    fail("irfft spectrum has ", in.size(), " bins, expected ", n / 2 + 1);
  }
  // c2r destroys its input, so run it on a copy.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  out.assign(n, 0.0);
  fftw_execute_dft_c2r(plans_for(n).inverse,
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= scale;
}

}  // namespace framescore::fft
