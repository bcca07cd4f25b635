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

#include "framescore/eval_corr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace framescore {

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) fail("correlation needs at least 2 pairs, got ", n);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) fail("correlation undefined for constant input");
  return sxy / std::sqrt(sxx * syy);
}

/// Average ranks (1-based); ties get the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

void split_pairs(std::span<const RatedPair> pairs, std::vector<double>& t,
                 std::vector<double>& p) {
  t.reserve(pairs.size());
  p.reserve(pairs.size());
  for (const auto& [truth, pred] : pairs) {
    t.push_back(truth);
    p.push_back(pred);
  }
}

}  // namespace

double mse(std::span<const RatedPair> pairs) {
  if (pairs.empty()) fail("mse of empty pair list");
  double acc = 0.0;
  for (const auto& [t, p] : pairs) acc += (t - p) * (t - p);
  return acc / static_cast<double>(pairs.size());
}

double lcc(std::span<const RatedPair> pairs) {
  std::vector<double> t, p;
  split_pairs(pairs, t, p);
  return pearson(t, p);
}

double srcc(std::span<const RatedPair> pairs) {
  std::vector<double> t, p;
  split_pairs(pairs, t, p);
  const auto rt = average_ranks(t);
  const auto rp = average_ranks(p);
  return pearson(rt, rp);
}

CorrMetrics corr_metrics(std::span<const RatedPair> pairs) {
  CorrMetrics m;
  m.count = pairs.size();
  if (!pairs.empty()) m.mse = mse(pairs);
  try {
    m.lcc = lcc(pairs);
  } catch (const Error&) {
  }
  try {
    m.srcc = srcc(pairs);
  } catch (const Error&) {
  }
  return m;
}

CorrMetrics utterance_level(std::span<const RatedUtterance> rated) {
  std::vector<RatedPair> pairs;
  pairs.reserve(rated.size());
  for (const auto& r : rated) pairs.emplace_back(r.true_mos, r.predicted_mos);
  return corr_metrics(pairs);
}

CorrMetrics system_level(std::span<const RatedUtterance> rated) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_system;
  for (const auto& r : rated) {
    if (r.system_id.empty()) fail("system_level: utterance '", r.utterance_id, "' has no system id");
    by_system[r.system_id].first.push_back(r.true_mos);
    by_system[r.system_id].second.push_back(r.predicted_mos);
  }
  if (by_system.size() < 2) {
    fail("system_level needs at least 2 systems, got ", by_system.size());
  }
  std::vector<RatedPair> pairs;
  pairs.reserve(by_system.size());
  for (const auto& [id, tp] : by_system) {
    pairs.emplace_back(mean(tp.first), mean(tp.second));
  }
  return corr_metrics(pairs);
}

double dtw_cost(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) fail("dtw_cost: empty sequence");
  std::vector<double> prev(m), cur(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double c = std::abs(a[0] - b[j]);
    prev[j] = c + (j == 0 ? 0.0 : prev[j - 1]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    cur[0] = std::abs(a[i] - b[0]) + prev[0];
    for (std::size_t j = 1; j < m; ++j) {
      const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = std::abs(a[i] - b[j]) + best;
    }
    prev.swap(cur);
  }
  return prev[m - 1];
}

CouplingReport coupling_analysis(const FrameScoreSequence& before, const FrameScoreSequence& after,
                                 std::span<const Interval> events, double collar,
                                 std::span<const Interval> source_events) {
  if (events.empty()) fail("coupling_analysis: no distortion events");
  if (before.frame_rate != after.frame_rate) {
    fail("coupling_analysis: frame rate mismatch");
  }
  const std::span<const Interval> src = source_events.empty() ? events : source_events;
  const double fr = before.frame_rate;

  CouplingReport report;
  report.collar = collar;

  const auto left_count = [&](const FrameScoreSequence& seq, double first_onset) {
    const double bound = first_onset - collar;
    const auto count = static_cast<std::ptrdiff_t>(std::floor(bound * fr + 1e-9));
    return std::clamp<std::ptrdiff_t>(count, 0,
                                      static_cast<std::ptrdiff_t>(seq.scores.size()));
  };
  const auto right_start = [&](const FrameScoreSequence& seq, double last_offset) {
    const double bound = last_offset + collar;
    const auto start = static_cast<std::ptrdiff_t>(std::ceil(bound * fr - 1e-9));
    return std::clamp<std::ptrdiff_t>(start, 0,
                                      static_cast<std::ptrdiff_t>(seq.scores.size()));
  };

  const auto analyze = [&](std::span<const double> b, std::span<const double> a,
                           std::optional<double>& pcc, std::optional<double>& dtw) {
    const std::size_t len = std::min(b.size(), a.size());
    if (len < 2) return;  // side recorded as missing
    b = b.subspan(0, len);
    a = a.subspan(0, len);
    dtw = dtw_cost(b, a);
    if (std::equal(b.begin(), b.end(), a.begin())) {
      pcc = 1.0;  // bit-identical subsequences, variance-free case included
      return;
    }
    try {
      pcc = pearson(b, a);
    } catch (const Error&) {
    }
  };

  {
    const auto nb = left_count(before, src.front().onset);
    const auto na = left_count(after, events.front().onset);
    analyze(std::span<const double>(before.scores.data(), static_cast<std::size_t>(nb)),
            std::span<const double>(after.scores.data(), static_cast<std::size_t>(na)),
            report.lpcc, report.ldtw);
  }
  {
    const auto sb = right_start(before, src.back().offset);
    const auto sa = right_start(after, events.back().offset);
    analyze(std::span<const double>(before.scores.data() + sb, before.scores.size() - sb),
            std::span<const double>(after.scores.data() + sa, after.scores.size() - sa),
            report.rpcc, report.rdtw);
  }
  return report;
}

double clipped_mse_loss(double pred, double target, double tau) {
  const double diff = pred - target;
  return std::abs(diff) > tau ? diff * diff : 0.0;
}

double contrastive_loss(double pred_i, double pred_j, double target_i, double target_j,
                        double alpha) {
  const double diff = (pred_i - pred_j) - (target_i - target_j);
  return std::max(0.0, std::abs(diff) - alpha);
}

}  // namespace framescore
