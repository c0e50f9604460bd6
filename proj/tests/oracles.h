// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Slow, direct reference computations used to check the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "core/types.h"
#include "eval/metrics.h"
#include "supervision/ctc.h"

namespace past::testing {

// -log of the summed probability of every frame labelling that collapses to
// `target` (merge repeats, then drop blanks). log_probs is time-major.
inline double BruteForceCtc(const std::vector<double>& log_probs, int frames, int classes,
                            const std::vector<int>& target, int blank) {
  std::vector<int> path(frames, 0);
  double total = 0.0;
  while (true) {
    std::vector<int> collapsed;
    int prev = -1;
    double lp = 0.0;
    for (int t = 0; t < frames; ++t) {
      lp += log_probs[t * classes + path[t]];
      if (path[t] != blank && path[t] != prev) collapsed.push_back(path[t]);
      prev = path[t];
    }
    if (collapsed == target) total += std::exp(lp);
    int t = 0;
    while (t < frames && ++path[t] == classes) path[t++] = 0;
    if (t == frames) break;
  }
  return -std::log(total);
}

inline std::vector<double> RandomLogSoftmax(int frames, int classes, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  std::vector<double> lp(static_cast<size_t>(frames) * classes);
  for (int t = 0; t < frames; ++t) {
    double m = -1e300;
    for (int k = 0; k < classes; ++k) m = std::max(m, lp[t * classes + k] = g(rng));
    double s = 0.0;
    for (int k = 0; k < classes; ++k) s += std::exp(lp[t * classes + k] - m);
    const double lse = m + std::log(s);
    for (int k = 0; k < classes; ++k) lp[t * classes + k] -= lse;
  }
  return lp;
}

// Up to three labels from [0, labels) that fit in `frames`.
inline std::vector<int> RandomCtcTarget(int labels, int frames, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 3), sym(0, labels - 1);
  while (true) {
    std::vector<int> y(len(rng));
    for (int& v : y) v = sym(rng);
    if (CtcMinFrames(y) <= frames) return y;
  }
}

// (H(X) + H(Y) - H(X, Y)) / H(Y) from raw outcome counts.
inline double PnmiOracle(const std::vector<int32_t>& x, const std::vector<int32_t>& y) {
  std::map<std::pair<int32_t, int32_t>, int> cxy;
  std::map<int32_t, int> cx, cy;
  for (size_t i = 0; i < x.size(); ++i) {
    ++cx[x[i]];
    ++cy[y[i]];
    ++cxy[{x[i], y[i]}];
  }
  const double n = static_cast<double>(x.size());
  auto h = [&](const auto& counts) {
    double e = 0.0;
    for (const auto& [k, c] : counts) e -= c / n * std::log(c / n);
    return e;
  };
  return (h(cx) + h(cy) - h(cxy)) / h(cy);
}

// Minimum mean framewise angular cost over every monotone path, by explicit
// enumeration.
inline double DtwOracle(const LatentSequence& a, const LatentSequence& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double, int)> walk = [&](int i, int j, double sum, int len) {
    sum += AngularDistance(a.Frame(i), b.Frame(j));
    ++len;
    if (i == a.frames - 1 && j == b.frames - 1) {
      best = std::min(best, sum / len);
      return;
    }
    if (i + 1 < a.frames) walk(i + 1, j, sum, len);
    if (j + 1 < b.frames) walk(i, j + 1, sum, len);
    if (i + 1 < a.frames && j + 1 < b.frames) walk(i + 1, j + 1, sum, len);
  };
  walk(0, 0, 0.0, 0);
  return best;
}

template <typename Seq>
size_t LevenshteinOracle(const Seq& a, size_t i, const Seq& b, size_t j) {
  if (i == 0) return j;
  if (j == 0) return i;
  const size_t sub = LevenshteinOracle(a, i - 1, b, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
  const size_t del = LevenshteinOracle(a, i - 1, b, j) + 1;
  const size_t ins = LevenshteinOracle(a, i, b, j - 1) + 1;
  return std::min({sub, del, ins});
}

inline LatentSequence RandomLatent(int channels, int frames, std::mt19937_64& rng) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  LatentSequence z(channels, frames);
  for (float& v : z.values) v = g(rng);
  return z;
}

}  // namespace past::testing
