// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "supervision/ctc.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "core/errors.h"

namespace past {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

bool CharSet::Contains(char c) {
  return c != '\0' && std::strchr(kSymbols, c) != nullptr;
}

std::vector<int> CharSet::Encode(const std::string& text) {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) {
    PAST_REQUIRE(Contains(c), kData,
                 std::string("character '") + c + "' is outside the transcript alphabet");
    ids.push_back(static_cast<int>(std::strchr(kSymbols, c) - kSymbols));
  }
  return ids;
}

std::string CharSet::Decode(std::span<const int> ids) {
  std::string out;
  for (int id : ids) {
    PAST_REQUIRE(id >= 0 && id < kSize, kData, "character id out of range");
    out.push_back(kSymbols[id]);
  }
  return out;
}

std::vector<double> CharPosterior::LogSoftmaxTimeMajor() const {
  std::vector<double> out(static_cast<size_t>(frames) * classes);
  for (int t = 0; t < frames; ++t) {
    double mx = kNegInf;
    for (int k = 0; k < classes; ++k) mx = std::max(mx, static_cast<double>(at(k, t)));
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) sum += std::exp(at(k, t) - mx);
    const double lse = mx + std::log(sum);
    for (int k = 0; k < classes; ++k) out[static_cast<size_t>(t) * classes + k] = at(k, t) - lse;
  }
  return out;
}

int CtcMinFrames(std::span<const int> targets) {
  int need = static_cast<int>(targets.size());
  for (size_t i = 1; i < targets.size(); ++i)
    if (targets[i] == targets[i - 1]) ++need;
  return need;
}

CtcResult CtcForwardBackward(std::span<const double> log_probs, int frames,
                             int classes, std::span<const int> targets, int blank,
                             bool want_grad) {
  PAST_REQUIRE(frames > 0, kArgument, "CTC on an empty posterior");
  PAST_REQUIRE(log_probs.size() == static_cast<size_t>(frames) * classes, kArgument,
               "CTC log-prob buffer does not match T x C");
  PAST_REQUIRE(blank >= 0 && blank < classes, kArgument, "CTC blank out of range");
  for (int l : targets) {
    PAST_REQUIRE(l >= 0 && l < classes && l != blank, kData, "CTC target label out of range");
  }
  const int need = CtcMinFrames(targets);
  PAST_REQUIRE(need <= frames, kArgument,
               "CTC target needs " + std::to_string(need) + " frames but only " +
                   std::to_string(frames) + " are available");

  // Extended label sequence: blank, l1, blank, l2, ..., blank.
  const int S = 2 * static_cast<int>(targets.size()) + 1;
  std::vector<int> ext(S, blank);
  for (size_t i = 0; i < targets.size(); ++i) ext[2 * i + 1] = targets[i];
  auto lp = [&](int t, int k) { return log_probs[static_cast<size_t>(t) * classes + k]; };
  auto skip_ok = [&](int s) {  // may jump from s-2 to s
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  std::vector<double> alpha(static_cast<size_t>(frames) * S, kNegInf);
  auto A = [&](int t, int s) -> double& { return alpha[static_cast<size_t>(t) * S + s]; };
  A(0, 0) = lp(0, ext[0]);
  if (S > 1) A(0, 1) = lp(0, ext[1]);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = A(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, A(t - 1, s - 1));
      if (skip_ok(s)) acc = LogAdd(acc, A(t - 1, s - 2));
      if (acc != kNegInf) A(t, s) = acc + lp(t, ext[s]);
    }
  }
  double log_p = A(frames - 1, S - 1);
  if (S > 1) log_p = LogAdd(log_p, A(frames - 1, S - 2));
  PAST_REQUIRE(std::isfinite(log_p), kArgument, "CTC target has zero probability");

  CtcResult result;
  result.loss = -log_p;
  if (!want_grad) return result;

  // beta excludes the emission at its own frame.
  std::vector<double> beta(static_cast<size_t>(frames) * S, kNegInf);
  auto B = [&](int t, int s) -> double& { return beta[static_cast<size_t>(t) * S + s]; };
  B(frames - 1, S - 1) = 0.0;
  if (S > 1) B(frames - 1, S - 2) = 0.0;
  for (int t = frames - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double acc = B(t + 1, s) + lp(t + 1, ext[s]);
      if (s + 1 < S) acc = LogAdd(acc, B(t + 1, s + 1) + lp(t + 1, ext[s + 1]));
      if (s + 2 < S && skip_ok(s + 2))
        acc = LogAdd(acc, B(t + 1, s + 2) + lp(t + 1, ext[s + 2]));
      B(t, s) = acc;
    }
  }
  result.grad.assign(static_cast<size_t>(frames) * classes, 0.0);
  for (int t = 0; t < frames; ++t) {
    for (int s = 0; s < S; ++s) {
      const double a = A(t, s), b = B(t, s);
      if (a == kNegInf || b == kNegInf) continue;
      result.grad[static_cast<size_t>(t) * classes + ext[s]] -= std::exp(a + b - log_p);
    }
  }
  return result;
}

double CtcLoss(const CharPosterior& posterior, const std::string& transcript) {
  PAST_REQUIRE(posterior.frames > 0, kArgument, "CTC on an empty posterior");
  PAST_REQUIRE(posterior.classes == CharSet::kClasses, kArgument,
               "character posterior must have |M|+1 rows");
  const std::vector<int> ids = CharSet::Encode(transcript);
  const std::vector<double> lp = posterior.LogSoftmaxTimeMajor();
  return CtcForwardBackward(lp, posterior.frames, posterior.classes, ids,
                            CharSet::kBlank, false)
      .loss;
}

std::vector<int> CtcGreedyIds(const CharPosterior& posterior) {
  std::vector<int> out;
  int prev = -1;
  for (int t = 0; t < posterior.frames; ++t) {
    int best = 0;
    for (int k = 1; k < posterior.classes; ++k)
      if (posterior.at(k, t) > posterior.at(best, t)) best = k;
    if (best != prev && best != posterior.classes - 1) out.push_back(best);
    prev = best;
  }
  return out;
}

std::string CtcGreedyDecode(const CharPosterior& posterior) {
  return CharSet::Decode(CtcGreedyIds(posterior));
}

double PhonemeCrossEntropy(const PhonePosterior& posterior,
                           const SupervisionBundle& bundle) {
  if (!bundle.phoneme_mask) return 0.0;
  PAST_REQUIRE(bundle.phoneme_frames.size() == static_cast<size_t>(posterior.frames),
               kArgument, "phoneme labels do not match the posterior length");
  double total = 0.0;
  int counted = 0;
  for (int t = 0; t < posterior.frames; ++t) {
    const int label = bundle.phoneme_frames[t];
    if (label < 0) continue;
    PAST_REQUIRE(label < posterior.classes, kData,
                 "phoneme label " + std::to_string(label) + " out of range");
    double mx = kNegInf;
    for (int k = 0; k < posterior.classes; ++k)
      mx = std::max(mx, static_cast<double>(posterior.at(k, t)));
    double sum = 0.0;
    for (int k = 0; k < posterior.classes; ++k) sum += std::exp(posterior.at(k, t) - mx);
    total += mx + std::log(sum) - posterior.at(label, t);
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

}  // namespace past
