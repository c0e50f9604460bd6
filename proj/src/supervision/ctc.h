// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/types.h"

namespace past {

// Character inventory for transcripts: a-z, space, apostrophe. The CTC blank
// is appended after the last symbol.
class CharSet {
 public:
  static constexpr const char* kSymbols = "abcdefghijklmnopqrstuvwxyz '";
  static constexpr int kSize = 28;
  static constexpr int kBlank = kSize;
  static constexpr int kClasses = kSize + 1;

  // Throws a data error on characters outside the inventory.
  static std::vector<int> Encode(const std::string& text);
  static std::string Decode(std::span<const int> ids);
  static bool Contains(char c);
};

// Class-major logits: logits[k * frames + t]. The last class is the blank.
struct CharPosterior {
  int classes = CharSet::kClasses;
  int frames = 0;
  std::vector<float> logits;

  float at(int k, int t) const { return logits[static_cast<size_t>(k) * frames + t]; }
  // Frame-wise log-softmax, time-major (t * classes + k), in double.
  std::vector<double> LogSoftmaxTimeMajor() const;
};

struct PhonePosterior {
  int classes = 0;
  int frames = 0;
  std::vector<float> logits;  // class-major

  float at(int k, int t) const { return logits[static_cast<size_t>(k) * frames + t]; }
};

// Frames needed to emit `targets`: one per label plus a blank between each
// pair of equal neighbours.
int CtcMinFrames(std::span<const int> targets);

struct CtcResult {
  double loss = 0.0;               // -log p(targets | input)
  std::vector<double> grad;        // d loss / d log_probs, time-major T x C
};

// Forward-backward over normalized log-probabilities (time-major, T x C).
// Throws an argument error for T == 0 or when the targets cannot fit in T
// frames.
CtcResult CtcForwardBackward(std::span<const double> log_probs, int frames,
                             int classes, std::span<const int> targets, int blank,
                             bool want_grad);

// Unnormalized negative log-likelihood of `transcript` under `posterior`.
double CtcLoss(const CharPosterior& posterior, const std::string& transcript);

// Framewise argmax, merge repeats, drop blanks.
std::vector<int> CtcGreedyIds(const CharPosterior& posterior);
std::string CtcGreedyDecode(const CharPosterior& posterior);

// Mean framewise cross-entropy over frames with a valid label (label >= 0).
// Returns 0 when the bundle carries no phoneme supervision. Labels outside
// [0, classes) raise a data error.
double PhonemeCrossEntropy(const PhonePosterior& posterior,
                           const SupervisionBundle& bundle);

}  // namespace past
