// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/types.h"

namespace past {

// ---------------------------------------------------------------------------
// Phone-normalized mutual information

// Joint occurrence counts of (token, phone) pairs. Rows are distinct tokens,
// columns distinct phones, both in ascending id order.
struct JointCountTable {
  std::vector<int32_t> token_ids;
  std::vector<int32_t> phone_ids;
  std::vector<int64_t> counts;  // row-major tokens x phones
  std::vector<int64_t> token_totals;
  std::vector<int64_t> phone_totals;
  int64_t total = 0;

  static JointCountTable Build(std::span<const int32_t> tokens,
                               std::span<const int32_t> phones);
  int64_t at(size_t row, size_t col) const { return counts[row * phone_ids.size() + col]; }
};

// I(X;Y) / H(Y) in nats, with 0 log 0 = 0. Per-token contributions are summed
// in sorted order so the value does not depend on token numbering.
double Pnmi(std::span<const int32_t> tokens, std::span<const int32_t> phones);
double Pnmi(const JointCountTable& table);

// Relabels tokens through `permutation` (old id -> new id). The map must be a
// bijection covering every id that occurs in `tokens`.
std::vector<int32_t> PermuteTokens(std::span<const int32_t> tokens,
                                   const std::map<int32_t, int32_t>& permutation);

// ---------------------------------------------------------------------------
// ABX discriminability

enum class AbxMode { kWithin, kAcross };

struct AbxTriplet {
  LatentSequence a;
  LatentSequence b;
  LatentSequence x;
  int32_t category_a = 0;
  int32_t category_b = 0;
  std::string speaker_a;
  std::string speaker_b;
  std::string speaker_x;
};

// arccos(cosine similarity) / pi, in [0, 1]. Identical frames give exactly 0.
double AngularDistance(std::span<const float> u, std::span<const float> v);

// Minimum over monotone alignment paths (steps (1,0), (0,1), (1,1)) of the
// mean framewise angular distance along the path.
double DtwDistance(const LatentSequence& a, const LatentSequence& b);

// Score of one triplet: 1 if d(A,X) > d(B,X), 0.5 on a tie, else 0.
double AbxTripletError(const AbxTriplet& t);

// Fraction of erroneous triplets. Speaker layout is validated against `mode`.
double AbxError(std::span<const AbxTriplet> triplets, AbxMode mode);

// ---------------------------------------------------------------------------
// Signal metrics

constexpr double kSisnrClampDb = 60.0;

// Scale-invariant SNR in dB after mean removal, clamped to [-60, 60].
double Sisnr(std::span<const float> reference, std::span<const float> estimate);

// ---------------------------------------------------------------------------
// Transcription metrics

enum class ErrorUnit { kChar, kWord };

std::vector<std::string> SplitWords(const std::string& text);

size_t Levenshtein(std::span<const std::string> hyp, std::span<const std::string> ref);
size_t Levenshtein(const std::string& hyp, const std::string& ref);

// Edit distance normalized by reference length.
double ErrorRate(const std::string& hyp, const std::string& ref, ErrorUnit unit);

}  // namespace past
