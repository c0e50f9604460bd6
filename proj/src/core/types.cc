// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/types.h"

#include "core/errors.h"

namespace past {

std::vector<float> LatentSequence::Frame(int t) const {
  std::vector<float> out(channels);
  for (int c = 0; c < channels; ++c) out[c] = at(c, t);
  return out;
}

std::vector<int32_t> TokenMatrix::Stream(int q) const {
  PAST_REQUIRE(q >= 0 && q < n_q, kArgument, "stream index out of range");
  return {indices.begin() + static_cast<size_t>(q) * frames,
          indices.begin() + static_cast<size_t>(q + 1) * frames};
}

void TokenMatrix::Append(const TokenMatrix& other) {
  if (other.frames == 0) return;
  if (frames == 0 && n_q == 0) {
    *this = other;
    return;
  }
  PAST_REQUIRE(other.n_q == n_q && other.codebook_size == codebook_size,
               kArgument, "token matrices differ in n_q or codebook size");
  std::vector<int32_t> merged(static_cast<size_t>(n_q) * (frames + other.frames));
  const int total = frames + other.frames;
  for (int q = 0; q < n_q; ++q) {
    for (int t = 0; t < frames; ++t) merged[q * total + t] = at(q, t);
    for (int t = 0; t < other.frames; ++t)
      merged[q * total + frames + t] = other.at(q, t);
  }
  indices = std::move(merged);
  frames = total;
}

void TokenMatrix::Validate() const {
  PAST_REQUIRE(indices.size() == static_cast<size_t>(n_q) * frames, kData,
               "token matrix size does not match n_q x frames");
  for (int32_t v : indices) {
    PAST_REQUIRE(v >= 0 && v < codebook_size, kData,
                 "token index " + std::to_string(v) + " outside [0, " +
                     std::to_string(codebook_size) + ")");
  }
}

const char* MixModeName(MixMode mode) {
  switch (mode) {
    case MixMode::kTransformerOnly: return "transformer_only";
    case MixMode::kSkipOnly: return "skip_only";
    case MixMode::kAverage: return "average";
  }
  return "?";
}

}  // namespace past
