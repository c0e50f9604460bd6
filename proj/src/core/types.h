// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace past {

constexpr int kDefaultSampleRate = 16000;

// Mono waveform. Amplitudes are nominally in [-1, 1].
struct AudioSegment {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;
  std::optional<std::string> speaker_id;
  std::optional<std::string> utterance_id;

  double Seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Dense latent, channel-major: values[c * frames + t].
struct LatentSequence {
  int channels = 0;
  int frames = 0;
  int frame_rate = 50;
  std::vector<float> values;

  LatentSequence() = default;
  LatentSequence(int c, int t, int rate = 50)
      : channels(c), frames(t), frame_rate(rate),
        values(static_cast<size_t>(c) * t, 0.0f) {}

  float& at(int c, int t) { return values[static_cast<size_t>(c) * frames + t]; }
  float at(int c, int t) const {
    return values[static_cast<size_t>(c) * frames + t];
  }
  // Copies frame t into a contiguous vector.
  std::vector<float> Frame(int t) const;
};

// n_q parallel index streams, row-major: indices[q * frames + t].
struct TokenMatrix {
  int n_q = 0;
  int frames = 0;
  int codebook_size = 0;
  int frame_rate = 50;
  std::vector<int32_t> indices;

  TokenMatrix() = default;
  TokenMatrix(int nq, int t, int k, int rate = 50)
      : n_q(nq), frames(t), codebook_size(k), frame_rate(rate),
        indices(static_cast<size_t>(nq) * t, 0) {}

  int32_t& at(int q, int t) { return indices[static_cast<size_t>(q) * frames + t]; }
  int32_t at(int q, int t) const {
    return indices[static_cast<size_t>(q) * frames + t];
  }
  std::vector<int32_t> Stream(int q) const;
  // Appends the frames of `other` (same n_q and K) after the existing ones.
  void Append(const TokenMatrix& other);
  // Throws a data error when any index falls outside [0, codebook_size).
  void Validate() const;
  bool operator==(const TokenMatrix& other) const = default;
};

// Quantizer input selection during training.
enum class MixMode { kTransformerOnly, kSkipOnly, kAverage };

const char* MixModeName(MixMode mode);

// Optional character transcript and frame-level phoneme labels for one
// segment. Frame labels of -1 mark frames without a valid label.
struct SupervisionBundle {
  std::optional<std::string> transcript;
  std::vector<int32_t> phoneme_frames;
  bool phoneme_mask = false;
};

}  // namespace past
