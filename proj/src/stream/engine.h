// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "codec/model.h"
#include "core/config.h"
#include "core/types.h"
#include "stream/kernels.h"

namespace past {

// Frozen float32 copy of a causal codec, laid out for the point kernels.
// Read-only once built, so any number of streams may share one instance.
struct CausalCodecWeights {
  struct Res {
    ConvWeights conv1, conv2;
  };
  struct EncoderStage {
    std::vector<Res> res;
    ConvWeights down;
  };
  struct DecoderStage {
    ConvTransposeWeights up;
    std::vector<Res> res;
  };

  ModelConfig cfg;
  int hop = 0;

  ConvWeights enc_in;
  std::vector<EncoderStage> enc_stages;
  std::vector<LstmLayerWeights> enc_lstm;
  ConvWeights enc_out;

  bool use_transformer = false;
  int window = 0;
  LinearWeights trns_in, trns_out;
  std::vector<AttentionLayerWeights> trns_layers;
  LayerNormWeights trns_ln;

  std::vector<std::vector<float>> codebooks;  // [n_q][K * dim]

  ConvWeights dec_in;
  std::vector<LstmLayerWeights> dec_lstm;
  std::vector<DecoderStage> dec_stages;
  ConvWeights dec_out;

  // Rejects non-causal models with a configuration error.
  static std::shared_ptr<const CausalCodecWeights> FromModel(PastModel& model);
};

// Whole-signal pass that runs each layer over its full input before moving
// to the next one. The signal is right-padded with zeros to a hop multiple.
struct ReferenceEncoding {
  LatentSequence latent;  // quantizer input (AVERAGE mix)
  TokenMatrix tokens;
};
ReferenceEncoding ReferenceEncode(const CausalCodecWeights& w, std::span<const float> samples,
                                  int n_q);
std::vector<float> ReferenceDecode(const CausalCodecWeights& w, const TokenMatrix& tokens);

// Incremental tokenizer. Token frame k is released once samples through
// (k + 2) * hop - 1 have been fed: one hop for the frame itself plus one hop
// of look-ahead delay. Emitted frames are final.
class StreamEncoder {
 public:
  StreamEncoder(std::shared_ptr<const CausalCodecWeights> weights, int n_q);
  ~StreamEncoder();
  StreamEncoder(StreamEncoder&&) noexcept;
  StreamEncoder& operator=(StreamEncoder&&) noexcept;

  TokenMatrix Feed(std::span<const float> samples);
  // Zero-pads the trailing partial hop, emits every remaining frame and closes
  // the stream.
  TokenMatrix Flush();
  // Back to the freshly opened state.
  void Reset();

  int64_t frames_emitted() const;
  int64_t samples_consumed() const;
  bool closed() const;
  int n_q() const { return n_q_; }
  // Floats held in buffers and caches; bounded independently of stream length.
  size_t StateFloats() const;

 private:
  struct State;
  std::shared_ptr<const CausalCodecWeights> weights_;
  int n_q_;
  std::unique_ptr<State> state_;
};

// Incremental decoder: hop samples out per token frame in.
class StreamDecoder {
 public:
  explicit StreamDecoder(std::shared_ptr<const CausalCodecWeights> weights);
  ~StreamDecoder();
  StreamDecoder(StreamDecoder&&) noexcept;
  StreamDecoder& operator=(StreamDecoder&&) noexcept;

  std::vector<float> Feed(const TokenMatrix& tokens);
  void Close();
  void Reset();

  int64_t frames_consumed() const;
  bool closed() const;
  size_t StateFloats() const;

 private:
  struct State;
  std::shared_ptr<const CausalCodecWeights> weights_;
  std::unique_ptr<State> state_;
};

}  // namespace past
