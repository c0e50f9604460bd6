// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "codec/rvq.h"
#include "codec/seanet.h"
#include "codec/transformer.h"
#include "core/archive.h"
#include "core/config.h"
#include "core/types.h"
#include "supervision/heads.h"

namespace past {

// Elementwise selection of the quantizer input.
torch::Tensor MixLatents(const torch::Tensor& z_conv, const torch::Tensor& z_trns,
                         MixMode mode);

// Draws TRANSFORMER_ONLY with p_trns_only, SKIP_ONLY with p_skip_only, AVERAGE
// otherwise, from one uniform draw.
MixMode SampleMixMode(std::mt19937_64& rng, double p_trns_only, double p_skip_only);

struct ForwardOptions {
  RvqUpdate update;                 // EMA codebook learning (training only)
  const RvqFrozen* frozen = nullptr;
  bool run_ctc_head = true;
  bool run_phone_head = true;
};

struct ForwardOutputs {
  torch::Tensor x_hat;      // [B, 1, N]
  torch::Tensor z_conv;     // [B, D, T]
  torch::Tensor z_trns;     // equals z_conv when the transformer is disabled
  torch::Tensor z_mixed;    // quantizer input
  RvqOutput rvq;
  torch::Tensor ctc_logits;    // [B, T, |M|+1] (undefined if not run)
  torch::Tensor phone_logits;  // [B, T, |P|]
};

// Encoder -> transformer -> mix -> RVQ -> decoder, plus the two auxiliary heads
// reading the first quantized stream.
struct PastModelImpl : torch::nn::Module {
  explicit PastModelImpl(const ModelConfig& cfg);

  // x: [B, 1, N]. N is right-padded to a hop multiple; x_hat is cut back to N.
  ForwardOutputs forward(const torch::Tensor& x, MixMode mode, int n_q,
                         const ForwardOptions& opts = {});

  torch::Tensor ConvEncode(const torch::Tensor& x);            // [B,1,N] -> [B,D,T]
  torch::Tensor TransformerEncode(const torch::Tensor& z_conv);
  torch::Tensor Decode(const torch::Tensor& z_hat);            // [B,D,T] -> [B,1,T*hop]

  // Inference helpers on whole signals (AVERAGE mix, no codebook updates).
  TokenMatrix Encode(const AudioSegment& audio, int n_q);
  AudioSegment DecodeTokens(const TokenMatrix& tokens, int n_q = -1);

  std::vector<torch::Tensor> GeneratorParameters();
  std::vector<torch::Tensor> TransformerParameters();

  ModelConfig cfg;
  SeanetEncoder encoder{nullptr};
  TransformerStack transformer{nullptr};
  ResidualVq quantizer{nullptr};
  SeanetDecoder decoder{nullptr};
  CtcHead ctc_head{nullptr};
  PhoneHead phone_head{nullptr};
};
TORCH_MODULE(PastModel);

// Pads [B, 1, N] on the right with zeros to a multiple of hop.
torch::Tensor PadToHop(const torch::Tensor& x, int hop);

// AudioSegment <-> [1, 1, N] float tensor.
torch::Tensor AudioToTensor(const AudioSegment& audio);
LatentSequence TensorToLatent(const torch::Tensor& z_bdt, int64_t item, int frame_rate);
torch::Tensor LatentToTensor(const LatentSequence& z);

// Named parameters and buffers <-> archive, under `prefix`.
void ExportModule(const torch::nn::Module& module, const std::string& prefix, TensorArchive& ar);
void ImportModule(torch::nn::Module& module, const std::string& prefix,
                  const TensorArchive& ar);

// Model checkpoint: config record in meta["model"], tensors under "model.".
void SaveModel(PastModel& model, const std::string& path);
PastModel LoadModel(const std::string& path);
PastModel LoadModel(const TensorArchive& ar);

}  // namespace past
