// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <torch/torch.h>

#include "codec/layers.h"
#include "core/config.h"

namespace past {

// One resolution level: residual blocks followed by a strided conv (encoder)
// or a transposed conv followed by residual blocks (decoder).
struct EncoderStageImpl : torch::nn::Module {
  EncoderStageImpl(int dim, int ratio, int n_residual, bool causal);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::ModuleList res;
  SConv1d down{nullptr};
};
TORCH_MODULE(EncoderStage);

struct DecoderStageImpl : torch::nn::Module {
  DecoderStageImpl(int dim, int ratio, int n_residual, bool causal);
  torch::Tensor forward(torch::Tensor x);

  SConvTranspose1d up{nullptr};
  torch::nn::ModuleList res;
};
TORCH_MODULE(DecoderStage);

// Waveform [B, 1, N] -> latent [B, D, N / hop]. Downsampling runs through the
// ratios in reverse order (2, 4, 5, 8 for the default), widening channels by
// two at each level.
struct SeanetEncoderImpl : torch::nn::Module {
  explicit SeanetEncoderImpl(const ModelConfig& cfg);
  torch::Tensor forward(torch::Tensor x);

  SConv1d conv_in{nullptr};
  torch::nn::ModuleList stages;
  SLstm lstm{nullptr};
  SConv1d conv_out{nullptr};
};
TORCH_MODULE(SeanetEncoder);

// Latent [B, D, T] -> waveform [B, 1, T * hop].
struct SeanetDecoderImpl : torch::nn::Module {
  explicit SeanetDecoderImpl(const ModelConfig& cfg);
  torch::Tensor forward(torch::Tensor z);

  SConv1d conv_in{nullptr};
  SLstm lstm{nullptr};
  torch::nn::ModuleList stages;
  SConv1d conv_out{nullptr};
};
TORCH_MODULE(SeanetDecoder);

}  // namespace past
