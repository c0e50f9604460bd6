// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <torch/torch.h>

namespace past {

// Conv1d with the padding scheme of the codec: left-only padding in the
// causal build, symmetric ("same") padding otherwise. Inputs whose length is
// not a stride multiple get extra right padding so that the output has
// ceil(len / stride) frames.
struct SConv1dImpl : torch::nn::Module {
  SConv1dImpl(int in_ch, int out_ch, int kernel, int stride = 1, int dilation = 1,
              bool causal = false);
  torch::Tensor forward(const torch::Tensor& x);

  int kernel;
  int stride;
  int dilation;
  bool causal;
  torch::nn::Conv1d conv{nullptr};
};
TORCH_MODULE(SConv1d);

// Transposed conv that trims kernel - stride samples: all on the right in the
// causal build, split otherwise. Output length is exactly len * stride.
struct SConvTranspose1dImpl : torch::nn::Module {
  SConvTranspose1dImpl(int in_ch, int out_ch, int kernel, int stride, bool causal);
  torch::Tensor forward(const torch::Tensor& x);

  int kernel;
  int stride;
  bool causal;
  torch::nn::ConvTranspose1d conv{nullptr};
};
TORCH_MODULE(SConvTranspose1d);

// x + conv1x1(elu(conv3(elu(x)))), hidden width dim / 2.
struct ResBlockImpl : torch::nn::Module {
  ResBlockImpl(int dim, int dilation, bool causal);
  torch::Tensor forward(const torch::Tensor& x);

  SConv1d conv1{nullptr};
  SConv1d conv2{nullptr};
};
TORCH_MODULE(ResBlock);

// Multi-layer LSTM over [B, C, T] with a residual connection. Bidirectional
// layers use C / 2 hidden units per direction so the width is preserved.
struct SLstmImpl : torch::nn::Module {
  SLstmImpl(int dim, int layers, bool bidirectional);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::LSTM lstm{nullptr};
};
TORCH_MODULE(SLstm);

}  // namespace past
