// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "codec/layers.h"

#include <algorithm>
#include <cmath>

namespace F = torch::nn::functional;

namespace past {

namespace {

// N(0, 1 / fan_in) weights and zero bias keep the activation scale roughly
// constant through the deep conv stacks; the default uniform init shrinks it
// at every layer, leaving a latent dominated by biases.
void ScaledInit(torch::nn::Module& conv, int64_t fan_in) {
  torch::NoGradGuard guard;
  for (auto& p : conv.named_parameters(false)) {
    if (p.key() == "weight") {
      p.value().normal_(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    } else {
      p.value().zero_();
    }
  }
}

}  // namespace

SConv1dImpl::SConv1dImpl(int in_ch, int out_ch, int kernel_, int stride_,
                         int dilation_, bool causal_)
    : kernel(kernel_), stride(stride_), dilation(dilation_), causal(causal_) {
  conv = register_module(
      "conv", torch::nn::Conv1d(torch::nn::Conv1dOptions(in_ch, out_ch, kernel)
                                    .stride(stride)
                                    .dilation(dilation)));
  ScaledInit(*conv, static_cast<int64_t>(in_ch) * kernel);
}

torch::Tensor SConv1dImpl::forward(const torch::Tensor& x) {
  const int64_t effective = static_cast<int64_t>(kernel - 1) * dilation + 1;
  const int64_t pad_total = effective - stride;
  const int64_t length = x.size(-1);
  const int64_t frames = (length + stride - 1) / stride;
  const int64_t ideal = (frames - 1) * stride + effective - pad_total;
  const int64_t extra = std::max<int64_t>(0, ideal - length);
  int64_t left, right;
  if (causal) {
    left = pad_total;
    right = extra;
  } else {
    right = pad_total / 2;
    left = pad_total - right;
    right += extra;
  }
  return conv(F::pad(x, F::PadFuncOptions({left, right})));
}

SConvTranspose1dImpl::SConvTranspose1dImpl(int in_ch, int out_ch, int kernel_,
                                           int stride_, bool causal_)
    : kernel(kernel_), stride(stride_), causal(causal_) {
  conv = register_module(
      "conv", torch::nn::ConvTranspose1d(
                  torch::nn::ConvTranspose1dOptions(in_ch, out_ch, kernel).stride(stride)));
  // Each output sample sees kernel / stride taps of every input channel.
  ScaledInit(*conv, static_cast<int64_t>(in_ch) * std::max(1, kernel / stride));
}

torch::Tensor SConvTranspose1dImpl::forward(const torch::Tensor& x) {
  torch::Tensor y = conv(x);
  const int64_t pad_total = kernel - stride;
  int64_t left, right;
  if (causal) {
    left = 0;
    right = pad_total;
  } else {
    right = pad_total / 2;
    left = pad_total - right;
  }
  return y.narrow(-1, left, y.size(-1) - left - right);
}

ResBlockImpl::ResBlockImpl(int dim, int dilation, bool causal) {
  const int hidden = std::max(1, dim / 2);
  conv1 = register_module("conv1", SConv1d(dim, hidden, 3, 1, dilation, causal));
  conv2 = register_module("conv2", SConv1d(hidden, dim, 1, 1, 1, causal));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  return x + conv2(F::elu(conv1(F::elu(x))));
}

SLstmImpl::SLstmImpl(int dim, int layers, bool bidirectional) {
  const int hidden = bidirectional ? dim / 2 : dim;
  lstm = register_module(
      "lstm", torch::nn::LSTM(torch::nn::LSTMOptions(dim, hidden)
                                  .num_layers(layers)
                                  .bidirectional(bidirectional)));
}

torch::Tensor SLstmImpl::forward(const torch::Tensor& x) {
  torch::Tensor seq = x.permute({2, 0, 1});  // [T, B, C]
  torch::Tensor y = std::get<0>(lstm(seq));
  return (y + seq).permute({1, 2, 0});
}

}  // namespace past
