// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "codec/seanet.h"

#include <algorithm>

namespace F = torch::nn::functional;

namespace past {

EncoderStageImpl::EncoderStageImpl(int dim, int ratio, int n_residual, bool causal) {
  for (int j = 0; j < n_residual; ++j) res->push_back(ResBlock(dim, 1 << j, causal));
  register_module("res", res);
  down = register_module("down", SConv1d(dim, dim * 2, 2 * ratio, ratio, 1, causal));
}

torch::Tensor EncoderStageImpl::forward(torch::Tensor x) {
  for (auto& block : *res) x = block->as<ResBlock>()->forward(x);
  return down(F::elu(x));
}

DecoderStageImpl::DecoderStageImpl(int dim, int ratio, int n_residual, bool causal) {
  up = register_module("up", SConvTranspose1d(dim, dim / 2, 2 * ratio, ratio, causal));
  for (int j = 0; j < n_residual; ++j) res->push_back(ResBlock(dim / 2, 1 << j, causal));
  register_module("res", res);
}

torch::Tensor DecoderStageImpl::forward(torch::Tensor x) {
  x = up(F::elu(x));
  for (auto& block : *res) x = block->as<ResBlock>()->forward(x);
  return x;
}

SeanetEncoderImpl::SeanetEncoderImpl(const ModelConfig& cfg) {
  int dim = cfg.n_filters;
  conv_in = register_module("conv_in", SConv1d(1, dim, 7, 1, 1, cfg.causal));
  std::vector<int> ratios(cfg.ratios.rbegin(), cfg.ratios.rend());
  for (int r : ratios) {
    stages->push_back(EncoderStage(dim, r, cfg.n_residual_layers, cfg.causal));
    dim *= 2;
  }
  register_module("stages", stages);
  lstm = register_module("lstm", SLstm(dim, cfg.lstm_layers, !cfg.causal));
  conv_out = register_module("conv_out", SConv1d(dim, cfg.dim, 7, 1, 1, cfg.causal));
}

torch::Tensor SeanetEncoderImpl::forward(torch::Tensor x) {
  x = conv_in(x);
  for (auto& stage : *stages) x = stage->as<EncoderStage>()->forward(x);
  x = lstm(x);
  return conv_out(F::elu(x));
}

SeanetDecoderImpl::SeanetDecoderImpl(const ModelConfig& cfg) {
  int dim = cfg.n_filters << cfg.ratios.size();
  conv_in = register_module("conv_in", SConv1d(cfg.dim, dim, 7, 1, 1, cfg.causal));
  lstm = register_module("lstm", SLstm(dim, cfg.lstm_layers, !cfg.causal));
  for (int r : cfg.ratios) {
    stages->push_back(DecoderStage(dim, r, cfg.n_residual_layers, cfg.causal));
    dim /= 2;
  }
  register_module("stages", stages);
  conv_out = register_module("conv_out", SConv1d(dim, 1, 7, 1, 1, cfg.causal));
}

torch::Tensor SeanetDecoderImpl::forward(torch::Tensor z) {
  torch::Tensor x = lstm(conv_in(z));
  for (auto& stage : *stages) x = stage->as<DecoderStage>()->forward(x);
  return conv_out(F::elu(x));
}

}  // namespace past
