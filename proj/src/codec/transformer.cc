// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "codec/transformer.h"

#include <cmath>

#include "core/errors.h"

namespace F = torch::nn::functional;

namespace past {

std::pair<torch::Tensor, torch::Tensor> RotaryTables(int64_t frames, int head_dim,
                                                     torch::TensorOptions opts) {
  const int half = head_dim / 2;
  auto pos = torch::arange(frames, torch::kFloat64).unsqueeze(1);
  auto idx = torch::arange(half, torch::kFloat64).unsqueeze(0);
  auto freq = torch::pow(10000.0, -2.0 * idx / head_dim);
  auto angle = pos * freq;
  return {angle.cos().to(opts), angle.sin().to(opts)};
}

torch::Tensor ApplyRotary(const torch::Tensor& x, const torch::Tensor& cos,
                          const torch::Tensor& sin) {
  const int64_t half = x.size(-1) / 2;
  auto x1 = x.narrow(-1, 0, half);
  auto x2 = x.narrow(-1, half, half);
  return torch::cat({x1 * cos - x2 * sin, x1 * sin + x2 * cos}, -1);
}

TransformerLayerImpl::TransformerLayerImpl(int hidden, int heads_, int ff)
    : heads(heads_) {
  ln1 = register_module("ln1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({hidden})));
  qkv = register_module("qkv", torch::nn::Linear(hidden, 3 * hidden));
  proj = register_module("proj", torch::nn::Linear(hidden, hidden));
  ln2 = register_module("ln2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({hidden})));
  ff1 = register_module("ff1", torch::nn::Linear(hidden, ff));
  ff2 = register_module("ff2", torch::nn::Linear(ff, hidden));
}

torch::Tensor TransformerLayerImpl::forward(const torch::Tensor& x,
                                            const torch::Tensor& mask,
                                            const torch::Tensor& cos,
                                            const torch::Tensor& sin) {
  const int64_t B = x.size(0), T = x.size(1), H = x.size(2);
  const int64_t dh = H / heads;
  auto parts = qkv(ln1(x)).view({B, T, 3, heads, dh}).permute({2, 0, 3, 1, 4});
  auto q = ApplyRotary(parts[0], cos, sin);
  auto k = ApplyRotary(parts[1], cos, sin);
  auto v = parts[2];
  auto scores = torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(dh));
  if (mask.defined()) scores = scores + mask;
  auto attn = torch::matmul(torch::softmax(scores, -1), v);
  auto h = x + proj(attn.permute({0, 2, 1, 3}).reshape({B, T, H}));
  return h + ff2(F::gelu(ff1(ln2(h))));
}

torch::Tensor AttentionMask(int64_t frames, bool causal, int window,
                            torch::TensorOptions opts) {
  if (!causal) return {};
  auto i = torch::arange(frames).unsqueeze(1);
  auto j = torch::arange(frames).unsqueeze(0);
  auto allowed = (j <= i).logical_and(i - j < window);
  return torch::zeros({frames, frames}, opts)
      .masked_fill(allowed.logical_not(), -std::numeric_limits<double>::infinity());
}

std::vector<std::pair<int64_t, int64_t>> ChunkWindows(int64_t frames, int window,
                                                      int overlap) {
  PAST_REQUIRE(window > overlap && overlap >= 0, kConfig, "bad chunk window");
  std::vector<std::pair<int64_t, int64_t>> out;
  int64_t start = 0;
  while (true) {
    const int64_t end = std::min<int64_t>(start + window, frames);
    out.emplace_back(start, end);
    if (end >= frames) break;
    start += window - overlap;
  }
  return out;
}

TransformerStackImpl::TransformerStackImpl(int in_dim, int out_dim,
                                           const TransformerConfig& cfg_,
                                           bool causal_)
    : cfg(cfg_), causal(causal_) {
  in_proj = register_module("in_proj", torch::nn::Linear(in_dim, cfg.hidden));
  for (int l = 0; l < cfg.layers; ++l)
    layers->push_back(TransformerLayer(cfg.hidden, cfg.heads, cfg.ff));
  register_module("layers", layers);
  ln_out = register_module("ln_out",
                           torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.hidden})));
  out_proj = register_module("out_proj", torch::nn::Linear(cfg.hidden, out_dim));
}

torch::Tensor TransformerStackImpl::Run(const torch::Tensor& x) {
  const int64_t T = x.size(1);
  auto opts = x.options();
  auto [cos, sin] = RotaryTables(T, cfg.hidden / cfg.heads, opts);
  auto mask = AttentionMask(T, causal, cfg.window, opts);
  auto h = in_proj(x);
  for (auto& layer : *layers) h = layer->as<TransformerLayer>()->forward(h, mask, cos, sin);
  return out_proj(ln_out(h));
}

torch::Tensor TransformerStackImpl::Encode(const torch::Tensor& z) {
  auto x = z.transpose(1, 2);  // [B, T, D]
  const int64_t T = x.size(1);
  if (causal || T <= cfg.window) return Run(x).transpose(1, 2);
  auto sum = torch::zeros({x.size(0), T, out_proj->options.out_features()}, x.options());
  auto count = torch::zeros({1, T, 1}, x.options());
  for (const auto& [start, end] : ChunkWindows(T, cfg.window, cfg.overlap)) {
    auto y = Run(x.narrow(1, start, end - start));
    sum = sum.index_add(1, torch::arange(start, end), y);
    count.narrow(1, start, end - start).add_(1.0);
  }
  return (sum / count).transpose(1, 2);
}

}  // namespace past
