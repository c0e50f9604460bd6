// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <utility>
#include <vector>

#include <torch/torch.h>

#include "core/config.h"

namespace past {

// Rotary embedding tables for positions [0, frames): cos/sin of shape
// [frames, head_dim / 2].
std::pair<torch::Tensor, torch::Tensor> RotaryTables(int64_t frames, int head_dim,
                                                     torch::TensorOptions opts);

// Rotates the two halves of the last dimension of x ([B, H, T, head_dim]).
torch::Tensor ApplyRotary(const torch::Tensor& x, const torch::Tensor& cos,
                          const torch::Tensor& sin);

// Pre-norm block: x + attn(ln1(x)); x + ffn(ln2(x)), GELU feed-forward.
struct TransformerLayerImpl : torch::nn::Module {
  TransformerLayerImpl(int hidden, int heads, int ff);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& mask,
                        const torch::Tensor& cos, const torch::Tensor& sin);

  int heads;
  torch::nn::LayerNorm ln1{nullptr}, ln2{nullptr};
  torch::nn::Linear qkv{nullptr}, proj{nullptr}, ff1{nullptr}, ff2{nullptr};
};
TORCH_MODULE(TransformerLayer);

// Additive attention mask. Causal masks are banded: frame i sees frames
// (i - window, i]. Non-causal windows are unmasked (undefined tensor).
torch::Tensor AttentionMask(int64_t frames, bool causal, int window,
                            torch::TensorOptions opts);

// Attention windows [start, end) covering [0, frames): `window` frames long,
// consecutive windows sharing `overlap` frames; the last window ends at
// `frames`.
std::vector<std::pair<int64_t, int64_t>> ChunkWindows(int64_t frames, int window,
                                                      int overlap);

struct TransformerStackImpl : torch::nn::Module {
  TransformerStackImpl(int in_dim, int out_dim, const TransformerConfig& cfg,
                       bool causal);

  // One pass over x [B, T, in_dim] -> [B, T, out_dim], positions from 0.
  torch::Tensor Run(const torch::Tensor& x);

  // Latent [B, D, T] -> [B, D, T]. Non-causal: windows of cfg.window frames
  // with cfg.overlap shared frames, overlapping outputs averaged. Causal: one
  // pass with the banded mask.
  torch::Tensor Encode(const torch::Tensor& z);

  TransformerConfig cfg;
  bool causal;
  torch::nn::Linear in_proj{nullptr}, out_proj{nullptr};
  torch::nn::ModuleList layers;
  torch::nn::LayerNorm ln_out{nullptr};
};
TORCH_MODULE(TransformerStack);

}  // namespace past
