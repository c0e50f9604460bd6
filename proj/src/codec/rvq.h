// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <random>
#include <vector>

#include <torch/torch.h>

#include "core/config.h"

namespace past {

// One VQ codebook with EMA statistics. Everything here is a buffer; the
// codebook is learned by exponential moving averages, never by the optimizer.
struct VqLayerImpl : torch::nn::Module {
  VqLayerImpl(int dim, int codebook_size);

  // Nearest entry under squared Euclidean distance, x: [N, D] -> [N] (int64).
  torch::Tensor Nearest(const torch::Tensor& x) const;

  // k-means++ seeding followed by Lloyd iterations on x ([N, D]).
  void KmeansInit(const torch::Tensor& x, int iters, std::mt19937_64& rng);

  // EMA update from the assignments of x, then dead-entry reseeding.
  void EmaUpdate(const torch::Tensor& x, const torch::Tensor& indices,
                 const RvqConfig& cfg, int64_t step, std::mt19937_64& rng);

  bool initialized() const { return initialized_flag.item<float>() > 0.5f; }

  torch::Tensor embed;         // [K, D]
  torch::Tensor cluster_size;  // [K] EMA of assignment counts
  torch::Tensor embed_sum;     // [K, D] EMA of assigned vector sums
  torch::Tensor usage;         // [K] cumulative assignment counts
  torch::Tensor last_used;     // [K] step of most recent assignment
  torch::Tensor initialized_flag;
};
TORCH_MODULE(VqLayer);

// Codes frozen at a reference point. With these set, layer i uses the stored
// entries and the straight-through offsets are constants, so the forward map
// is differentiable and equals the straight-through surrogate.
struct RvqFrozen {
  torch::Tensor codes;        // [B, n_q, T]
  torch::Tensor offset;       // sum_i q_i - z at the reference point
  torch::Tensor first_offset; // q_1 - z at the reference point
};

struct RvqOutput {
  torch::Tensor quantized;        // straight-through sum, [B, D, T]
  torch::Tensor sum;              // sum_i q_i without gradient path
  torch::Tensor first;            // straight-through layer-1 output
  torch::Tensor codes;            // [B, n_q, T] int64
  std::vector<torch::Tensor> residuals;  // input of each layer (carries grad)
  std::vector<torch::Tensor> layer_quantized;  // q_i, detached
};

struct RvqUpdate {
  bool enabled = false;
  int64_t step = 0;
  std::mt19937_64* rng = nullptr;
};

struct ResidualVqImpl : torch::nn::Module {
  ResidualVqImpl(int dim, const RvqConfig& cfg);

  RvqOutput forward(const torch::Tensor& z, int n_q, const RvqUpdate& update = {},
                    const RvqFrozen* frozen = nullptr);

  // Sum of the selected entries for the first n_q streams of codes.
  torch::Tensor Decode(const torch::Tensor& codes, int n_q = -1) const;

  VqLayer layer(int i) const {
    return VqLayer(std::dynamic_pointer_cast<VqLayerImpl>(layers->ptr(i)));
  }
  int n_q() const { return static_cast<int>(layers->size()); }

  RvqConfig cfg;
  torch::nn::ModuleList layers;
};
TORCH_MODULE(ResidualVq);

}  // namespace past
