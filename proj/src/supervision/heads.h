// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include <torch/torch.h>

#include "supervision/ctc.h"

namespace past {

// Linear(D -> h), one BiLSTM layer (h / 2 per direction), Linear(h -> |M|+1).
// The output projection starts at zero, so the initial posterior is uniform.
struct CtcHeadImpl : torch::nn::Module {
  CtcHeadImpl(int dim, int hidden, int classes = CharSet::kClasses);
  // [B, D, T] -> logits [B, T, classes]
  torch::Tensor forward(const torch::Tensor& z_first);

  torch::nn::Linear in_proj{nullptr};
  torch::nn::LSTM lstm{nullptr};
  torch::nn::Linear out_proj{nullptr};
};
TORCH_MODULE(CtcHead);

// Framewise linear map D -> |P|.
struct PhoneHeadImpl : torch::nn::Module {
  PhoneHeadImpl(int dim, int phones);
  // [B, D, T] -> logits [B, T, phones]
  torch::Tensor forward(const torch::Tensor& z_first);

  torch::nn::Linear proj{nullptr};
};
TORCH_MODULE(PhoneHead);

// Batched CTC on logits [B, T, C]: per-item loss divided by max(1, L), then
// averaged over the items that carry a transcript. Items whose target is
// std::nullopt do not contribute. Returns a scalar with gradient.
torch::Tensor CtcLossBatch(const torch::Tensor& logits,
                           const std::vector<std::optional<std::vector<int>>>& targets,
                           int blank = CharSet::kBlank);

// Mean cross-entropy over frames of items with mask true and label >= 0.
// logits [B, T, P], labels [B, T] int64 (-1 = no label), mask [B] bool.
torch::Tensor PhonemeCeBatch(const torch::Tensor& logits, const torch::Tensor& labels,
                             const torch::Tensor& mask);

// Detaches logits of one batch item into the class-major posterior types.
CharPosterior ToCharPosterior(const torch::Tensor& logits_bt, int64_t item);
PhonePosterior ToPhonePosterior(const torch::Tensor& logits_bt, int64_t item);

}  // namespace past
