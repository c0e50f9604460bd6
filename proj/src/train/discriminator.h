// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include <torch/torch.h>

#include "core/config.h"

namespace past {

struct DiscriminatorOutput {
  torch::Tensor logits;               // [B, 1, frames, bins]
  std::vector<torch::Tensor> features;  // activations of the hidden layers
};

// Conv2d stack over the real and imaginary parts of one STFT resolution
// ([B, 2, frames, bins]). Strides halve the frequency axis; dilations grow
// along time.
struct StftDiscriminatorImpl : torch::nn::Module {
  StftDiscriminatorImpl(int n_fft, int filters);
  DiscriminatorOutput forward(const torch::Tensor& x);  // x: [B, 1, N]

  int n_fft;
  torch::Tensor window;
  torch::nn::ModuleList convs;
  torch::nn::Conv2d post{nullptr};
};
TORCH_MODULE(StftDiscriminator);

struct MultiScaleStftDiscriminatorImpl : torch::nn::Module {
  explicit MultiScaleStftDiscriminatorImpl(const DiscriminatorConfig& cfg);
  std::vector<DiscriminatorOutput> forward(const torch::Tensor& x);

  torch::nn::ModuleList discs;
};
TORCH_MODULE(MultiScaleStftDiscriminator);

struct HingeLosses {
  torch::Tensor real;  // mean over scales of mean(relu(1 - D(x)))
  torch::Tensor fake;  // mean over scales of mean(relu(1 + D(x_hat)))
  torch::Tensor total() const { return real + fake; }
};

// Discriminator objective on already computed outputs.
HingeLosses DiscriminatorHinge(const std::vector<DiscriminatorOutput>& real,
                               const std::vector<DiscriminatorOutput>& fake);

// Generator adversarial term: mean over scales of mean(relu(1 - D(x_hat))).
torch::Tensor GeneratorAdversarial(const std::vector<DiscriminatorOutput>& fake);

// Mean over scales and layers of mean|f(x) - f(x_hat)| / mean|f(x)|. Real
// features are treated as constants.
torch::Tensor FeatureMatching(const std::vector<DiscriminatorOutput>& real,
                              const std::vector<DiscriminatorOutput>& fake);

}  // namespace past
