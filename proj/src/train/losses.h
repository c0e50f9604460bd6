// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "core/config.h"

namespace past {

// HTK-scale triangular filterbank, [n_mels, n_fft / 2 + 1], no area
// normalization. Filters that fall between two FFT bins are all-zero rows.
torch::Tensor MelFilterbank(int n_fft, int n_mels, int sample_rate);

struct ReconstructionLosses {
  torch::Tensor time;  // mean |x - x_hat|
  torch::Tensor mel;   // mean over scales of (L1 + MSE) between mel magnitudes
};

// Multi-scale mel reconstruction loss. Windows 2^min_scale .. 2^max_scale,
// hop = window / 4, Hann window, centered frames with zero padding, STFT
// normalized by 1 / sqrt(window).
class MelLoss {
 public:
  MelLoss(int min_scale, int max_scale, int n_mels, int sample_rate);
  // x, x_hat: [B, 1, N] or [B, N].
  torch::Tensor operator()(const torch::Tensor& x, const torch::Tensor& x_hat) const;
  // Mel magnitudes [B, n_mels, frames] at one scale index.
  torch::Tensor MelMagnitude(const torch::Tensor& x, size_t scale) const;
  size_t scales() const { return windows_.size(); }

 private:
  std::vector<int> windows_;
  std::vector<torch::Tensor> hann_;
  std::vector<torch::Tensor> filterbanks_;
};

// Length mismatch raises an argument error.
ReconstructionLosses ComputeReconstruction(const torch::Tensor& x, const torch::Tensor& x_hat,
                                           const MelLoss& mel);

// mse(pre, stop_grad(post)).
torch::Tensor CommitmentLoss(const torch::Tensor& pre_quant, const torch::Tensor& post_quant);

// Sum over RVQ layers of mse(residual_i, stop_grad(q_i)).
torch::Tensor RvqCommitment(const std::vector<torch::Tensor>& residuals,
                            const std::vector<torch::Tensor>& layer_quantized);

// Unweighted loss terms of one generator step. Undefined tensors count as 0.
struct LossTerms {
  torch::Tensor ctc;
  torch::Tensor phn;
  torch::Tensor time;
  torch::Tensor mel;
  torch::Tensor adv;
  torch::Tensor fm;
  torch::Tensor commit;
};

struct TotalLoss {
  torch::Tensor total;                      // double scalar with gradient
  std::map<std::string, double> breakdown;  // weighted contributions
  std::map<std::string, double> raw;        // unweighted terms
  double encodec = 0.0;
};

// total = lambda_ctc * ctc + lambda_phn * phn + encodec, where encodec is the
// weighted sum of the reconstruction, adversarial and commitment terms. The
// weighted contributions in `breakdown` sum to `total`. A non-finite term
// raises a training error naming it.
TotalLoss ComposeLoss(const LossTerms& terms, const LossWeights& weights);

}  // namespace past
