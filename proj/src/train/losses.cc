// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "train/losses.h"

#include <cmath>

#include "core/errors.h"

namespace past {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

torch::Tensor MelFilterbank(int n_fft, int n_mels, int sample_rate) {
  const int n_freqs = n_fft / 2 + 1;
  std::vector<double> freqs(n_freqs);
  for (int i = 0; i < n_freqs; ++i) freqs[i] = static_cast<double>(i) * sample_rate / n_fft;
  const double mel_max = HzToMel(sample_rate / 2.0);
  std::vector<double> pts(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) pts[i] = MelToHz(mel_max * i / (n_mels + 1));
  auto fb = torch::zeros({n_mels, n_freqs}, torch::kFloat32);
  auto acc = fb.accessor<float, 2>();
  for (int m = 0; m < n_mels; ++m) {
    const double lo = pts[m], mid = pts[m + 1], hi = pts[m + 2];
    for (int f = 0; f < n_freqs; ++f) {
      const double up = (freqs[f] - lo) / (mid - lo);
      const double down = (hi - freqs[f]) / (hi - mid);
      acc[m][f] = static_cast<float>(std::max(0.0, std::min(up, down)));
    }
  }
  return fb;
}

MelLoss::MelLoss(int min_scale, int max_scale, int n_mels, int sample_rate) {
  PAST_REQUIRE(min_scale >= 2 && min_scale <= max_scale, kConfig, "bad mel scale range");
  for (int s = min_scale; s <= max_scale; ++s) {
    const int win = 1 << s;
    windows_.push_back(win);
    hann_.push_back(torch::hann_window(win, torch::kFloat32));
    filterbanks_.push_back(MelFilterbank(win, n_mels, sample_rate));
  }
}

torch::Tensor MelLoss::MelMagnitude(const torch::Tensor& x, size_t scale) const {
  const int win = windows_[scale];
  auto flat = x.dim() == 3 ? x.squeeze(1) : x;
  auto spec = torch::stft(flat, win, win / 4, win, hann_[scale].to(flat.dtype()),
                          /*center=*/true, "constant", /*normalized=*/true,
                          /*onesided=*/true, /*return_complex=*/true);
  auto mag = torch::sqrt(torch::real(spec).pow(2) + torch::imag(spec).pow(2) + 1e-10);
  return torch::matmul(filterbanks_[scale].to(mag.dtype()), mag);
}

torch::Tensor MelLoss::operator()(const torch::Tensor& x, const torch::Tensor& x_hat) const {
  torch::Tensor total;
  for (size_t s = 0; s < windows_.size(); ++s) {
    auto a = MelMagnitude(x, s);
    auto b = MelMagnitude(x_hat, s);
    auto term = (a - b).abs().mean() + (a - b).pow(2).mean();
    total = total.defined() ? total + term : term;
  }
  return total / static_cast<double>(windows_.size());
}

ReconstructionLosses ComputeReconstruction(const torch::Tensor& x, const torch::Tensor& x_hat,
                                           const MelLoss& mel) {
  PAST_REQUIRE(x.sizes() == x_hat.sizes(), kArgument,
               "reconstruction losses need equal-length signals");
  ReconstructionLosses out;
  out.time = (x - x_hat).abs().mean();
  out.mel = mel(x, x_hat);
  return out;
}

torch::Tensor CommitmentLoss(const torch::Tensor& pre_quant, const torch::Tensor& post_quant) {
  PAST_REQUIRE(pre_quant.sizes() == post_quant.sizes(), kArgument,
               "commitment loss shape mismatch");
  return (pre_quant - post_quant.detach()).pow(2).mean();
}

torch::Tensor RvqCommitment(const std::vector<torch::Tensor>& residuals,
                            const std::vector<torch::Tensor>& layer_quantized) {
  PAST_REQUIRE(residuals.size() == layer_quantized.size() && !residuals.empty(), kArgument,
               "commitment: one quantized tensor per residual required");
  torch::Tensor total;
  for (size_t i = 0; i < residuals.size(); ++i) {
    auto term = CommitmentLoss(residuals[i], layer_quantized[i]);
    total = total.defined() ? total + term : term;
  }
  return total;
}

TotalLoss ComposeLoss(const LossTerms& terms, const LossWeights& w) {
  struct Entry {
    const char* name;
    const torch::Tensor* term;
    double weight;
    bool aux;
  };
  const Entry entries[] = {
      {"ctc", &terms.ctc, w.lambda_ctc, true},
      {"phn", &terms.phn, w.lambda_phn, true},
      {"time", &terms.time, w.time, false},
      {"mel", &terms.mel, w.mel, false},
      {"adv", &terms.adv, w.adversarial, false},
      {"fm", &terms.fm, w.feature_matching, false},
      {"commit", &terms.commit, w.commitment, false},
  };
  TotalLoss out;
  torch::Tensor aux, encodec;
  for (const Entry& e : entries) {
    PAST_REQUIRE(e.weight >= 0.0, kConfig, std::string("negative weight for ") + e.name);
    if (!e.term->defined()) {
      out.raw[e.name] = 0.0;
      out.breakdown[e.name] = 0.0;
      continue;
    }
    auto t = e.term->to(torch::kFloat64);
    const double value = t.item<double>();
    if (!std::isfinite(value)) {
      Fail(ErrorKind::kTraining, std::string("non-finite loss term '") + e.name + "'");
    }
    out.raw[e.name] = value;
    auto weighted = t * e.weight;
    out.breakdown[e.name] = weighted.item<double>();
    torch::Tensor& acc = e.aux ? aux : encodec;
    acc = acc.defined() ? acc + weighted : weighted;
  }
  if (!encodec.defined()) encodec = torch::zeros({}, torch::kFloat64);
  out.encodec = encodec.item<double>();
  out.total = aux.defined() ? aux + encodec : encodec;
  const double total = out.total.item<double>();
  if (!std::isfinite(total)) Fail(ErrorKind::kTraining, "non-finite total loss");
  return out;
}

}  // namespace past
