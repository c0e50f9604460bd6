// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "train/discriminator.h"

#include <string>

#include "core/errors.h"

namespace F = torch::nn::functional;

namespace past {

StftDiscriminatorImpl::StftDiscriminatorImpl(int n_fft_, int filters) : n_fft(n_fft_) {
  window = register_buffer("window", torch::hann_window(n_fft, torch::kFloat32));
  convs = register_module("convs", torch::nn::ModuleList());
  using Opt = torch::nn::Conv2dOptions;
  convs->push_back(torch::nn::Conv2d(Opt(2, filters, {3, 9}).padding({1, 4})));
  for (int d : {1, 2, 4}) {
    convs->push_back(torch::nn::Conv2d(
        Opt(filters, filters, {3, 9}).stride({1, 2}).dilation({d, 1}).padding({d, 4})));
  }
  convs->push_back(torch::nn::Conv2d(Opt(filters, filters, {3, 3}).padding({1, 1})));
  post = register_module("post", torch::nn::Conv2d(Opt(filters, 1, {3, 3}).padding({1, 1})));
}

DiscriminatorOutput StftDiscriminatorImpl::forward(const torch::Tensor& x) {
  auto flat = x.dim() == 3 ? x.squeeze(1) : x;
  auto spec = torch::stft(flat, n_fft, n_fft / 4, n_fft, window.to(flat.dtype()),
                          /*center=*/true, "constant", /*normalized=*/true,
                          /*onesided=*/true, /*return_complex=*/true);
  // [B, bins, frames] complex -> [B, 2, frames, bins]
  auto h = torch::stack({torch::real(spec), torch::imag(spec)}, 1).transpose(2, 3);
  DiscriminatorOutput out;
  for (const auto& m : *convs) {
    h = F::leaky_relu(m->as<torch::nn::Conv2d>()->forward(h),
                      F::LeakyReLUFuncOptions().negative_slope(0.2));
    out.features.push_back(h);
  }
  out.logits = post(h);
  return out;
}

MultiScaleStftDiscriminatorImpl::MultiScaleStftDiscriminatorImpl(
    const DiscriminatorConfig& cfg) {
  PAST_REQUIRE(!cfg.n_ffts.empty() && cfg.filters > 0, kConfig,
               "discriminator needs at least one resolution");
  discs = register_module("discs", torch::nn::ModuleList());
  for (int n : cfg.n_ffts) {
    PAST_REQUIRE(n >= 16, kConfig, "discriminator n_fft too small: " + std::to_string(n));
    discs->push_back(StftDiscriminator(n, cfg.filters));
  }
}

std::vector<DiscriminatorOutput> MultiScaleStftDiscriminatorImpl::forward(
    const torch::Tensor& x) {
  std::vector<DiscriminatorOutput> outs;
  for (const auto& m : *discs) outs.push_back(m->as<StftDiscriminatorImpl>()->forward(x));
  return outs;
}

HingeLosses DiscriminatorHinge(const std::vector<DiscriminatorOutput>& real,
                               const std::vector<DiscriminatorOutput>& fake) {
  PAST_REQUIRE(real.size() == fake.size() && !real.empty(), kArgument,
               "discriminator output count mismatch");
  HingeLosses out;
  for (size_t i = 0; i < real.size(); ++i) {
    auto r = torch::relu(1.0 - real[i].logits).mean();
    auto f = torch::relu(1.0 + fake[i].logits).mean();
    out.real = out.real.defined() ? out.real + r : r;
    out.fake = out.fake.defined() ? out.fake + f : f;
  }
  out.real = out.real / static_cast<double>(real.size());
  out.fake = out.fake / static_cast<double>(real.size());
  return out;
}

torch::Tensor GeneratorAdversarial(const std::vector<DiscriminatorOutput>& fake) {
  PAST_REQUIRE(!fake.empty(), kArgument, "no discriminator outputs");
  torch::Tensor total;
  for (const auto& f : fake) {
    auto t = torch::relu(1.0 - f.logits).mean();
    total = total.defined() ? total + t : t;
  }
  return total / static_cast<double>(fake.size());
}

torch::Tensor FeatureMatching(const std::vector<DiscriminatorOutput>& real,
                              const std::vector<DiscriminatorOutput>& fake) {
  PAST_REQUIRE(real.size() == fake.size() && !real.empty(), kArgument,
               "discriminator output count mismatch");
  torch::Tensor total;
  int64_t count = 0;
  for (size_t i = 0; i < real.size(); ++i) {
    for (size_t l = 0; l < real[i].features.size(); ++l) {
      auto r = real[i].features[l].detach();
      auto t = (r - fake[i].features[l]).abs().mean() / (r.abs().mean() + 1e-8);
      total = total.defined() ? total + t : t;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace past
