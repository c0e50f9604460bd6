// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "supervision/heads.h"

#include "core/errors.h"

namespace past {

CtcHeadImpl::CtcHeadImpl(int dim, int hidden, int classes) {
  in_proj = register_module("in_proj", torch::nn::Linear(dim, hidden));
  lstm = register_module(
      "lstm", torch::nn::LSTM(torch::nn::LSTMOptions(hidden, hidden / 2).bidirectional(true)));
  out_proj = register_module("out_proj", torch::nn::Linear(hidden, classes));
  torch::NoGradGuard guard;
  out_proj->weight.zero_();
  out_proj->bias.zero_();
}

torch::Tensor CtcHeadImpl::forward(const torch::Tensor& z_first) {
  auto h = in_proj(z_first.permute({2, 0, 1}));  // [T, B, h]
  auto y = std::get<0>(lstm(h));
  return out_proj(y).transpose(0, 1);  // [B, T, C]
}

PhoneHeadImpl::PhoneHeadImpl(int dim, int phones) {
  proj = register_module("proj", torch::nn::Linear(dim, phones));
}

torch::Tensor PhoneHeadImpl::forward(const torch::Tensor& z_first) {
  return proj(z_first.transpose(1, 2));
}

namespace {

// Autograd wrapper around the forward-backward recursion in ctc.cc.
struct CtcFunction : torch::autograd::Function<CtcFunction> {
  static torch::Tensor forward(torch::autograd::AutogradContext* ctx,
                               torch::Tensor log_probs,
                               const std::vector<std::optional<std::vector<int>>>* targets,
                               int64_t blank) {
    const int64_t B = log_probs.size(0), T = log_probs.size(1), C = log_probs.size(2);
    auto lp = log_probs.detach().to(torch::kFloat64).contiguous();
    auto grad = torch::zeros({B, T, C}, torch::kFloat64);
    double total = 0.0;
    int64_t items = 0;
    for (int64_t b = 0; b < B; ++b) {
      const auto& target = (*targets)[b];
      if (!target) continue;
      ++items;
    }
    for (int64_t b = 0; b < B; ++b) {
      const auto& target = (*targets)[b];
      if (!target) continue;
      std::span<const double> row(lp[b].data_ptr<double>(), static_cast<size_t>(T * C));
      CtcResult r = CtcForwardBackward(row, static_cast<int>(T), static_cast<int>(C),
                                       *target, static_cast<int>(blank), true);
      const double norm = std::max<size_t>(1, target->size()) * static_cast<double>(items);
      total += r.loss / norm;
      auto g = torch::from_blob(r.grad.data(), {T, C}, torch::kFloat64);
      grad[b].copy_(g / norm);
    }
    ctx->saved_data["grad"] = grad.to(log_probs.dtype());
    return torch::tensor(total, log_probs.options());
  }

  static torch::autograd::variable_list backward(torch::autograd::AutogradContext* ctx,
                                                 torch::autograd::variable_list grads) {
    auto grad = ctx->saved_data["grad"].toTensor();
    return {grad * grads[0], torch::Tensor(), torch::Tensor()};
  }
};

}  // namespace

torch::Tensor CtcLossBatch(const torch::Tensor& logits,
                           const std::vector<std::optional<std::vector<int>>>& targets,
                           int blank) {
  PAST_REQUIRE(logits.dim() == 3 && static_cast<size_t>(logits.size(0)) == targets.size(),
               kArgument, "CTC batch shape mismatch");
  bool any = false;
  for (const auto& t : targets) any = any || t.has_value();
  if (!any) return (logits * 0.0).sum();
  auto log_probs = torch::log_softmax(logits, -1);
  return CtcFunction::apply(log_probs, &targets, blank);
}

torch::Tensor PhonemeCeBatch(const torch::Tensor& logits, const torch::Tensor& labels,
                             const torch::Tensor& mask) {
  PAST_REQUIRE(logits.size(0) == labels.size(0) && logits.size(1) == labels.size(1),
               kArgument, "phoneme labels do not match logits");
  const int64_t P = logits.size(2);
  auto masked = labels.masked_fill(mask.logical_not().unsqueeze(1), -1);
  PAST_REQUIRE(masked.numel() == 0 || masked.max().item<int64_t>() < P, kData,
               "phoneme label out of range");
  auto valid = masked >= 0;
  const int64_t count = valid.sum().item<int64_t>();
  if (count == 0) return (logits * 0.0).sum();
  auto lp = torch::log_softmax(logits, -1);
  auto picked = lp.gather(2, masked.clamp_min(0).unsqueeze(2)).squeeze(2);
  return -(picked * valid.to(lp.dtype())).sum() / static_cast<double>(count);
}

CharPosterior ToCharPosterior(const torch::Tensor& logits_bt, int64_t item) {
  auto l = logits_bt[item].detach().to(torch::kFloat32).t().contiguous();  // [C, T]
  CharPosterior p;
  p.classes = static_cast<int>(l.size(0));
  p.frames = static_cast<int>(l.size(1));
  p.logits.assign(l.data_ptr<float>(), l.data_ptr<float>() + l.numel());
  return p;
}

PhonePosterior ToPhonePosterior(const torch::Tensor& logits_bt, int64_t item) {
  auto l = logits_bt[item].detach().to(torch::kFloat32).t().contiguous();
  PhonePosterior p;
  p.classes = static_cast<int>(l.size(0));
  p.frames = static_cast<int>(l.size(1));
  p.logits.assign(l.data_ptr<float>(), l.data_ptr<float>() + l.numel());
  return p;
}

}  // namespace past
