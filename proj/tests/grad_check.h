// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "codec/model.h"
#include "test_util.h"

namespace past::testing {

struct GradCheckResult {
  int checked = 0;
  int failed = 0;
  int nonzero = 0;  // entries with a gradient above the absolute floor
  double worst_rel = 0.0;  // largest |an - fd| / max(|an|, |fd|) among entries
  std::string worst_entry;
};

using NamedTensor = std::pair<std::string, torch::Tensor>;

// Autograd against central differences on `per_tensor` random entries of each
// tensor. An entry passes when |an - fd| <= rel_tol * max(|an|, |fd|) + abs_floor.
inline GradCheckResult CheckGradients(const std::function<torch::Tensor()>& loss_fn,
                                      const std::vector<NamedTensor>& params, int per_tensor,
                                      std::mt19937_64& rng, double rel_tol = 5e-3,
                                      double abs_floor = 1e-8, double h = 1e-6) {
  for (const auto& [name, p] : params) {
    if (p.grad().defined()) p.grad().zero_();
  }
  loss_fn().backward();
  GradCheckResult r;
  for (const auto& [name, p] : params) {
    if (!p.grad().defined()) {
      ++r.failed;
      r.worst_entry = name + " (no gradient)";
      continue;
    }
    auto grad = p.grad().clone();
    for (int n = 0; n < per_tensor; ++n) {
      const int64_t i = static_cast<int64_t>(rng() % p.numel());
      double fd = 0.0;
      {
        torch::NoGradGuard guard;
        auto flat = p.view(-1);
        const double orig = flat[i].item<double>();
        flat[i] = orig + h;
        const double up = loss_fn().item<double>();
        flat[i] = orig - h;
        const double dn = loss_fn().item<double>();
        flat[i] = orig;
        fd = (up - dn) / (2 * h);
      }
      const double an = grad.view(-1)[i].item<double>();
      const double scale = std::max(std::abs(an), std::abs(fd));
      const double err = std::abs(an - fd);
      if (err > rel_tol * scale + abs_floor) ++r.failed;
      if (scale > abs_floor) {
        ++r.nonzero;
        const double rel = err / scale;
        if (rel > r.worst_rel) {
          r.worst_rel = rel;
          r.worst_entry = name + "[" + std::to_string(i) + "]";
        }
      }
      ++r.checked;
    }
  }
  return r;
}

// Tiny model in double precision with its codes frozen at the current point,
// so the forward map is differentiable and equals the straight-through
// surrogate used in training.
class FrozenModelProbe {
 public:
  explicit FrozenModelProbe(uint64_t seed, int64_t samples = 1280) {
    model_ = SeededModel(TinyModelConfig(false), seed);
    model_->to(torch::kFloat64);
    {
      // Zero-initialized output projections would make upstream gradients
      // vanish identically.
      torch::NoGradGuard guard;
      for (auto& p : model_->parameters()) {
        if (p.dim() >= 2 && p.abs().max().item<double>() == 0.0) p.normal_(0.0, 0.3);
      }
    }
    std::mt19937_64 rng(seed + 1);
    x_ = torch::tensor(RandomSignal(samples, rng), torch::kFloat64).view({1, 1, -1});
    torch::NoGradGuard guard;
    auto ref = model_->forward(x_, MixMode::kAverage, model_->cfg.rvq.n_q);
    frozen_ = {ref.rvq.codes, ref.rvq.sum - ref.z_mixed, ref.rvq.layer_quantized[0] - ref.z_mixed};
  }

  ForwardOutputs Forward() {
    ForwardOptions opts;
    opts.frozen = &frozen_;
    return model_->forward(x_, MixMode::kAverage, model_->cfg.rvq.n_q, opts);
  }

  // Up to `count` parameters whose name starts with `prefix`.
  std::vector<NamedTensor> Params(const std::string& prefix, size_t count) {
    std::vector<NamedTensor> out;
    for (const auto& item : model_->named_parameters()) {
      if (item.key().rfind(prefix, 0) == 0 && out.size() < count)
        out.emplace_back(item.key(), item.value());
    }
    return out;
  }

  PastModel& model() { return model_; }
  const torch::Tensor& input() const { return x_; }
  int64_t frames() const { return x_.size(-1) / model_->cfg.Hop(); }

 private:
  PastModel model_{nullptr};
  torch::Tensor x_;
  RvqFrozen frozen_;
};

inline std::vector<NamedTensor> Concat(std::vector<NamedTensor> a,
                                       const std::vector<NamedTensor>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace past::testing
