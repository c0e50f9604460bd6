// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "codec/rvq.h"

#include "core/errors.h"

namespace past {

VqLayerImpl::VqLayerImpl(int dim, int codebook_size) {
  embed = register_buffer("embed", torch::randn({codebook_size, dim}));
  cluster_size = register_buffer("cluster_size", torch::ones({codebook_size}));
  embed_sum = register_buffer("embed_sum", embed.clone());
  usage = register_buffer("usage", torch::zeros({codebook_size}));
  last_used = register_buffer("last_used", torch::zeros({codebook_size}));
  initialized_flag = register_buffer("initialized", torch::zeros({1}));
}

torch::Tensor VqLayerImpl::Nearest(const torch::Tensor& x) const {
  auto e = embed.to(x.dtype());
  auto dist = x.pow(2).sum(1, true) - 2 * torch::matmul(x, e.t()) +
              e.pow(2).sum(1).unsqueeze(0);
  return dist.argmin(1);
}

void VqLayerImpl::KmeansInit(const torch::Tensor& x_in, int iters,
                             std::mt19937_64& rng) {
  torch::NoGradGuard guard;
  auto x = x_in.to(torch::kFloat64).contiguous();
  const int64_t n = x.size(0), k = embed.size(0);
  PAST_REQUIRE(n > 0, kArgument, "k-means init on an empty batch");
  std::vector<int64_t> picks;
  picks.reserve(k);
  picks.push_back(std::uniform_int_distribution<int64_t>(0, n - 1)(rng));
  auto best = (x - x[picks[0]]).pow(2).sum(1);
  while (static_cast<int64_t>(picks.size()) < k) {
    auto w = best.contiguous();
    const double* wp = w.data_ptr<double>();
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) total += wp[i];
    int64_t choice;
    if (total <= 0.0) {
      choice = std::uniform_int_distribution<int64_t>(0, n - 1)(rng);
    } else {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      choice = n - 1;
      for (int64_t i = 0; i < n; ++i) {
        r -= wp[i];
        if (r < 0) {
          choice = i;
          break;
        }
      }
    }
    picks.push_back(choice);
    best = torch::minimum(best, (x - x[choice]).pow(2).sum(1));
  }
  auto centers = x.index_select(0, torch::tensor(picks, torch::kInt64));
  auto counts = torch::zeros({k}, torch::kFloat64);
  for (int it = 0; it <= iters; ++it) {
    auto dist = x.pow(2).sum(1, true) - 2 * torch::matmul(x, centers.t()) +
                centers.pow(2).sum(1).unsqueeze(0);
    auto assign = dist.argmin(1);
    counts = torch::bincount(assign, {}, k).to(torch::kFloat64);
    if (it == iters) break;
    auto sums = torch::zeros_like(centers).index_add_(0, assign, x);
    auto nonempty = (counts > 0).unsqueeze(1);
    centers = torch::where(nonempty, sums / counts.clamp_min(1).unsqueeze(1), centers);
  }
  embed.copy_(centers.to(embed.dtype()));
  cluster_size.copy_(counts.clamp_min(1.0).to(cluster_size.dtype()));
  embed_sum.copy_(embed * cluster_size.unsqueeze(1));
  initialized_flag.fill_(1.0);
}

void VqLayerImpl::EmaUpdate(const torch::Tensor& x_in, const torch::Tensor& indices,
                            const RvqConfig& cfg, int64_t step, std::mt19937_64& rng) {
  torch::NoGradGuard guard;
  auto x = x_in.to(embed.dtype());
  const int64_t k = embed.size(0);
  const double decay = cfg.ema_decay;
  auto counts = torch::bincount(indices, {}, k).to(embed.dtype());
  auto sums = torch::zeros_like(embed).index_add_(0, indices, x);
  cluster_size.mul_(decay).add_(counts, 1.0 - decay);
  embed_sum.mul_(decay).add_(sums, 1.0 - decay);
  const double total = cluster_size.sum().item<double>();
  auto smoothed = (cluster_size + cfg.epsilon) / (total + k * cfg.epsilon) * total;
  embed.copy_(embed_sum / smoothed.unsqueeze(1));
  usage.add_(counts);
  last_used.masked_fill_(counts > 0, static_cast<double>(step));

  auto dead = ((static_cast<double>(step) - last_used) >= cfg.dead_code_steps)
                  .nonzero()
                  .flatten();
  const int64_t n_dead = dead.size(0);
  if (n_dead == 0) return;
  std::uniform_int_distribution<int64_t> pick(0, x.size(0) - 1);
  std::vector<int64_t> rows(n_dead);
  for (auto& r : rows) r = pick(rng);
  auto fresh = x.index_select(0, torch::tensor(rows, torch::kInt64));
  embed.index_copy_(0, dead, fresh);
  embed_sum.index_copy_(0, dead, fresh);
  cluster_size.index_fill_(0, dead, 1.0);
  last_used.index_fill_(0, dead, static_cast<double>(step));
}

ResidualVqImpl::ResidualVqImpl(int dim, const RvqConfig& cfg_) : cfg(cfg_) {
  for (int i = 0; i < cfg.n_q; ++i) layers->push_back(VqLayer(dim, cfg.codebook_size));
  register_module("layers", layers);
}

RvqOutput ResidualVqImpl::forward(const torch::Tensor& z, int n_q,
                                  const RvqUpdate& update, const RvqFrozen* frozen) {
  PAST_REQUIRE(n_q >= 1 && n_q <= cfg.n_q, kArgument,
               "n_q must be in [1, " + std::to_string(cfg.n_q) + "], got " +
                   std::to_string(n_q));
  const int64_t B = z.size(0), D = z.size(1), T = z.size(2);
  RvqOutput out;
  std::vector<torch::Tensor> codes;
  torch::Tensor residual = z;
  torch::Tensor sum_q;
  for (int i = 0; i < n_q; ++i) {
    VqLayer vq = layer(i);
    auto flat = residual.detach().transpose(1, 2).reshape({B * T, D});
    torch::Tensor idx;
    if (frozen != nullptr) {
      idx = frozen->codes.select(1, i).reshape({B * T});
    } else {
      if (update.enabled && !vq->initialized()) {
        PAST_REQUIRE(update.rng != nullptr, kState, "codebook update needs an rng");
        vq->KmeansInit(flat, cfg.kmeans_iters, *update.rng);
      }
      idx = vq->Nearest(flat);
    }
    auto q = vq->embed.to(z.dtype()).index_select(0, idx).view({B, T, D}).transpose(1, 2);
    if (frozen == nullptr && update.enabled) {
      vq->EmaUpdate(flat, idx, cfg, update.step, *update.rng);
    }
    out.residuals.push_back(residual);
    out.layer_quantized.push_back(q.detach());
    codes.push_back(idx.view({B, T}));
    residual = residual - q.detach();
    sum_q = sum_q.defined() ? sum_q + q.detach() : q.detach();
  }
  out.codes = torch::stack(codes, 1);
  out.sum = sum_q;
  if (frozen != nullptr) {
    out.quantized = z + frozen->offset;
    out.first = z + frozen->first_offset;
  } else {
    out.quantized = z + (sum_q - z).detach();
    out.first = z + (out.layer_quantized[0] - z).detach();
  }
  return out;
}

torch::Tensor ResidualVqImpl::Decode(const torch::Tensor& codes, int n_q) const {
  if (n_q < 0) n_q = static_cast<int>(codes.size(1));
  PAST_REQUIRE(n_q >= 1 && n_q <= codes.size(1) && n_q <= cfg.n_q, kArgument,
               "dequantize n_q out of range");
  const int64_t B = codes.size(0), T = codes.size(2);
  torch::Tensor sum;
  for (int i = 0; i < n_q; ++i) {
    auto c = codes.select(1, i).reshape({B * T});
    PAST_REQUIRE(c.numel() == 0 || (c.min().item<int64_t>() >= 0 &&
                                    c.max().item<int64_t>() < cfg.codebook_size),
                 kData, "token index outside the codebook");
    auto e = layer(i)->embed.index_select(0, c).view({B, T, -1}).transpose(1, 2);
    sum = sum.defined() ? sum + e : e;
  }
  return sum;
}

}  // namespace past
