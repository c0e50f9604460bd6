// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "train/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "core/errors.h"

namespace past {

double CosineLearningRate(int64_t step, double lr, int warmup, int total) {
  if (warmup > 0 && step < warmup) return lr * static_cast<double>(step + 1) / warmup;
  const double span = std::max(1, total - warmup);
  const double progress = std::min(1.0, static_cast<double>(step - warmup) / span);
  return lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

ForwardOptions HeadOptions(const Batch& batch, const LossWeights& weights) {
  ForwardOptions opts;
  bool any_target = false;
  for (const auto& t : batch.targets) any_target |= t.has_value();
  opts.run_ctc_head = weights.lambda_ctc > 0.0 && any_target;
  opts.run_phone_head =
      weights.lambda_phn > 0.0 && batch.phone_mask.defined() && batch.phone_mask.any().item<bool>();
  return opts;
}

LossTerms ComputeLossTerms(const ForwardOutputs& out, const torch::Tensor& x,
                           const Batch& batch, const LossWeights& weights, const MelLoss& mel,
                           MultiScaleStftDiscriminator* disc) {
  LossTerms terms;
  if (out.ctc_logits.defined()) terms.ctc = CtcLossBatch(out.ctc_logits, batch.targets);
  if (out.phone_logits.defined()) {
    terms.phn = PhonemeCeBatch(out.phone_logits, batch.phone_labels, batch.phone_mask);
  }
  auto rec = ComputeReconstruction(x, out.x_hat, mel);
  terms.time = rec.time;
  terms.mel = rec.mel;
  terms.commit = RvqCommitment(out.rvq.residuals, out.rvq.layer_quantized);
  if (disc != nullptr && weights.AdversarialEnabled()) {
    auto fake = (*disc)->forward(out.x_hat);
    terms.adv = GeneratorAdversarial(fake);
    if (weights.feature_matching > 0.0) {
      std::vector<DiscriminatorOutput> real;
      {
        torch::NoGradGuard guard;
        real = (*disc)->forward(x);
      }
      terms.fm = FeatureMatching(real, fake);
    }
  }
  return terms;
}

nlohmann::json StepRecord::ToJson() const {
  nlohmann::json j = {{"step", step},
                      {"lr", lr},
                      {"mix_mode", MixModeName(mode)},
                      {"total", total},
                      {"encodec", encodec},
                      {"disc", disc_loss},
                      {"transformer_grad_share", transformer_grad_share},
                      {"seconds", seconds}};
  for (const auto& [k, v] : raw) j["loss_" + k] = v;
  return j;
}

namespace {

double GradNorm(const std::vector<torch::Tensor>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.grad().defined()) sq += p.grad().to(torch::kFloat64).pow(2).sum().item<double>();
  }
  return std::sqrt(sq);
}

void ExportAdam(const torch::optim::Adam& opt, const std::string& prefix, TensorArchive& ar,
                nlohmann::json& meta) {
  nlohmann::json steps = nlohmann::json::array();
  int i = 0;
  for (const auto& group : opt.param_groups()) {
    for (const auto& p : group.params()) {
      auto it = opt.state().find(p.unsafeGetTensorImpl());
      if (it == opt.state().end()) {
        steps.push_back(-1);
      } else {
        const auto& st = static_cast<const torch::optim::AdamParamState&>(*it->second);
        steps.push_back(st.step());
        for (const auto& [name, t] : {std::pair{"exp_avg", st.exp_avg()},
                                      std::pair{"exp_avg_sq", st.exp_avg_sq()}}) {
          auto c = t.to(torch::kFloat32).contiguous();
          ar.Put(prefix + std::to_string(i) + "." + name,
                 std::vector<int64_t>(c.sizes().begin(), c.sizes().end()),
                 std::vector<float>(c.data_ptr<float>(), c.data_ptr<float>() + c.numel()));
        }
      }
      ++i;
    }
  }
  meta = steps;
}

void ImportAdam(torch::optim::Adam& opt, const std::string& prefix, const TensorArchive& ar,
                const nlohmann::json& meta) {
  int i = 0;
  opt.state().clear();
  for (auto& group : opt.param_groups()) {
    for (auto& p : group.params()) {
      PAST_REQUIRE(i < static_cast<int>(meta.size()), kCheckpoint,
                   "optimizer state has fewer entries than parameters");
      const int64_t step = meta[i].get<int64_t>();
      if (step >= 0) {
        auto st = std::make_unique<torch::optim::AdamParamState>();
        st->step(step);
        auto load = [&](const std::string& name) {
          const ArchiveTensor& a = ar.Get(prefix + std::to_string(i) + "." + name);
          PAST_REQUIRE(a.numel() == p.numel(), kCheckpoint, "optimizer state shape mismatch");
          return torch::from_blob(const_cast<float*>(a.values.data()), p.sizes(),
                                  torch::kFloat32)
              .to(p.dtype())
              .clone();
        };
        st->exp_avg(load("exp_avg"));
        st->exp_avg_sq(load("exp_avg_sq"));
        opt.state()[p.unsafeGetTensorImpl()] = std::move(st);
      }
      ++i;
    }
  }
}

void SetLearningRate(torch::optim::Adam& opt, double lr) {
  for (auto& g : opt.param_groups()) {
    static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr);
  }
}

}  // namespace

std::string CheckpointName(int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%07lld.ckpt", static_cast<long long>(step));
  return buf;
}

Trainer::Trainer(const RunConfig& cfg, const Corpus& phonetic, const Corpus& transcribed)
    : cfg_(cfg),
      phonetic_(phonetic),
      transcribed_(transcribed),
      mel_(cfg.loss.mel_min_scale, cfg.loss.mel_max_scale, cfg.loss.mel_bins,
           cfg.model.sample_rate),
      rng_(cfg.seed) {
  torch::manual_seed(cfg.seed);
  model_ = PastModel(cfg.model);
  auto betas = std::make_tuple(cfg.train.beta1, cfg.train.beta2);
  g_opt_ = std::make_unique<torch::optim::Adam>(
      model_->parameters(), torch::optim::AdamOptions(cfg.train.lr).betas(betas));
  if (cfg.loss.AdversarialEnabled()) {
    disc_ = MultiScaleStftDiscriminator(cfg.disc);
    d_opt_ = std::make_unique<torch::optim::Adam>(
        disc_->parameters(), torch::optim::AdamOptions(cfg.train.lr).betas(betas));
  }
}

double Trainer::CurrentLearningRate() const {
  return CosineLearningRate(step_, cfg_.train.lr, cfg_.train.EffectiveWarmup(),
                            cfg_.train.steps);
}

StepRecord Trainer::Step() {
  const auto t0 = std::chrono::steady_clock::now();
  StepRecord rec;
  rec.step = step_;
  rec.lr = CurrentLearningRate();
  SetLearningRate(*g_opt_, rec.lr);
  if (d_opt_) SetLearningRate(*d_opt_, rec.lr);

  Batch batch = SampleBatch(phonetic_, transcribed_, cfg_.train.batch, cfg_.model.sample_rate,
                            cfg_.model.Hop(), rng_);
  rec.mode = cfg_.model.use_transformer
                 ? SampleMixMode(rng_, cfg_.model.p_trns_only, cfg_.model.p_skip_only)
                 : MixMode::kSkipOnly;
  ForwardOptions opts = HeadOptions(batch, cfg_.loss);
  opts.update = RvqUpdate{true, step_, &rng_};
  model_->train();
  ForwardOutputs out = model_->forward(batch.audio, rec.mode, cfg_.model.rvq.n_q, opts);

  if (d_opt_) {
    d_opt_->zero_grad();
    auto fake = out.x_hat.detach();
    auto hinge = DiscriminatorHinge(disc_->forward(batch.audio), disc_->forward(fake));
    auto d_loss = hinge.total();
    rec.disc_loss = d_loss.item<double>();
    if (!std::isfinite(rec.disc_loss)) Fail(ErrorKind::kTraining, "non-finite discriminator loss");
    d_loss.backward();
    d_opt_->step();
  }

  g_opt_->zero_grad();
  LossTerms terms = ComputeLossTerms(out, batch.audio, batch, cfg_.loss, mel_,
                                     d_opt_ ? &disc_ : nullptr);
  TotalLoss loss;
  try {
    loss = ComposeLoss(terms, cfg_.loss);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kTraining) {
      std::error_code ec;
      std::filesystem::create_directories("past_nan_dump", ec);
      SaveCheckpoint("past_nan_dump/" + CheckpointName(step_));
    }
    throw;
  }
  loss.total.backward();
  const double total_norm = GradNorm(model_->parameters());
  const double trns_norm = GradNorm(model_->TransformerParameters());
  rec.transformer_grad_share = total_norm > 0.0 ? trns_norm / total_norm : 0.0;
  g_opt_->step();

  rec.total = loss.total.item<double>();
  rec.encodec = loss.encodec;
  rec.raw = loss.raw;
  rec.weighted = loss.breakdown;
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ++step_;
  return rec;
}

void Trainer::Run(const RunOptions& opts) {
  namespace fs = std::filesystem;
  std::ofstream log;
  fs::path ckpt_dir;
  if (!opts.out_dir.empty()) {
    std::error_code ec;
    ckpt_dir = fs::path(opts.out_dir) / "checkpoints";
    fs::create_directories(ckpt_dir, ec);
    PAST_REQUIRE(!ec, kIo, "cannot create " + ckpt_dir.string());
    log.open(fs::path(opts.out_dir) / "metrics.jsonl", step_ == 0 ? std::ios::trunc : std::ios::app);
    PAST_REQUIRE(log, kIo, "cannot open metric log in " + opts.out_dir);
  }
  auto checkpoint = [&]() {
    if (opts.write_checkpoints && !ckpt_dir.empty()) {
      SaveCheckpoint((ckpt_dir / CheckpointName(step_)).string());
    }
  };
  if (step_ == 0) checkpoint();
  while (step_ < cfg_.train.steps) {
    StepRecord rec = Step();
    if (log.is_open() && (rec.step % std::max(1, cfg_.train.log_every) == 0 ||
                          step_ == cfg_.train.steps)) {
      log << rec.ToJson().dump() << "\n";
      log.flush();
    }
    if (opts.on_step) opts.on_step(rec);
    if ((cfg_.train.checkpoint_every > 0 && step_ % cfg_.train.checkpoint_every == 0) ||
        step_ == cfg_.train.steps) {
      checkpoint();
    }
  }
}

void Trainer::SaveCheckpoint(const std::string& path) const {
  TensorArchive ar;
  ar.meta["kind"] = "past-train";
  ar.meta["model"] = ModelConfigToJson(cfg_.model);
  ar.meta["config"] = RunConfigToJson(cfg_);
  std::ostringstream rng;
  rng << rng_;
  ar.meta["train_state"] = {{"step", step_}, {"rng", rng.str()}, {"lr", CurrentLearningRate()}};
  ExportModule(*model_, "model.", ar);
  ExportAdam(*g_opt_, "gopt.", ar, ar.meta["gopt"]);
  if (d_opt_) {
    ExportModule(*disc_, "disc.", ar);
    ExportAdam(*d_opt_, "dopt.", ar, ar.meta["dopt"]);
  }
  ar.Save(path);
}

void Trainer::LoadCheckpoint(const std::string& path) {
  TensorArchive ar = TensorArchive::Load(path);
  PAST_REQUIRE(ar.meta.value("kind", std::string()) == "past-train", kCheckpoint,
               path + " is not a training checkpoint");
  PAST_REQUIRE(ar.meta["model"] == ModelConfigToJson(cfg_.model), kCheckpoint,
               "checkpoint model config differs from the run config");
  ImportModule(*model_, "model.", ar);
  ImportAdam(*g_opt_, "gopt.", ar, ar.meta.at("gopt"));
  if (d_opt_) {
    PAST_REQUIRE(ar.meta.contains("dopt"), kCheckpoint, "checkpoint has no discriminator state");
    ImportModule(*disc_, "disc.", ar);
    ImportAdam(*d_opt_, "dopt.", ar, ar.meta["dopt"]);
  }
  const auto& st = ar.meta.at("train_state");
  step_ = st.at("step").get<int64_t>();
  std::istringstream rng(st.at("rng").get<std::string>());
  rng >> rng_;
  PAST_REQUIRE(!rng.fail(), kCheckpoint, "corrupt rng state in " + path);
}

}  // namespace past
