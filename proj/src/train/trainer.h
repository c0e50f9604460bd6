// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>

#include <torch/torch.h>

#include "codec/model.h"
#include "core/archive.h"
#include "core/config.h"
#include "train/corpus.h"
#include "train/discriminator.h"
#include "train/losses.h"

namespace past {

// Linear warm-up to `lr` over `warmup` steps, then cosine decay to zero at
// `total` steps. `step` counts from 0.
double CosineLearningRate(int64_t step, double lr, int warmup, int total);

// All loss terms of one generator step. Runs the auxiliary heads only when
// their weight is positive and the batch carries matching labels; runs the
// discriminator only when `disc` is given and an adversarial weight is
// positive.
LossTerms ComputeLossTerms(const ForwardOutputs& out, const torch::Tensor& x,
                           const Batch& batch, const LossWeights& weights, const MelLoss& mel,
                           MultiScaleStftDiscriminator* disc);

// Options for the forward pass matching `weights` (which heads to run).
ForwardOptions HeadOptions(const Batch& batch, const LossWeights& weights);

struct StepRecord {
  int64_t step = 0;
  double lr = 0.0;
  MixMode mode = MixMode::kAverage;
  double total = 0.0;
  double encodec = 0.0;
  std::map<std::string, double> raw;        // unweighted terms
  std::map<std::string, double> weighted;   // weighted contributions
  double disc_loss = 0.0;
  double transformer_grad_share = 0.0;  // |g_transformer| / |g_generator|
  double seconds = 0.0;

  nlohmann::json ToJson() const;
};

struct RunOptions {
  std::string out_dir;                 // checkpoints/ and metrics.jsonl
  bool write_checkpoints = true;
  std::function<void(const StepRecord&)> on_step;
};

class Trainer {
 public:
  // The corpora must outlive the trainer.
  Trainer(const RunConfig& cfg, const Corpus& phonetic, const Corpus& transcribed);

  StepRecord Step();
  // Steps until cfg.train.steps; writes the initial checkpoint when starting
  // from step 0, then every checkpoint_every steps and at the end.
  void Run(const RunOptions& opts);

  // Full training state: model, discriminator, both optimizers, rng, step.
  void SaveCheckpoint(const std::string& path) const;
  void LoadCheckpoint(const std::string& path);

  int64_t step() const { return step_; }
  PastModel& model() { return model_; }
  const RunConfig& config() const { return cfg_; }
  double CurrentLearningRate() const;

 private:
  RunConfig cfg_;
  const Corpus& phonetic_;
  const Corpus& transcribed_;
  PastModel model_{nullptr};
  MultiScaleStftDiscriminator disc_{nullptr};
  std::unique_ptr<torch::optim::Adam> g_opt_;
  std::unique_ptr<torch::optim::Adam> d_opt_;
  MelLoss mel_;
  std::mt19937_64 rng_;
  int64_t step_ = 0;
};

std::string CheckpointName(int64_t step);

}  // namespace past
