// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace past {

struct TransformerConfig {
  int layers = 2;
  int hidden = 128;
  int heads = 4;
  int ff = 256;
  int window = 150;   // frames processed per attention window
  int overlap = 50;   // frames shared by consecutive windows
};

struct RvqConfig {
  int n_q = 4;
  int codebook_size = 64;
  double ema_decay = 0.99;
  int kmeans_iters = 10;
  // Entries not selected for this many training steps are reseeded.
  int dead_code_steps = 200;
  double epsilon = 1e-5;
};

struct ModelConfig {
  int sample_rate = 16000;
  std::vector<int> ratios = {8, 5, 4, 2};
  int dim = 32;
  int n_filters = 8;
  int n_residual_layers = 1;
  int lstm_layers = 2;
  bool causal = false;
  bool use_transformer = true;
  TransformerConfig transformer;
  RvqConfig rvq;
  int ctc_hidden = 64;
  int n_chars = 28;
  int n_phones = 8;
  double p_trns_only = 0.3;
  double p_skip_only = 0.1;

  int Hop() const;
  int FrameRate() const { return sample_rate / Hop(); }
};

struct LossWeights {
  double lambda_ctc = 12.0;
  double lambda_phn = 5.0;
  double time = 0.1;
  double mel = 1.0;
  double adversarial = 3.0;
  double feature_matching = 3.0;
  double commitment = 1.0;
  int mel_min_scale = 5;   // window 2^5
  int mel_max_scale = 11;  // window 2^11
  int mel_bins = 64;

  bool AdversarialEnabled() const {
    return adversarial > 0.0 || feature_matching > 0.0;
  }
};

struct DiscriminatorConfig {
  std::vector<int> n_ffts = {512, 256, 128};
  int filters = 8;
};

struct BatchSpec {
  double segment_seconds = 3.0;
  int batch_size = 16;
  // Probability that a batch item comes from the phoneme-annotated corpus.
  double phonetic_fraction = 0.1;
};

struct TrainConfig {
  int steps = 5000;
  double lr = 3e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  int warmup_steps = 4000;
  double warmup_scale = 0.05;
  int checkpoint_every = 1000;
  int log_every = 10;
  BatchSpec batch;

  int EffectiveWarmup() const;
};

struct DataConfig {
  int n_utterances = 400;       // per training corpus
  int n_test_utterances = 48;   // phoneme-annotated held-out split
  int phone_set_size = 8;       // includes the silence phone 0
  int n_speakers = 8;
  int phone_frames = 5;         // fixed duration of every phone, in frames
  int lexicon_words = 24;
  int min_word_phones = 2;
  int max_word_phones = 4;
  int min_words = 4;
  int max_words = 10;
  // Nuisance variation layered over the phone identity.
  double f0_min_hz = 80.0;
  double f0_max_hz = 280.0;
  double vocal_tract_spread = 0.2;  // speaker formant scale in [1 - s, 1 + s]
  double formant_jitter = 0.05;     // per-phone-token relative formant jitter
  double gain_db_spread = 10.0;     // per-phone-token gain in [-g, +g] dB
  double noise_snr_db_min = 10.0;   // per-utterance background noise level
  double noise_snr_db_max = 30.0;
};

struct LmConfig {
  int layers = 2;
  int hidden = 128;
  int heads = 4;
  int ff = 256;
  int context = 128;
  int steps = 1500;
  int batch_size = 16;
  double lr = 1e-3;
  int renders_per_word = 4;  // lexical probe renders per lexicon word
};

struct EvalConfig {
  int abx_max_triplets = 100000;
};

struct RunConfig {
  std::string preset = "tiny";
  uint64_t seed = 0;
  ModelConfig model;
  LossWeights loss;
  DiscriminatorConfig disc;
  TrainConfig train;
  DataConfig data;
  LmConfig lm;
  EvalConfig eval;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TransformerConfig, layers, hidden, heads, ff,
                                   window, overlap)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RvqConfig, n_q, codebook_size, ema_decay,
                                   kmeans_iters, dead_code_steps, epsilon)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ModelConfig, sample_rate, ratios, dim,
                                   n_filters, n_residual_layers, lstm_layers,
                                   causal, use_transformer, transformer, rvq,
                                   ctc_hidden, n_chars, n_phones, p_trns_only,
                                   p_skip_only)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LossWeights, lambda_ctc, lambda_phn, time,
                                   mel, adversarial, feature_matching,
                                   commitment, mel_min_scale, mel_max_scale,
                                   mel_bins)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DiscriminatorConfig, n_ffts, filters)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BatchSpec, segment_seconds, batch_size,
                                   phonetic_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrainConfig, steps, lr, beta1, beta2,
                                   warmup_steps, warmup_scale,
                                   checkpoint_every, log_every, batch)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DataConfig, n_utterances, n_test_utterances,
                                   phone_set_size, n_speakers, phone_frames,
                                   lexicon_words, min_word_phones,
                                   max_word_phones, min_words, max_words, f0_min_hz,
                                   f0_max_hz, vocal_tract_spread, formant_jitter,
                                   gain_db_spread, noise_snr_db_min, noise_snr_db_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LmConfig, layers, hidden, heads, ff, context,
                                   steps, batch_size, lr, renders_per_word)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EvalConfig, abx_max_triplets)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RunConfig, preset, seed, model, loss, disc,
                                   train, data, lm, eval)

// Returns the full key tree for a named preset ("tiny" or "paper").
nlohmann::json PresetJson(const std::string& preset);

// Layers `file` (may be null) and `overrides` ("a.b.c=value") on top of the
// preset. Keys not present in the preset are rejected with a config error.
nlohmann::json ResolveConfigJson(const std::string& preset,
                                 const nlohmann::json& file,
                                 const std::vector<std::string>& overrides);

RunConfig RunConfigFromJson(const nlohmann::json& j);
nlohmann::json RunConfigToJson(const RunConfig& cfg);

nlohmann::json ModelConfigToJson(const ModelConfig& m);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

RunConfig TinyConfig();
RunConfig PaperConfig();

// FNV-1a over the compact dump of the resolved config.
uint64_t ConfigHash(const nlohmann::json& j);

}  // namespace past
