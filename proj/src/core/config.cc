// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/config.h"

#include <cmath>

#include "core/errors.h"

namespace past {

int ModelConfig::Hop() const {
  int hop = 1;
  for (int r : ratios) hop *= r;
  return hop;
}

int TrainConfig::EffectiveWarmup() const {
  return static_cast<int>(warmup_steps * warmup_scale + 0.5);
}

RunConfig TinyConfig() { return RunConfig{}; }

RunConfig PaperConfig() {
  RunConfig c;
  c.preset = "paper";
  c.model.dim = 128;
  c.model.n_filters = 32;
  c.model.transformer = {8, 768, 16, 2048, 150, 50};
  c.model.rvq.n_q = 8;
  c.model.rvq.codebook_size = 1024;
  c.model.ctc_hidden = 512;
  c.model.n_phones = 39;
  c.disc = {{1024, 512, 256}, 32};
  c.train.steps = 400000;
  c.train.batch.batch_size = 80;
  c.train.warmup_scale = 1.0;
  c.train.checkpoint_every = 10000;
  c.train.log_every = 100;
  c.lm = {4, 256, 4, 1024, 256, 20000, 32, 3e-4};
  return c;
}

nlohmann::json PresetJson(const std::string& preset) {
  if (preset == "tiny") return TinyConfig();
  if (preset == "paper") return PaperConfig();
  Fail(ErrorKind::kConfig, "unknown preset '" + preset + "' (expected tiny|paper)");
}

namespace {

bool SameKind(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) {
    // An integer slot must not silently absorb a fraction.
    if (a.is_number_integer() && b.is_number_float()) return false;
    return true;
  }
  return a.type() == b.type();
}

void MergeStrict(nlohmann::json& base, const nlohmann::json& over,
                 const std::string& path) {
  PAST_REQUIRE(over.is_object(), kConfig,
               "config section '" + path + "' must be an object");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    PAST_REQUIRE(base.contains(it.key()), kConfig, "unknown config key '" + key + "'");
    nlohmann::json& slot = base[it.key()];
    if (slot.is_object()) {
      MergeStrict(slot, it.value(), key);
    } else {
      PAST_REQUIRE(SameKind(slot, it.value()), kConfig,
                   "config key '" + key + "' has the wrong type");
      slot = it.value();
    }
  }
}

}  // namespace

nlohmann::json ResolveConfigJson(const std::string& preset,
                                 const nlohmann::json& file,
                                 const std::vector<std::string>& overrides) {
  std::string base_preset = preset;
  if (file.is_object() && file.contains("preset") && preset.empty())
    base_preset = file["preset"].get<std::string>();
  if (base_preset.empty()) base_preset = "tiny";
  nlohmann::json resolved = PresetJson(base_preset);
  if (file.is_object()) {
    nlohmann::json body = file;
    body.erase("preset");
    MergeStrict(resolved, body, "");
  }
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    PAST_REQUIRE(eq != std::string::npos && eq > 0, kConfig,
                 "override must look like key=value: '" + ov + "'");
    const std::string key = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    // Expand "a.b.c" into a nested object and merge it.
    nlohmann::json patch = value;
    size_t end = key.size();
    while (true) {
      const size_t dot = key.rfind('.', end - 1);
      const std::string part =
          key.substr(dot == std::string::npos ? 0 : dot + 1,
                     end - (dot == std::string::npos ? 0 : dot + 1));
      patch = nlohmann::json{{part, patch}};
      if (dot == std::string::npos) break;
      end = dot;
    }
    MergeStrict(resolved, patch, "");
  }
  resolved["preset"] = base_preset;
  RunConfigFromJson(resolved);  // validates the final tree
  return resolved;
}

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    cfg = j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed config: ") + e.what());
  }
  const ModelConfig& m = cfg.model;
  PAST_REQUIRE(m.sample_rate > 0, kConfig, "sample_rate must be positive");
  PAST_REQUIRE(!m.ratios.empty(), kConfig, "ratios must be non-empty");
  PAST_REQUIRE(m.rvq.n_q >= 1 && m.rvq.codebook_size >= 1, kConfig,
               "rvq needs n_q >= 1 and codebook_size >= 1");
  PAST_REQUIRE(m.rvq.codebook_size <= 65535, kConfig,
               "codebook_size must fit in 16 bits");
  PAST_REQUIRE(m.transformer.hidden % m.transformer.heads == 0, kConfig,
               "transformer hidden size must divide by heads");
  PAST_REQUIRE(m.transformer.overlap < m.transformer.window, kConfig,
               "transformer overlap must be smaller than the window");
  PAST_REQUIRE(m.p_trns_only >= 0 && m.p_skip_only >= 0 &&
                   m.p_trns_only + m.p_skip_only <= 1.0 + 1e-12,
               kConfig, "mix probabilities must be non-negative and sum to <= 1");
  const LossWeights& w = cfg.loss;
  PAST_REQUIRE(w.lambda_ctc >= 0 && w.lambda_phn >= 0 && w.time >= 0 &&
                   w.mel >= 0 && w.adversarial >= 0 &&
                   w.feature_matching >= 0 && w.commitment >= 0,
               kConfig, "loss weights must be non-negative");
  const double seg = cfg.train.batch.segment_seconds * m.sample_rate;
  PAST_REQUIRE(std::abs(seg - std::round(seg)) < 1e-9 &&
                   static_cast<long>(std::round(seg)) % m.Hop() == 0,
               kConfig, "segment_seconds * sample_rate must be a hop multiple");
  PAST_REQUIRE(cfg.train.batch.phonetic_fraction >= 0 &&
                   cfg.train.batch.phonetic_fraction <= 1,
               kConfig, "phonetic_fraction must be in [0, 1]");
  PAST_REQUIRE(cfg.data.phone_set_size >= 2, kConfig, "phone_set_size must be >= 2");
  return cfg;
}

nlohmann::json RunConfigToJson(const RunConfig& cfg) { return cfg; }

nlohmann::json ModelConfigToJson(const ModelConfig& m) { return m; }

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  try {
    return j.get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kCheckpoint, std::string("malformed model config: ") + e.what());
  }
}

uint64_t ConfigHash(const nlohmann::json& j) {
  const std::string text = j.dump();
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace past
