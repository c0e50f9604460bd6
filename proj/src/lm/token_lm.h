// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "codec/transformer.h"
#include "core/config.h"

namespace past {

struct TokenCorpus {
  std::vector<std::vector<int32_t>> sequences;
  int vocab_size = 0;

  // Throws a data error when an index is outside [0, vocab_size).
  void Validate() const;
};

// Anything that yields next-token log-probabilities under teacher forcing.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual int vocab_size() const = 0;
  // log p(tokens[t] | begin, tokens[0..t)) for every t.
  virtual std::vector<double> StepLogProbs(std::span<const int32_t> tokens) = 0;
};

// Sum of StepLogProbs; an empty sequence scores 0.
double LogLikelihood(SequenceScorer& scorer, std::span<const int32_t> tokens);
// LogLikelihood / length (0 for an empty sequence).
double NormalizedLogLikelihood(SequenceScorer& scorer, std::span<const int32_t> tokens);

// Bigram table scorer: rows are the previous token (row vocab = begin token),
// columns the next token; entries are probabilities.
class BigramScorer : public SequenceScorer {
 public:
  BigramScorer(int vocab, std::vector<std::vector<double>> table);
  int vocab_size() const override { return vocab_; }
  std::vector<double> StepLogProbs(std::span<const int32_t> tokens) override;

 private:
  int vocab_;
  std::vector<std::vector<double>> table_;
};

// Causal transformer over first-stream tokens. Token id `vocab` is the
// begin token. The output projection starts at zero, so an untrained model
// predicts the uniform distribution.
struct TokenLmImpl : torch::nn::Module {
  TokenLmImpl(int vocab, const LmConfig& cfg);
  // ids [B, T] (int64, begin token included) -> logits [B, T, vocab]
  torch::Tensor forward(const torch::Tensor& ids);

  int vocab;
  LmConfig cfg;
  torch::nn::Embedding embed{nullptr};
  TransformerStack stack{nullptr};
};
TORCH_MODULE(TokenLm);

class TokenLmScorer : public SequenceScorer {
 public:
  explicit TokenLmScorer(TokenLm lm) : lm_(std::move(lm)) {}
  int vocab_size() const override { return lm_->vocab; }
  std::vector<double> StepLogProbs(std::span<const int32_t> tokens) override;

 private:
  TokenLm lm_;
};

struct LmStepRecord {
  int step = 0;
  double loss = 0.0;  // mean next-token cross-entropy (nats)
};

// Next-token cross-entropy training on random windows of up to cfg.context
// tokens. Windows at the start of a sequence are preceded by the begin
// token. Deterministic in `seed`.
TokenLm TrainTokenLm(const TokenCorpus& corpus, const LmConfig& cfg, uint64_t seed,
                     const std::function<void(const LmStepRecord&)>& on_step = {});

void SaveTokenLm(TokenLm& lm, const std::string& path);
TokenLm LoadTokenLm(const std::string& path);

// Lexical probe -------------------------------------------------------------

enum class PairCategory { kInter, kOov };

struct LexiconPair {
  std::vector<int32_t> word_tokens;
  std::vector<int32_t> pseudo_tokens;
  PairCategory category = PairCategory::kInter;
};

struct SwuggyScores {
  std::optional<double> inter;  // nullopt when the category has no pairs
  std::optional<double> oov;
};

// Fraction of pairs whose word outscores its pseudo-word under the raw
// log-likelihood, ties counting one half, per category.
SwuggyScores SwuggyScore(SequenceScorer& scorer, std::span<const LexiconPair> pairs);

// Pair file: one JSON record per line,
//   {"word": [ids], "pseudo": [ids], "category": "inter" | "oov"}
void WritePairFile(const std::string& path, std::span<const LexiconPair> pairs);
std::vector<LexiconPair> ReadPairFile(const std::string& path);

}  // namespace past
