// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lm/token_lm.h"

#include <cmath>
#include <fstream>
#include <random>

#include "codec/model.h"
#include "core/archive.h"
#include "core/errors.h"
#include "json.hpp"

namespace past {

void TokenCorpus::Validate() const {
  PAST_REQUIRE(vocab_size > 0, kData, "token corpus vocab_size must be positive");
  for (const auto& s : sequences) {
    for (int32_t id : s) {
      PAST_REQUIRE(id >= 0 && id < vocab_size, kData,
                   "token " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(vocab_size));
    }
  }
}

double LogLikelihood(SequenceScorer& scorer, std::span<const int32_t> tokens) {
  if (tokens.empty()) return 0.0;
  double total = 0.0;
  for (double v : scorer.StepLogProbs(tokens)) total += v;
  return total;
}

double NormalizedLogLikelihood(SequenceScorer& scorer, std::span<const int32_t> tokens) {
  if (tokens.empty()) return 0.0;
  return LogLikelihood(scorer, tokens) / static_cast<double>(tokens.size());
}

BigramScorer::BigramScorer(int vocab, std::vector<std::vector<double>> table)
    : vocab_(vocab), table_(std::move(table)) {
  PAST_REQUIRE(static_cast<int>(table_.size()) == vocab + 1, kArgument,
               "bigram table needs vocab + 1 rows");
  for (const auto& row : table_) {
    PAST_REQUIRE(static_cast<int>(row.size()) == vocab, kArgument,
                 "bigram table rows need vocab columns");
  }
}

std::vector<double> BigramScorer::StepLogProbs(std::span<const int32_t> tokens) {
  std::vector<double> out;
  int prev = vocab_;
  for (int32_t t : tokens) {
    PAST_REQUIRE(t >= 0 && t < vocab_, kData, "token outside the bigram vocabulary");
    out.push_back(std::log(table_[prev][t]));
    prev = t;
  }
  return out;
}

TokenLmImpl::TokenLmImpl(int vocab_, const LmConfig& cfg_) : vocab(vocab_), cfg(cfg_) {
  PAST_REQUIRE(vocab > 0, kConfig, "LM vocabulary must be positive");
  embed = register_module("embed", torch::nn::Embedding(vocab + 1, cfg.hidden));
  TransformerConfig t;
  t.layers = cfg.layers;
  t.hidden = cfg.hidden;
  t.heads = cfg.heads;
  t.ff = cfg.ff;
  t.window = cfg.context + 1;
  t.overlap = 0;
  stack = register_module("stack", TransformerStack(cfg.hidden, vocab, t, /*causal=*/true));
  torch::NoGradGuard guard;
  stack->out_proj->weight.zero_();
  stack->out_proj->bias.zero_();
}

torch::Tensor TokenLmImpl::forward(const torch::Tensor& ids) {
  return stack->Run(embed(ids));
}

std::vector<double> TokenLmScorer::StepLogProbs(std::span<const int32_t> tokens) {
  torch::NoGradGuard guard;
  lm_->eval();
  std::vector<int64_t> ids;
  ids.push_back(lm_->vocab);
  for (int32_t t : tokens) {
    PAST_REQUIRE(t >= 0 && t < lm_->vocab, kData, "token outside the LM vocabulary");
    ids.push_back(t);
  }
  auto input = torch::tensor(ids, torch::kInt64).narrow(0, 0, ids.size() - 1).unsqueeze(0);
  auto logp = torch::log_softmax(lm_->forward(input).to(torch::kFloat64), -1)[0];
  auto acc = logp.accessor<double, 2>();
  std::vector<double> out(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) out[t] = acc[t][tokens[t]];
  return out;
}

TokenLm TrainTokenLm(const TokenCorpus& corpus, const LmConfig& cfg, uint64_t seed,
                     const std::function<void(const LmStepRecord&)>& on_step) {
  corpus.Validate();
  std::vector<const std::vector<int32_t>*> seqs;
  for (const auto& s : corpus.sequences)
    if (!s.empty()) seqs.push_back(&s);
  PAST_REQUIRE(!seqs.empty(), kData, "token corpus is empty");
  PAST_REQUIRE(cfg.context >= 1 && cfg.batch_size >= 1, kConfig, "bad LM context/batch");
  torch::manual_seed(seed);
  TokenLm lm(corpus.vocab_size, cfg);
  torch::optim::Adam opt(lm->parameters(), torch::optim::AdamOptions(cfg.lr));
  std::mt19937_64 rng(seed);
  const int64_t bos = corpus.vocab_size;
  const int64_t len = cfg.context;
  for (int step = 0; step < cfg.steps; ++step) {
    lm->train();
    // Inputs [B, len] and targets [B, len]; -1 targets are padding.
    auto input = torch::full({cfg.batch_size, len}, bos, torch::kInt64);
    auto target = torch::full({cfg.batch_size, len}, -1, torch::kInt64);
    auto in = input.accessor<int64_t, 2>();
    auto tg = target.accessor<int64_t, 2>();
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& s = *seqs[std::uniform_int_distribution<size_t>(0, seqs.size() - 1)(rng)];
      const int64_t n = static_cast<int64_t>(s.size());
      // Window over the sequence with the begin token at position -1.
      const int64_t start = std::uniform_int_distribution<int64_t>(
          -1, std::max<int64_t>(-1, n - 1 - len))(rng);
      for (int64_t k = 0; k < len; ++k) {
        const int64_t src = start + k;
        if (src + 1 >= n) break;
        in[b][k] = src < 0 ? bos : s[src];
        tg[b][k] = s[src + 1];
      }
    }
    auto logits = lm->forward(input);
    auto loss = torch::nn::functional::cross_entropy(
        logits.reshape({-1, corpus.vocab_size}), target.reshape({-1}),
        torch::nn::functional::CrossEntropyFuncOptions().ignore_index(-1));
    opt.zero_grad();
    loss.backward();
    opt.step();
    if (on_step) on_step({step, loss.item<double>()});
  }
  return lm;
}

void SaveTokenLm(TokenLm& lm, const std::string& path) {
  TensorArchive ar;
  ar.meta["kind"] = "past-lm";
  ar.meta["vocab"] = lm->vocab;
  ar.meta["lm"] = lm->cfg;
  ExportModule(*lm, "lm.", ar);
  ar.Save(path);
}

TokenLm LoadTokenLm(const std::string& path) {
  TensorArchive ar = TensorArchive::Load(path);
  PAST_REQUIRE(ar.meta.value("kind", std::string()) == "past-lm", kCheckpoint,
               path + " is not a token LM checkpoint");
  LmConfig cfg;
  try {
    cfg = ar.meta.at("lm").get<LmConfig>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kCheckpoint, std::string("bad LM config record: ") + e.what());
  }
  TokenLm lm(ar.meta.at("vocab").get<int>(), cfg);
  ImportModule(*lm, "lm.", ar);
  return lm;
}

SwuggyScores SwuggyScore(SequenceScorer& scorer, std::span<const LexiconPair> pairs) {
  double credit[2] = {0.0, 0.0};
  int count[2] = {0, 0};
  for (const LexiconPair& p : pairs) {
    PAST_REQUIRE(!p.word_tokens.empty() && !p.pseudo_tokens.empty(), kData,
                 "lexicon pair with an empty token vector");
    const double w = LogLikelihood(scorer, p.word_tokens);
    const double s = LogLikelihood(scorer, p.pseudo_tokens);
    const int c = p.category == PairCategory::kInter ? 0 : 1;
    credit[c] += w > s ? 1.0 : (w == s ? 0.5 : 0.0);
    ++count[c];
  }
  SwuggyScores out;
  if (count[0]) out.inter = credit[0] / count[0];
  if (count[1]) out.oov = credit[1] / count[1];
  return out;
}

void WritePairFile(const std::string& path, std::span<const LexiconPair> pairs) {
  std::ofstream os(path);
  PAST_REQUIRE(os, kIo, "cannot write " + path);
  for (const LexiconPair& p : pairs) {
    nlohmann::json j = {{"word", p.word_tokens},
                        {"pseudo", p.pseudo_tokens},
                        {"category", p.category == PairCategory::kInter ? "inter" : "oov"}};
    os << j.dump() << "\n";
  }
  PAST_REQUIRE(os.good(), kIo, "write failed: " + path);
}

std::vector<LexiconPair> ReadPairFile(const std::string& path) {
  std::ifstream is(path);
  PAST_REQUIRE(is, kIo, "cannot open " + path);
  std::vector<LexiconPair> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LexiconPair p;
      p.word_tokens = j.at("word").get<std::vector<int32_t>>();
      p.pseudo_tokens = j.at("pseudo").get<std::vector<int32_t>>();
      const std::string cat = j.at("category").get<std::string>();
      PAST_REQUIRE(cat == "inter" || cat == "oov", kData, "unknown pair category " + cat);
      p.category = cat == "inter" ? PairCategory::kInter : PairCategory::kOov;
      PAST_REQUIRE(!p.word_tokens.empty() && !p.pseudo_tokens.empty(), kData,
                   "empty token vector");
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kData, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace past
