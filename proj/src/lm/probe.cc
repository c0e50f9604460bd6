// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lm/probe.h"

#include <algorithm>
#include <optional>
#include <random>
#include <set>

#include "core/errors.h"

namespace past {

std::vector<int32_t> FirstStreamTokens(PastModel& model, const std::vector<float>& samples) {
  AudioSegment audio;
  audio.samples = samples;
  audio.sample_rate = model->cfg.sample_rate;
  model->eval();
  return model->Encode(audio, 1).Stream(0);
}

TokenCorpus FirstStreamCorpus(PastModel& model, const std::vector<const Corpus*>& corpora) {
  TokenCorpus out;
  out.vocab_size = model->cfg.rvq.codebook_size;
  for (const Corpus* c : corpora)
    for (const Utterance& u : c->utterances)
      out.sequences.push_back(FirstStreamTokens(model, u.audio.samples));
  return out;
}

std::vector<LexiconPair> BuildLexiconPairs(PastModel& model, const SyntheticVoice& voice,
                                           int renders_per_word, uint64_t seed) {
  PAST_REQUIRE(renders_per_word >= 1, kArgument, "renders_per_word must be positive");
  const auto& words = voice.lexicon().words;
  const std::set<std::vector<int>> lexicon(words.begin(), words.end());
  const int vocab = voice.held_out_phone() - 1;  // in-vocabulary phones 1..vocab
  std::mt19937_64 rng(seed);
  std::vector<LexiconPair> pairs;

  auto render_pair = [&](const std::vector<int>& word, const std::vector<int>& pseudo,
                         int speaker, double jitter, uint64_t render_seed, PairCategory cat) {
    std::vector<int> a = {0}, b = {0};
    a.insert(a.end(), word.begin(), word.end());
    b.insert(b.end(), pseudo.begin(), pseudo.end());
    a.push_back(0);
    b.push_back(0);
    std::mt19937_64 ra(render_seed), rb(render_seed);
    LexiconPair p;
    p.word_tokens = FirstStreamTokens(model, voice.Render(a, speaker, jitter, ra));
    p.pseudo_tokens = FirstStreamTokens(model, voice.Render(b, speaker, jitter, rb));
    p.category = cat;
    pairs.push_back(std::move(p));
  };

  for (const auto& word : words) {
    for (int r = 0; r < renders_per_word; ++r) {
      const int speaker = std::uniform_int_distribution<int>(0, voice.n_speakers() - 1)(rng);
      const double jitter = 1.0 + std::uniform_real_distribution<double>(-0.06, 0.06)(rng);
      const uint64_t render_seed = rng();
      std::uniform_int_distribution<size_t> pos_dist(0, word.size() - 1);

      std::optional<std::vector<int>> inter;
      for (int attempt = 0; attempt < 200 && !inter; ++attempt) {
        std::vector<int> w = word;
        const size_t pos = pos_dist(rng);
        w[pos] = std::uniform_int_distribution<int>(1, vocab)(rng);
        if (w[pos] == word[pos] || lexicon.count(w)) continue;
        if (pos > 0 && w[pos] == w[pos - 1]) continue;
        if (pos + 1 < w.size() && w[pos] == w[pos + 1]) continue;
        inter = w;
      }
      if (inter) render_pair(word, *inter, speaker, jitter, render_seed, PairCategory::kInter);

      std::vector<int> oov = word;
      oov[pos_dist(rng)] = voice.held_out_phone();
      render_pair(word, oov, speaker, jitter, render_seed, PairCategory::kOov);
    }
  }
  return pairs;
}

}  // namespace past
