// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "codec/model.h"
#include "lm/token_lm.h"
#include "train/corpus.h"

namespace past {

// First-stream token sequences of every utterance in `corpora`.
TokenCorpus FirstStreamCorpus(PastModel& model, const std::vector<const Corpus*>& corpora);

// q_1 tokens of one signal (AVERAGE mix).
std::vector<int32_t> FirstStreamTokens(PastModel& model, const std::vector<float>& samples);

// Word / pseudo-word pairs rendered by `voice` and tokenized by `model`.
// For each lexicon word and each of `renders_per_word` random speakers: an
// inter pair (one in-vocabulary phone substituted so that the result is not a
// lexicon word) and an oov pair (one phone replaced by the held-out phone).
// Word and pseudo-word share speaker, pitch jitter and noise draws, and are
// framed by silence.
std::vector<LexiconPair> BuildLexiconPairs(PastModel& model, const SyntheticVoice& voice,
                                           int renders_per_word, uint64_t seed);

}  // namespace past
