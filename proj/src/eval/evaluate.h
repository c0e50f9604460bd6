// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "codec/model.h"
#include "core/types.h"
#include "eval/metrics.h"
#include "json.hpp"
#include "train/corpus.h"

namespace past {

// Everything the metrics need from one utterance, computed with the AVERAGE
// mix and all codebooks.
struct UtteranceAnalysis {
  std::vector<int32_t> first_tokens;  // q_1 per frame
  LatentSequence z_hat;               // sum of all quantized streams
  CharPosterior ctc;                  // head on the first stream
  std::vector<float> reconstruction;  // trimmed to the input length
};

UtteranceAnalysis AnalyzeUtterance(PastModel& model, const AudioSegment& audio);

// A labelled span of post-quantization frames used as an ABX item.
struct AbxItem {
  int32_t category = 0;
  std::string speaker;
  LatentSequence frames;
};

// Maximal runs of a constant label (excluding labels in `skip` and -1).
std::vector<AbxItem> ExtractAbxItems(const LatentSequence& z_hat,
                                     const std::vector<int32_t>& labels,
                                     const std::string& speaker, const std::set<int32_t>& skip);

// ABX error over all valid (A, B, X) choices when there are at most
// `max_triplets` of them, otherwise over a seeded uniform sample of that size.
// Within: A, B, X share one speaker. Across: A and B share a speaker, X comes
// from another. Returns nullopt when no triplet exists.
std::optional<double> AbxOverItems(const std::vector<AbxItem>& items, AbxMode mode,
                                   int64_t max_triplets, uint64_t seed);

struct EvalReport {
  std::optional<double> pnmi;
  std::optional<double> abx_within;
  std::optional<double> abx_across;
  std::optional<double> sisnr;
  std::optional<double> cer;
  std::optional<double> wer;
  int utterances = 0;

  nlohmann::json ToJson() const;
};

// Metric names: pnmi, abx, sisnr, cer (cer also reports wer). Phone 0 is the
// silence label and is excluded from ABX items.
EvalReport Evaluate(PastModel& model, const Corpus& corpus, const std::set<std::string>& metrics,
                    int64_t max_triplets, uint64_t seed);

std::set<std::string> ParseMetricList(const std::string& list);

}  // namespace past
