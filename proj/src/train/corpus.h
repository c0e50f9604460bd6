// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "core/config.h"
#include "core/types.h"

namespace past {

// Phone occupying samples [start, end).
struct PhoneSegment {
  int phone = 0;
  int64_t start = 0;
  int64_t end = 0;
};

struct CharSpan {
  int64_t start = 0;
  int64_t end = 0;
};

struct Utterance {
  std::string id;
  std::string speaker;
  AudioSegment audio;
  std::optional<std::string> transcript;
  std::vector<PhoneSegment> phones;    // empty when not annotated
  std::vector<CharSpan> char_spans;    // one per transcript character, or empty
};

struct Corpus {
  std::string name;
  bool phonetic = false;  // carries phone annotations
  std::vector<Utterance> utterances;
};

// Majority-overlap rasterization of phone segments onto frames of `hop`
// samples, starting at sample `offset`. Frame t covers
// [offset + t*hop, offset + (t+1)*hop). Ties go to the earlier segment;
// frames with no overlap get -1.
std::vector<int32_t> RasterizePhones(const std::vector<PhoneSegment>& phones, int64_t offset,
                                     int frames, int hop);

// Characters whose span overlaps [begin, end) by at least half their own
// length, with leading and trailing spaces dropped.
std::string CropTranscript(const std::string& transcript, const std::vector<CharSpan>& spans,
                           int64_t begin, int64_t end);

struct Batch {
  torch::Tensor audio;          // [B, 1, N] float32
  torch::Tensor phone_labels;   // [B, T] int64, -1 where unlabeled
  torch::Tensor phone_mask;     // [B] bool
  std::vector<std::optional<std::vector<int>>> targets;  // CTC character ids
  std::vector<SupervisionBundle> bundles;
  std::vector<bool> from_phonetic;
};

// Draws one batch. Each item picks the phonetic corpus with probability
// spec.phonetic_fraction, then an utterance uniformly, then a hop-aligned
// crop offset uniformly. Short utterances are zero-padded on the right and
// their padded frames carry label -1.
Batch SampleBatch(const Corpus& phonetic, const Corpus& transcribed, const BatchSpec& spec,
                  int sample_rate, int hop, std::mt19937_64& rng);

// Synthetic aligned corpus ------------------------------------------------

// Phone 0 is silence; phones 1..phone_set_size-1 form words; phone
// phone_set_size is held out of every generated utterance and only appears
// in out-of-vocabulary probe items.
struct SyntheticLexicon {
  std::vector<std::vector<int>> words;
};

class SyntheticVoice {
 public:
  SyntheticVoice(const DataConfig& cfg, int sample_rate, int hop, uint64_t seed);

  int phone_samples() const { return phone_samples_; }
  int held_out_phone() const { return cfg_.phone_set_size; }
  int n_speakers() const { return static_cast<int>(speaker_f0_.size()); }
  const SyntheticLexicon& lexicon() const { return lexicon_; }

  // Renders a phone sequence for a speaker, with f0 scaled by `jitter`. Every
  // harmonic starts in cosine phase at the phone onset. Per-token gain and
  // formant jitter, silence noise and the background noise are drawn from
  // `rng` in sequence order, so equal-length sequences rendered from equal
  // rng states share all nuisance draws.
  std::vector<float> Render(const std::vector<int>& phones, int speaker, double jitter,
                            std::mt19937_64& rng) const;

  // Character for a phone (silence -> space).
  static char PhoneChar(int phone);

  // A random utterance: silence, word, silence, word, ..., silence.
  Utterance Sample(const std::string& id, std::mt19937_64& rng, bool phonetic) const;

 private:
  DataConfig cfg_;
  int sample_rate_;
  int phone_samples_;
  std::vector<std::vector<double>> formants_;  // per phone
  std::vector<double> speaker_f0_;
  std::vector<double> vocal_tract_;  // per-speaker formant scale
  SyntheticLexicon lexicon_;
};

struct SyntheticCorpora {
  Corpus phonetic;     // phone + transcript annotations
  Corpus transcribed;  // transcript annotations only
  Corpus test;         // held-out, fully annotated
};

// Deterministic in (cfg, seed).
SyntheticCorpora GenerateSyntheticCorpora(const DataConfig& cfg, int sample_rate, int hop,
                                          uint64_t seed);
Corpus GenerateSyntheticCorpus(int n_utterances, const DataConfig& cfg, int sample_rate,
                               int hop, uint64_t seed, bool phonetic);

// On-disk corpora ---------------------------------------------------------
//
// manifest.jsonl, one record per utterance:
//   {"utterance_id", "audio" (path relative to the manifest), "speaker",
//    "corpus": "phonetic" | "transcribed" | "test", "alignment" (path)}
// alignment records (line-delimited, keyed by utterance_id):
//   {"utterance_id", "transcript", "phones": [[label, start_frame, end_frame]],
//    "char_spans": [[start_sample, end_sample]]}
// "phones" and "char_spans" are optional; frames are at the model frame rate.
void WriteCorpusDir(const std::string& dir, const std::vector<const Corpus*>& corpora,
                    int hop);
// Loads the utterances whose corpus field equals `corpus_name`.
Corpus LoadCorpus(const std::string& manifest_path, const std::string& corpus_name, int hop);

}  // namespace past
