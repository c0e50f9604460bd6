// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eval/evaluate.h"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "core/errors.h"
#include "supervision/ctc.h"

namespace past {

UtteranceAnalysis AnalyzeUtterance(PastModel& model, const AudioSegment& audio) {
  PAST_REQUIRE(audio.sample_rate == model->cfg.sample_rate, kConfig,
               "sample rate does not match the model");
  torch::NoGradGuard guard;
  model->eval();
  auto x = AudioToTensor(audio);
  ForwardOptions opts;
  opts.run_phone_head = false;
  auto out = model->forward(x, MixMode::kAverage, model->cfg.rvq.n_q, opts);
  UtteranceAnalysis a;
  auto codes = out.rvq.codes[0][0].contiguous();
  a.first_tokens.assign(codes.data_ptr<int64_t>(), codes.data_ptr<int64_t>() + codes.numel());
  a.z_hat = TensorToLatent(out.rvq.sum, 0, model->cfg.FrameRate());
  a.ctc = ToCharPosterior(out.ctc_logits, 0);
  auto y = out.x_hat.contiguous();
  a.reconstruction.assign(y.data_ptr<float>(), y.data_ptr<float>() + y.numel());
  return a;
}

std::vector<AbxItem> ExtractAbxItems(const LatentSequence& z_hat,
                                     const std::vector<int32_t>& labels,
                                     const std::string& speaker, const std::set<int32_t>& skip) {
  std::vector<AbxItem> items;
  const int frames = std::min<int>(z_hat.frames, static_cast<int>(labels.size()));
  int t = 0;
  while (t < frames) {
    int end = t + 1;
    while (end < frames && labels[end] == labels[t]) ++end;
    if (labels[t] >= 0 && !skip.count(labels[t])) {
      AbxItem item;
      item.category = labels[t];
      item.speaker = speaker;
      item.frames = LatentSequence(z_hat.channels, end - t, z_hat.frame_rate);
      for (int c = 0; c < z_hat.channels; ++c)
        for (int k = t; k < end; ++k) item.frames.at(c, k - t) = z_hat.at(c, k);
      items.push_back(std::move(item));
    }
    t = end;
  }
  return items;
}

namespace {

// Candidate lists for one A item.
struct Candidates {
  std::vector<size_t> x;
  std::vector<size_t> b;
};

Candidates CandidatesFor(const std::vector<AbxItem>& items, size_t a, AbxMode mode,
                         const std::map<std::pair<std::string, int32_t>, std::vector<size_t>>& by_key,
                         const std::map<std::string, std::vector<size_t>>& by_speaker) {
  Candidates c;
  const AbxItem& ia = items[a];
  for (const auto& [key, list] : by_key) {
    if (key.second != ia.category) continue;
    const bool same = key.first == ia.speaker;
    if ((mode == AbxMode::kWithin) != same) continue;
    for (size_t i : list)
      if (i != a) c.x.push_back(i);
  }
  for (size_t i : by_speaker.at(ia.speaker))
    if (items[i].category != ia.category) c.b.push_back(i);
  return c;
}

}  // namespace

std::optional<double> AbxOverItems(const std::vector<AbxItem>& items, AbxMode mode,
                                   int64_t max_triplets, uint64_t seed) {
  std::map<std::pair<std::string, int32_t>, std::vector<size_t>> by_key;
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < items.size(); ++i) {
    by_key[{items[i].speaker, items[i].category}].push_back(i);
    by_speaker[items[i].speaker].push_back(i);
  }
  std::vector<Candidates> cands(items.size());
  std::vector<int64_t> counts(items.size());
  int64_t total = 0;
  for (size_t a = 0; a < items.size(); ++a) {
    cands[a] = CandidatesFor(items, a, mode, by_key, by_speaker);
    counts[a] = static_cast<int64_t>(cands[a].x.size() * cands[a].b.size());
    total += counts[a];
  }
  if (total == 0) return std::nullopt;

  double errors = 0.0;
  int64_t n = 0;
  std::vector<AbxTriplet> chunk;
  auto flush = [&]() {
    if (chunk.empty()) return;
    errors += AbxError(chunk, mode) * static_cast<double>(chunk.size());
    n += static_cast<int64_t>(chunk.size());
    chunk.clear();
  };
  auto add = [&](size_t a, size_t b, size_t x) {
    AbxTriplet t;
    t.a = items[a].frames;
    t.b = items[b].frames;
    t.x = items[x].frames;
    t.category_a = items[a].category;
    t.category_b = items[b].category;
    t.speaker_a = items[a].speaker;
    t.speaker_b = items[b].speaker;
    t.speaker_x = items[x].speaker;
    chunk.push_back(std::move(t));
    if (chunk.size() >= 4096) flush();
  };
  if (total <= max_triplets) {
    for (size_t a = 0; a < items.size(); ++a)
      for (size_t x : cands[a].x)
        for (size_t b : cands[a].b) add(a, b, x);
  } else {
    std::mt19937_64 rng(seed);
    std::discrete_distribution<size_t> pick_a(counts.begin(), counts.end());
    for (int64_t k = 0; k < max_triplets; ++k) {
      const size_t a = pick_a(rng);
      const auto& c = cands[a];
      const size_t x = c.x[std::uniform_int_distribution<size_t>(0, c.x.size() - 1)(rng)];
      const size_t b = c.b[std::uniform_int_distribution<size_t>(0, c.b.size() - 1)(rng)];
      add(a, b, x);
    }
  }
  flush();
  return errors / static_cast<double>(n);
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("pnmi", pnmi);
  put("abx_within", abx_within);
  put("abx_across", abx_across);
  put("sisnr", sisnr);
  put("cer", cer);
  put("wer", wer);
  j["utterances"] = utterances;
  return j;
}

std::set<std::string> ParseMetricList(const std::string& list) {
  static const std::set<std::string> known = {"pnmi", "abx", "sisnr", "cer"};
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    PAST_REQUIRE(known.count(item), kArgument, "unknown metric '" + item + "'");
    out.insert(item);
  }
  PAST_REQUIRE(!out.empty(), kArgument, "no metrics requested");
  return out;
}

EvalReport Evaluate(PastModel& model, const Corpus& corpus, const std::set<std::string>& metrics,
                    int64_t max_triplets, uint64_t seed) {
  PAST_REQUIRE(!corpus.utterances.empty(), kData, "evaluation corpus is empty");
  const int hop = model->cfg.Hop();
  std::vector<int32_t> all_tokens, all_phones;
  std::vector<AbxItem> items;
  double sisnr_sum = 0.0;
  size_t char_edits = 0, char_ref = 0, word_edits = 0, word_ref = 0;
  EvalReport report;
  for (const Utterance& u : corpus.utterances) {
    UtteranceAnalysis a = AnalyzeUtterance(model, u.audio);
    ++report.utterances;
    const int frames = static_cast<int>(a.first_tokens.size());
    if (!u.phones.empty()) {
      auto labels = RasterizePhones(u.phones, 0, frames, hop);
      for (int t = 0; t < frames; ++t) {
        if (labels[t] < 0) continue;
        all_tokens.push_back(a.first_tokens[t]);
        all_phones.push_back(labels[t]);
      }
      if (metrics.count("abx")) {
        auto more = ExtractAbxItems(a.z_hat, labels, u.speaker, {0});
        std::move(more.begin(), more.end(), std::back_inserter(items));
      }
    }
    if (metrics.count("sisnr")) sisnr_sum += Sisnr(u.audio.samples, a.reconstruction);
    if (metrics.count("cer") && u.transcript && !u.transcript->empty()) {
      const std::string hyp = CtcGreedyDecode(a.ctc);
      char_edits += Levenshtein(hyp, *u.transcript);
      char_ref += u.transcript->size();
      auto hw = SplitWords(hyp), rw = SplitWords(*u.transcript);
      word_edits += Levenshtein(hw, rw);
      word_ref += rw.size();
    }
  }
  if (metrics.count("pnmi")) {
    PAST_REQUIRE(!all_tokens.empty(), kData, "PNMI needs phone-annotated utterances");
    report.pnmi = Pnmi(all_tokens, all_phones);
  }
  if (metrics.count("abx")) {
    report.abx_within = AbxOverItems(items, AbxMode::kWithin, max_triplets, seed);
    report.abx_across = AbxOverItems(items, AbxMode::kAcross, max_triplets, seed + 1);
  }
  if (metrics.count("sisnr")) report.sisnr = sisnr_sum / report.utterances;
  if (metrics.count("cer") && char_ref > 0) {
    report.cer = static_cast<double>(char_edits) / char_ref;
    report.wer = word_ref ? std::optional<double>(static_cast<double>(word_edits) / word_ref)
                          : std::nullopt;
  }
  return report;
}

}  // namespace past
