// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "train/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "core/audio_io.h"
#include "core/errors.h"
#include "json.hpp"
#include "supervision/ctc.h"

namespace past {

std::vector<int32_t> RasterizePhones(const std::vector<PhoneSegment>& phones, int64_t offset,
                                     int frames, int hop) {
  std::vector<int32_t> labels(frames, -1);
  for (int t = 0; t < frames; ++t) {
    const int64_t lo = offset + static_cast<int64_t>(t) * hop;
    const int64_t hi = lo + hop;
    int64_t best = 0;
    for (const PhoneSegment& p : phones) {
      const int64_t ov = std::min(hi, p.end) - std::max(lo, p.start);
      if (ov > best) {
        best = ov;
        labels[t] = p.phone;
      }
    }
  }
  return labels;
}

std::string CropTranscript(const std::string& transcript, const std::vector<CharSpan>& spans,
                           int64_t begin, int64_t end) {
  PAST_REQUIRE(spans.size() == transcript.size(), kData,
               "character span count does not match the transcript");
  std::string kept;
  for (size_t i = 0; i < transcript.size(); ++i) {
    const int64_t len = spans[i].end - spans[i].start;
    const int64_t ov = std::min(end, spans[i].end) - std::max(begin, spans[i].start);
    if (len > 0 && 2 * ov >= len) kept.push_back(transcript[i]);
  }
  const size_t first = kept.find_first_not_of(' ');
  if (first == std::string::npos) return "";
  const size_t last = kept.find_last_not_of(' ');
  return kept.substr(first, last - first + 1);
}

Batch SampleBatch(const Corpus& phonetic, const Corpus& transcribed, const BatchSpec& spec,
                  int sample_rate, int hop, std::mt19937_64& rng) {
  PAST_REQUIRE(!phonetic.utterances.empty() || !transcribed.utterances.empty(), kData,
               "both training corpora are empty");
  PAST_REQUIRE(spec.batch_size > 0, kConfig, "batch_size must be positive");
  const int64_t n = std::llround(spec.segment_seconds * sample_rate);
  PAST_REQUIRE(n > 0 && n % hop == 0, kConfig, "segment length must be a hop multiple");
  const int frames = static_cast<int>(n / hop);
  const int b = spec.batch_size;

  Batch batch;
  batch.audio = torch::zeros({b, 1, n}, torch::kFloat32);
  batch.phone_labels = torch::full({b, frames}, -1, torch::kInt64);
  batch.phone_mask = torch::zeros({b}, torch::kBool);
  float* audio = batch.audio.data_ptr<float>();
  int64_t* labels = batch.phone_labels.data_ptr<int64_t>();
  bool* mask = batch.phone_mask.data_ptr<bool>();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int i = 0; i < b; ++i) {
    const bool pick_phonetic = unit(rng) < spec.phonetic_fraction;
    const Corpus* c = pick_phonetic ? &phonetic : &transcribed;
    if (c->utterances.empty()) c = pick_phonetic ? &transcribed : &phonetic;
    const size_t idx = std::uniform_int_distribution<size_t>(0, c->utterances.size() - 1)(rng);
    const Utterance& u = c->utterances[idx];
    const int64_t len = static_cast<int64_t>(u.audio.samples.size());
    int64_t offset = 0;
    if (len > n) {
      const int64_t max_k = (len - n) / hop;
      offset = std::uniform_int_distribution<int64_t>(0, max_k)(rng) * hop;
    }
    const int64_t copy = std::min(n, len - offset);
    std::copy_n(u.audio.samples.begin() + offset, copy, audio + static_cast<int64_t>(i) * n);

    SupervisionBundle bundle;
    std::optional<std::vector<int>> target;
    if (u.transcript) {
      std::optional<std::string> text;
      if (!u.char_spans.empty()) {
        text = CropTranscript(*u.transcript, u.char_spans, offset, offset + n);
      } else if (offset == 0 && len <= n) {
        text = *u.transcript;
      }
      if (text) {
        auto ids = CharSet::Encode(*text);
        if (CtcMinFrames(ids) <= frames) {
          bundle.transcript = text;
          target = std::move(ids);
        }
      }
    }
    bundle.phoneme_frames.assign(frames, -1);
    if (c->phonetic && !u.phones.empty()) {
      bundle.phoneme_frames = RasterizePhones(u.phones, offset, frames, hop);
      bundle.phoneme_mask = true;
      mask[i] = true;
      for (int t = 0; t < frames; ++t) labels[i * frames + t] = bundle.phoneme_frames[t];
    }
    batch.targets.push_back(std::move(target));
    batch.bundles.push_back(std::move(bundle));
    batch.from_phonetic.push_back(c == &phonetic);
  }
  return batch;
}

// Synthetic voice ---------------------------------------------------------

namespace {

constexpr double kPeak = 0.5;
constexpr double kRampSeconds = 0.01;
constexpr double kMaxHarmonicHz = 7000.0;
constexpr double kSilenceNoise = 1e-3;

}  // namespace

SyntheticVoice::SyntheticVoice(const DataConfig& cfg, int sample_rate, int hop, uint64_t seed)
    : cfg_(cfg), sample_rate_(sample_rate), phone_samples_(cfg.phone_frames * hop) {
  PAST_REQUIRE(cfg.phone_set_size >= 2, kConfig, "phone_set_size must be at least 2");
  PAST_REQUIRE(cfg.phone_frames >= 1, kConfig, "phone_frames must be positive");
  PAST_REQUIRE(cfg.n_speakers >= 1, kConfig, "n_speakers must be positive");
  PAST_REQUIRE(cfg.min_word_phones >= 1 && cfg.min_word_phones <= cfg.max_word_phones,
               kConfig, "bad word length range");
  PAST_REQUIRE(cfg.min_words >= 1 && cfg.min_words <= cfg.max_words, kConfig,
               "bad words-per-utterance range");
  PAST_REQUIRE(cfg.phone_set_size - 1 <= CharSet::kSize - 2, kConfig,
               "phone_set_size exceeds the character inventory");
  std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
  std::uniform_real_distribution<double> f1(250.0, 900.0), f2(900.0, 2600.0),
      f3(2600.0, 3800.0);
  formants_.assign(cfg.phone_set_size + 1, {});
  for (int p = 1; p <= cfg.phone_set_size; ++p) {
    for (int attempt = 0;; ++attempt) {
      std::vector<double> f = {f1(rng), f2(rng), f3(rng)};
      bool ok = true;
      for (int q = 1; q < p && attempt < 1000; ++q) {
        const double d = std::hypot(f[0] - formants_[q][0], (f[1] - formants_[q][1]) / 3.0);
        if (d < 120.0) ok = false;
      }
      if (ok) {
        formants_[p] = f;
        break;
      }
    }
  }
  PAST_REQUIRE(cfg.f0_min_hz > 0.0 && cfg.f0_min_hz <= cfg.f0_max_hz, kConfig, "bad f0 range");
  PAST_REQUIRE(cfg.vocal_tract_spread >= 0.0 && cfg.vocal_tract_spread < 1.0, kConfig,
               "vocal_tract_spread must be in [0, 1)");
  PAST_REQUIRE(cfg.noise_snr_db_min <= cfg.noise_snr_db_max, kConfig, "bad noise SNR range");
  std::uniform_real_distribution<double> f0(cfg.f0_min_hz, cfg.f0_max_hz);
  std::uniform_real_distribution<double> tract(1.0 - cfg.vocal_tract_spread,
                                               1.0 + cfg.vocal_tract_spread);
  for (int s = 0; s < cfg.n_speakers; ++s) {
    speaker_f0_.push_back(f0(rng));
    vocal_tract_.push_back(tract(rng));
  }

  // Lexicon over the in-vocabulary phones, no immediate repeats, unique.
  const int vocab = cfg.phone_set_size - 1;
  std::set<std::vector<int>> seen;
  std::uniform_int_distribution<int> len_dist(cfg.min_word_phones, cfg.max_word_phones);
  std::uniform_int_distribution<int> phone_dist(1, vocab);
  for (int attempt = 0; static_cast<int>(lexicon_.words.size()) < cfg.lexicon_words; ++attempt) {
    PAST_REQUIRE(attempt < 100000, kConfig, "cannot build a lexicon of the requested size");
    std::vector<int> w(len_dist(rng));
    for (size_t i = 0; i < w.size(); ++i) {
      do {
        w[i] = phone_dist(rng);
      } while (vocab > 1 && i > 0 && w[i] == w[i - 1]);
    }
    if (seen.insert(w).second) lexicon_.words.push_back(w);
  }
}

char SyntheticVoice::PhoneChar(int phone) {
  return phone == 0 ? ' ' : CharSet::kSymbols[phone - 1];
}

std::vector<float> SyntheticVoice::Render(const std::vector<int>& phones, int speaker,
                                          double jitter, std::mt19937_64& rng) const {
  PAST_REQUIRE(speaker >= 0 && speaker < n_speakers(), kArgument, "speaker out of range");
  const int n = phone_samples_;
  std::vector<float> out(phones.size() * static_cast<size_t>(n), 0.0f);
  const double f0 = speaker_f0_[speaker] * jitter;
  const int ramp = std::max(1, static_cast<int>(kRampSeconds * sample_rate_));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> gain_db(-cfg_.gain_db_spread, cfg_.gain_db_spread);
  std::uniform_real_distribution<double> wobble(-cfg_.formant_jitter, cfg_.formant_jitter);
  static constexpr double kGain[3] = {1.0, 0.6, 0.3};
  static constexpr double kBandwidth[3] = {90.0, 130.0, 180.0};
  double voiced_energy = 0.0;
  int64_t voiced_samples = 0;
  for (size_t k = 0; k < phones.size(); ++k) {
    const int p = phones[k];
    PAST_REQUIRE(p >= 0 && p <= cfg_.phone_set_size, kArgument, "phone out of range");
    float* dst = out.data() + k * n;
    if (p == 0) {
      for (int i = 0; i < n; ++i) dst[i] = static_cast<float>(kSilenceNoise * gauss(rng));
      continue;
    }
    const double gain = std::pow(10.0, gain_db(rng) / 20.0);
    double formants[3];
    for (int j = 0; j < 3; ++j) formants[j] = formants_[p][j] * vocal_tract_[speaker] * (1.0 + wobble(rng));
    std::vector<std::pair<double, double>> partials;  // (omega, amplitude)
    double norm = 0.0;
    for (int h = 1; h * f0 < kMaxHarmonicHz; ++h) {
      double a = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double d = (h * f0 - formants[j]) / kBandwidth[j];
        a += kGain[j] * std::exp(-0.5 * d * d);
      }
      if (a < 1e-3) continue;
      partials.emplace_back(2.0 * std::numbers::pi * h * f0 / sample_rate_, a);
      norm += a;
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& [omega, amp] : partials) s += amp * std::cos(omega * i);
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
      if (n - 1 - i < ramp) {
        env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * (n - 1 - i) / ramp));
      }
      const double v = kPeak * gain * env * s / std::max(norm, 1e-9);
      dst[i] = static_cast<float>(v);
      voiced_energy += v * v;
    }
    voiced_samples += n;
  }
  // Low-passed background noise at a per-utterance SNR against the voiced part.
  const double snr = std::uniform_real_distribution<double>(cfg_.noise_snr_db_min,
                                                            cfg_.noise_snr_db_max)(rng);
  if (voiced_samples > 0 && voiced_energy > 0.0) {
    const double signal_rms = std::sqrt(voiced_energy / voiced_samples);
    const double noise_rms = signal_rms / std::pow(10.0, snr / 20.0);
    constexpr double kPole = 0.7;
    const double norm = std::sqrt(1.0 - kPole * kPole);  // unit-variance AR(1)
    double state = 0.0;
    for (float& v : out) {
      state = kPole * state + norm * gauss(rng);
      v += static_cast<float>(noise_rms * state);
    }
  }
  return out;
}

Utterance SyntheticVoice::Sample(const std::string& id, std::mt19937_64& rng,
                                 bool phonetic) const {
  const int speaker = std::uniform_int_distribution<int>(0, n_speakers() - 1)(rng);
  const double jitter = 1.0 + std::uniform_real_distribution<double>(-0.06, 0.06)(rng);
  const int n_words = std::uniform_int_distribution<int>(cfg_.min_words, cfg_.max_words)(rng);
  std::uniform_int_distribution<size_t> word_dist(0, lexicon_.words.size() - 1);
  std::vector<int> seq = {0};
  std::string text;
  std::vector<CharSpan> spans;
  const int64_t ps = phone_samples_;
  for (int w = 0; w < n_words; ++w) {
    if (w > 0) {
      text.push_back(' ');
      const int64_t at = static_cast<int64_t>(seq.size() - 1) * ps;  // the separating silence
      spans.push_back({at, at + ps});
    }
    for (int p : lexicon_.words[word_dist(rng)]) {
      const int64_t at = static_cast<int64_t>(seq.size()) * ps;
      seq.push_back(p);
      text.push_back(PhoneChar(p));
      spans.push_back({at, at + ps});
    }
    seq.push_back(0);
  }
  Utterance u;
  u.id = id;
  u.speaker = "spk" + std::to_string(speaker);
  u.audio.samples = Render(seq, speaker, jitter, rng);
  u.audio.sample_rate = sample_rate_;
  u.audio.speaker_id = u.speaker;
  u.audio.utterance_id = id;
  u.transcript = text;
  u.char_spans = std::move(spans);
  if (phonetic) {
    for (size_t k = 0; k < seq.size(); ++k) {
      u.phones.push_back({seq[k], static_cast<int64_t>(k) * ps, static_cast<int64_t>(k + 1) * ps});
    }
  }
  return u;
}

Corpus GenerateSyntheticCorpus(int n_utterances, const DataConfig& cfg, int sample_rate,
                               int hop, uint64_t seed, bool phonetic) {
  SyntheticVoice voice(cfg, sample_rate, hop, seed);
  Corpus c;
  c.phonetic = phonetic;
  c.name = phonetic ? "phonetic" : "transcribed";
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + (phonetic ? 1 : 2));
  for (int i = 0; i < n_utterances; ++i) {
    c.utterances.push_back(voice.Sample(c.name + "_" + std::to_string(i), rng, phonetic));
  }
  return c;
}

SyntheticCorpora GenerateSyntheticCorpora(const DataConfig& cfg, int sample_rate, int hop,
                                          uint64_t seed) {
  SyntheticVoice voice(cfg, sample_rate, hop, seed);
  SyntheticCorpora out;
  const std::pair<Corpus*, const char*> parts[] = {
      {&out.phonetic, "phonetic"}, {&out.transcribed, "transcribed"}, {&out.test, "test"}};
  const int counts[] = {cfg.n_utterances, cfg.n_utterances, cfg.n_test_utterances};
  for (int k = 0; k < 3; ++k) {
    Corpus& c = *parts[k].first;
    c.name = parts[k].second;
    c.phonetic = k != 1;
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 101 * (k + 1));
    for (int i = 0; i < counts[k]; ++i) {
      c.utterances.push_back(voice.Sample(c.name + "_" + std::to_string(i), rng, c.phonetic));
    }
  }
  return out;
}

// On-disk corpora ---------------------------------------------------------

void WriteCorpusDir(const std::string& dir, const std::vector<const Corpus*>& corpora, int hop) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "wav", ec);
  PAST_REQUIRE(!ec, kIo, "cannot create corpus directory " + dir);
  std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
  std::ofstream align(fs::path(dir) / "alignments.jsonl");
  PAST_REQUIRE(manifest && align, kIo, "cannot write corpus files in " + dir);
  for (const Corpus* c : corpora) {
    for (const Utterance& u : c->utterances) {
      const std::string rel = "wav/" + u.id + ".wav";
      WriteWav((fs::path(dir) / rel).string(), u.audio, /*float32=*/true);
      nlohmann::json m = {{"utterance_id", u.id}, {"audio", rel}, {"speaker", u.speaker},
                          {"corpus", c->name}, {"alignment", "alignments.jsonl"}};
      manifest << m.dump() << "\n";
      nlohmann::json a = {{"utterance_id", u.id}};
      if (u.transcript) a["transcript"] = *u.transcript;
      if (!u.phones.empty()) {
        nlohmann::json phones = nlohmann::json::array();
        for (const PhoneSegment& p : u.phones) {
          PAST_REQUIRE(p.start % hop == 0 && p.end % hop == 0, kData,
                       "phone boundaries of " + u.id + " are not frame aligned");
          phones.push_back({p.phone, p.start / hop, p.end / hop});
        }
        a["phones"] = phones;
      }
      if (!u.char_spans.empty()) {
        nlohmann::json spans = nlohmann::json::array();
        for (const CharSpan& s : u.char_spans) spans.push_back({s.start, s.end});
        a["char_spans"] = spans;
      }
      align << a.dump() << "\n";
    }
  }
  PAST_REQUIRE(manifest.good() && align.good(), kIo, "write failed in " + dir);
}

namespace {

std::vector<nlohmann::json> ReadJsonLines(const std::string& path) {
  std::ifstream in(path);
  PAST_REQUIRE(in, kIo, "cannot open " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kData, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

Corpus LoadCorpus(const std::string& manifest_path, const std::string& corpus_name, int hop) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(manifest_path).parent_path();
  std::map<std::string, std::map<std::string, nlohmann::json>> alignments;
  Corpus c;
  c.name = corpus_name;
  c.phonetic = false;
  try {
    for (const auto& m : ReadJsonLines(manifest_path)) {
      if (m.value("corpus", std::string("transcribed")) != corpus_name) continue;
      Utterance u;
      u.id = m.at("utterance_id").get<std::string>();
      u.speaker = m.value("speaker", std::string("unknown"));
      u.audio = ReadWav((base / m.at("audio").get<std::string>()).string());
      u.audio.speaker_id = u.speaker;
      u.audio.utterance_id = u.id;
      if (m.contains("alignment") && !m["alignment"].is_null()) {
        const std::string apath = (base / m["alignment"].get<std::string>()).string();
        if (!alignments.count(apath)) {
          auto& table = alignments[apath];
          for (auto& a : ReadJsonLines(apath)) {
            table[a.at("utterance_id").get<std::string>()] = std::move(a);
          }
        }
        auto it = alignments[apath].find(u.id);
        PAST_REQUIRE(it != alignments[apath].end(), kData, "no alignment record for " + u.id);
        const auto& a = it->second;
        if (a.contains("transcript")) {
          u.transcript = a["transcript"].get<std::string>();
          CharSet::Encode(*u.transcript);  // validates the inventory
        }
        if (a.contains("phones")) {
          for (const auto& p : a["phones"]) {
            PhoneSegment seg{p.at(0).get<int>(), p.at(1).get<int64_t>() * hop,
                             p.at(2).get<int64_t>() * hop};
            PAST_REQUIRE(seg.phone >= 0 && seg.start <= seg.end, kData,
                         "bad phone triple in " + u.id);
            u.phones.push_back(seg);
          }
        }
        if (a.contains("char_spans")) {
          for (const auto& s : a["char_spans"]) {
            u.char_spans.push_back({s.at(0).get<int64_t>(), s.at(1).get<int64_t>()});
          }
          PAST_REQUIRE(u.transcript && u.char_spans.size() == u.transcript->size(), kData,
                       "char_spans of " + u.id + " do not match its transcript");
        }
      }
      if (!u.phones.empty()) c.phonetic = true;
      c.utterances.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kData, manifest_path + ": " + e.what());
  }
  return c;
}

}  // namespace past
