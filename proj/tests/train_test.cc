// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "codec/model.h"
#include "core/errors.h"
#include "test_util.h"
#include "train/corpus.h"
#include "train/trainer.h"
#include "workflow/ablation.h"

namespace past {
namespace {

TEST(MixFrequencyTest, ModesFollowConfiguredProbabilities) {
  const ModelConfig cfg;
  std::mt19937_64 rng(123);
  const int n = 10000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[static_cast<int>(SampleMixMode(rng, cfg.p_trns_only,
                                                                       cfg.p_skip_only))];
  EXPECT_NEAR(counts[static_cast<int>(MixMode::kTransformerOnly)] / double(n), 0.3, 0.02);
  EXPECT_NEAR(counts[static_cast<int>(MixMode::kSkipOnly)] / double(n), 0.1, 0.02);
  EXPECT_NEAR(counts[static_cast<int>(MixMode::kAverage)] / double(n), 0.6, 0.02);
}

class CorpusFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new RunConfig(TinyConfig());
    const int hop = cfg_->model.Hop();
    phonetic_ = new Corpus(GenerateSyntheticCorpus(6, cfg_->data, 16000, hop, 1, true));
    transcribed_ = new Corpus(GenerateSyntheticCorpus(6, cfg_->data, 16000, hop, 2, false));
  }
  static void TearDownTestSuite() {
    delete cfg_;
    delete phonetic_;
    delete transcribed_;
  }
  static RunConfig* cfg_;
  static Corpus* phonetic_;
  static Corpus* transcribed_;
};

RunConfig* CorpusFixture::cfg_ = nullptr;
Corpus* CorpusFixture::phonetic_ = nullptr;
Corpus* CorpusFixture::transcribed_ = nullptr;

TEST_F(CorpusFixture, PhonemeSupervisionFraction) {
  BatchSpec spec;
  spec.batch_size = 100;
  spec.segment_seconds = 0.04;
  std::mt19937_64 rng(5);
  int phonetic = 0, total = 0, masked = 0;
  for (int i = 0; i < 100; ++i) {
    Batch b = SampleBatch(*phonetic_, *transcribed_, spec, 16000, 320, rng);
    for (size_t k = 0; k < b.from_phonetic.size(); ++k) {
      phonetic += b.from_phonetic[k];
      masked += b.phone_mask[k].item<bool>();
      ++total;
    }
  }
  EXPECT_EQ(total, 10000);
  EXPECT_NEAR(phonetic / double(total), 0.10, 0.01);
  EXPECT_EQ(masked, phonetic);
}

TEST_F(CorpusFixture, BatchShapesAndLabels) {
  BatchSpec spec;
  spec.batch_size = 8;
  spec.segment_seconds = 1.0;
  spec.phonetic_fraction = 1.0;
  std::mt19937_64 rng(6);
  Batch b = SampleBatch(*phonetic_, *transcribed_, spec, 16000, 320, rng);
  EXPECT_EQ(b.audio.sizes(), (std::vector<int64_t>{8, 1, 16000}));
  EXPECT_EQ(b.phone_labels.sizes(), (std::vector<int64_t>{8, 50}));
  EXPECT_LT(b.phone_labels.max().item<int64_t>(), cfg_->data.phone_set_size);
  spec.segment_seconds = 0.03;  // not a hop multiple
  EXPECT_THROW(SampleBatch(*phonetic_, *transcribed_, spec, 16000, 320, rng), Error);
}

TEST_F(CorpusFixture, SyntheticCorpusDeterministic) {
  const int hop = cfg_->model.Hop();
  const Corpus again = GenerateSyntheticCorpus(6, cfg_->data, 16000, hop, 1, true);
  ASSERT_EQ(again.utterances.size(), phonetic_->utterances.size());
  for (size_t i = 0; i < again.utterances.size(); ++i) {
    EXPECT_EQ(again.utterances[i].audio.samples, phonetic_->utterances[i].audio.samples);
    EXPECT_EQ(again.utterances[i].transcript, phonetic_->utterances[i].transcript);
  }
  for (const auto& u : again.utterances) {
    ASSERT_TRUE(u.transcript.has_value());
    EXPECT_EQ(u.char_spans.size(), u.transcript->size());
    EXPECT_FALSE(u.phones.empty());
    for (const auto& p : u.phones) EXPECT_LT(p.phone, cfg_->data.phone_set_size);
  }
}

// Majority label per frame by counting samples one at a time.
std::vector<int32_t> RasterOracle(const std::vector<PhoneSegment>& phones, int64_t offset,
                                  int frames, int hop) {
  std::vector<int32_t> out(frames, -1);
  for (int t = 0; t < frames; ++t) {
    std::vector<int64_t> cover(phones.size(), 0);
    for (int64_t s = offset + int64_t(t) * hop; s < offset + int64_t(t + 1) * hop; ++s) {
      for (size_t k = 0; k < phones.size(); ++k) {
        if (s >= phones[k].start && s < phones[k].end) ++cover[k];
      }
    }
    int64_t best = 0;
    for (size_t k = 0; k < phones.size(); ++k) {
      if (cover[k] > best) {
        best = cover[k];
        out[t] = phones[k].phone;
      }
    }
  }
  return out;
}

TEST(RasterizeTest, MatchesSampleCounting) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PhoneSegment> phones;
    int64_t pos = static_cast<int64_t>(rng() % 50);
    for (int k = 0; k < 6; ++k) {
      const int64_t len = 5 + static_cast<int64_t>(rng() % 60);
      phones.push_back({static_cast<int>(rng() % 5), pos, pos + len});
      pos += len + static_cast<int64_t>(rng() % 3) * 10;
    }
    const int64_t offset = static_cast<int64_t>(rng() % 40);
    ASSERT_EQ(RasterizePhones(phones, offset, 12, 20), RasterOracle(phones, offset, 12, 20));
  }
}

TEST(CropTranscriptTest, HalfOverlapRule) {
  const std::string text = "ab cd";
  const std::vector<CharSpan> spans = {{0, 10}, {10, 20}, {20, 30}, {30, 40}, {40, 50}};
  EXPECT_EQ(CropTranscript(text, spans, 0, 50), "ab cd");
  EXPECT_EQ(CropTranscript(text, spans, 5, 35), "ab c");
  EXPECT_EQ(CropTranscript(text, spans, 16, 34), "");  // only the space survives
  EXPECT_EQ(CropTranscript(text, spans, 15, 45), "b cd");
  EXPECT_THROW(CropTranscript(text, {{0, 1}}, 0, 1), Error);
}

TEST(LearningRateTest, WarmupThenCosine) {
  EXPECT_DOUBLE_EQ(CosineLearningRate(0, 1.0, 10, 110), 0.1);
  EXPECT_DOUBLE_EQ(CosineLearningRate(9, 1.0, 10, 110), 1.0);
  EXPECT_DOUBLE_EQ(CosineLearningRate(10, 1.0, 10, 110), 1.0);
  EXPECT_NEAR(CosineLearningRate(60, 1.0, 10, 110), 0.5, 1e-12);
  EXPECT_NEAR(CosineLearningRate(110, 1.0, 10, 110), 0.0, 1e-12);
  EXPECT_NEAR(CosineLearningRate(35, 2.0, 10, 110),
              1.0 + std::cos(std::numbers::pi * 0.25), 1e-12);
  EXPECT_DOUBLE_EQ(CosineLearningRate(0, 3e-4, 0, 100), 3e-4);
}

class TrainerTest : public CorpusFixture {
 protected:
  static RunConfig SmallRun(bool adversarial) {
    RunConfig c = *cfg_;
    c.seed = 4;
    c.train.steps = 4;
    c.train.batch.batch_size = 2;
    c.train.batch.segment_seconds = 0.4;
    c.train.batch.phonetic_fraction = 0.5;
    c.disc.n_ffts = {128, 64};
    if (!adversarial) c.loss.adversarial = c.loss.feature_matching = 0.0;
    return c;
  }
};

TEST_F(TrainerTest, SameSeedSameLosses) {
  const RunConfig c = SmallRun(false);
  Trainer a(c, *phonetic_, *transcribed_), b(c, *phonetic_, *transcribed_);
  for (int i = 0; i < 3; ++i) {
    const StepRecord ra = a.Step(), rb = b.Step();
    EXPECT_EQ(ra.total, rb.total);
    EXPECT_EQ(ra.mode, rb.mode);
    EXPECT_TRUE(std::isfinite(ra.total));
  }
  EXPECT_EQ(a.step(), 3);
}

TEST_F(TrainerTest, ResumeMatchesUninterrupted) {
  testing::TempDir dir("resume");
  const RunConfig c = SmallRun(true);
  Trainer straight(c, *phonetic_, *transcribed_);
  std::vector<double> want;
  for (int i = 0; i < 4; ++i) want.push_back(straight.Step().total);

  Trainer first(c, *phonetic_, *transcribed_);
  first.Step();
  first.Step();
  const std::string ckpt = dir / "mid.ckpt";
  first.SaveCheckpoint(ckpt);
  Trainer resumed(c, *phonetic_, *transcribed_);
  resumed.LoadCheckpoint(ckpt);
  EXPECT_EQ(resumed.step(), 2);
  EXPECT_EQ(resumed.Step().total, want[2]);
  EXPECT_EQ(resumed.Step().total, want[3]);
  auto pa = straight.model()->named_parameters();
  auto pb = resumed.model()->named_parameters();
  for (const auto& item : pa) EXPECT_TRUE(torch::equal(item.value(), pb[item.key()]))
      << item.key();
}

TEST_F(TrainerTest, RecordsAuxTermsOnlyWhenWeighted) {
  RunConfig c = SmallRun(false);
  c.loss.lambda_ctc = 0.0;
  c.loss.lambda_phn = 0.0;
  Trainer t(c, *phonetic_, *transcribed_);
  const StepRecord r = t.Step();
  EXPECT_EQ(r.weighted.at("ctc"), 0.0);
  EXPECT_EQ(r.weighted.at("phn"), 0.0);
  EXPECT_NEAR(r.total, r.encodec, 1e-12);
  EXPECT_GE(r.transformer_grad_share, 0.0);
  EXPECT_LE(r.transformer_grad_share, 1.0);
}

TEST_F(TrainerTest, RunWritesCheckpointsAndMetrics) {
  testing::TempDir dir("run");
  RunConfig c = SmallRun(false);
  c.train.steps = 2;
  c.train.checkpoint_every = 1;
  Trainer t(c, *phonetic_, *transcribed_);
  int seen = 0;
  RunOptions opts;
  opts.out_dir = dir.str();
  opts.on_step = [&](const StepRecord&) { ++seen; };
  t.Run(opts);
  EXPECT_EQ(seen, 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / ("checkpoints/" + CheckpointName(2))));
}

TEST_F(TrainerTest, AblationReusesMatchingRowsFromAnyDirectory) {
  namespace fs = std::filesystem;
  testing::TempDir dir("ablate");
  RunConfig c = SmallRun(false);
  c.train.steps = 2;
  c.eval.abx_max_triplets = 50;
  const SyntheticCorpora data{*phonetic_, *transcribed_, *phonetic_};
  const std::vector<AblationRow> rows = {AblationGrid().front()};
  AblationOptions opts;
  opts.out_dir = dir.str();
  const auto first = RunAblation(c, data, rows, opts);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_TRUE(fs::path(first[0].checkpoint).is_absolute());
  EXPECT_EQ(first[0].config_hash, ConfigHash(RunConfigToJson(ApplyAblationRow(c, rows[0]))));

  // A record written from another working directory holds a relative path.
  const fs::path record = fs::path(dir.str()) / rows[0].name / "result.json";
  auto j = nlohmann::json::parse(std::ifstream(record));
  j["checkpoint"] = "elsewhere/model.ckpt";
  std::ofstream(record) << j.dump(2);
  const fs::path metrics = fs::path(dir.str()) / rows[0].name / "metrics.jsonl";
  const auto stamp = fs::last_write_time(metrics);

  const fs::path cwd = fs::current_path();
  fs::current_path(fs::temp_directory_path());
  const auto again = RunAblation(c, data, rows, opts);
  fs::current_path(cwd);
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(fs::last_write_time(metrics), stamp);  // not retrained
  EXPECT_EQ(again[0].checkpoint, first[0].checkpoint);
  EXPECT_EQ(again[0].report.pnmi, first[0].report.pnmi);
  EXPECT_EQ(again[0].transformer_grad_share, first[0].transformer_grad_share);

  // A different config retrains the row.
  c.seed = 5;
  const auto other = RunAblation(c, data, rows, opts);
  EXPECT_NE(other[0].config_hash, first[0].config_hash);
  EXPECT_EQ(nlohmann::json::parse(std::ifstream(record))["config_hash"].get<uint64_t>(),
            other[0].config_hash);
}

}  // namespace
}  // namespace past
