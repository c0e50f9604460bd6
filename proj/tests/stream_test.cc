// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "core/errors.h"
#include "stream/engine.h"
#include "test_util.h"

namespace past {
namespace {

using testing::RandomSignal;
using testing::SeededModel;
using testing::TinyModelConfig;

class StreamTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = new PastModel(SeededModel(TinyModelConfig(true), 7));
    weights_ = CausalCodecWeights::FromModel(*model_);
  }
  static void TearDownTestSuite() {
    delete model_;
    weights_.reset();
  }

  static PastModel* model_;
  static std::shared_ptr<const CausalCodecWeights> weights_;
};

PastModel* StreamTest::model_ = nullptr;
std::shared_ptr<const CausalCodecWeights> StreamTest::weights_;

TokenMatrix StreamAll(const std::shared_ptr<const CausalCodecWeights>& w,
                      const std::vector<float>& x, const std::vector<size_t>& cuts, int n_q) {
  StreamEncoder enc(w, n_q);
  TokenMatrix all(n_q, 0, w->cfg.rvq.codebook_size, w->cfg.FrameRate());
  size_t pos = 0;
  for (size_t c : cuts) {
    all.Append(enc.Feed(std::span<const float>(x).subspan(pos, c - pos)));
    pos = c;
  }
  all.Append(enc.Feed(std::span<const float>(x).subspan(pos)));
  all.Append(enc.Flush());
  return all;
}

TEST_F(StreamTest, RejectsNonCausalModel) {
  PastModel offline = SeededModel(TinyModelConfig(false), 1);
  try {
    CausalCodecWeights::FromModel(offline);
    FAIL() << "non-causal model accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST_F(StreamTest, LatencyContract) {
  StreamEncoder enc(weights_, 4);
  EXPECT_EQ(enc.frames_emitted(), 0);
  std::mt19937_64 rng(3);
  const auto x = RandomSignal(16000 + 320, rng);
  for (size_t i = 0; i < x.size(); ++i) {
    const TokenMatrix out = enc.Feed(std::span<const float>(x).subspan(i, 1));
    const int64_t n = static_cast<int64_t>(i) + 1;
    // Frame k is out exactly when (k + 2) * 320 samples have arrived.
    EXPECT_EQ(enc.frames_emitted(), std::max<int64_t>(0, n / 320 - 1)) << n;
    if (n == 639) EXPECT_EQ(enc.frames_emitted(), 0);
    if (n == 640) EXPECT_EQ(out.frames, 1);
    if (enc.frames_emitted() > 0) EXPECT_LE(enc.frames_emitted() * 320 + 320, n);
  }
  EXPECT_EQ(enc.frames_emitted(), 50);
}

TEST_F(StreamTest, FeedCountsMatchExamples) {
  std::mt19937_64 rng(4);
  const auto x = RandomSignal(640, rng);
  StreamEncoder a(weights_, 4);
  EXPECT_EQ(a.Feed(std::span<const float>(x).first(320)).frames, 0);
  EXPECT_EQ(a.Feed(std::span<const float>(x).subspan(320)).frames, 1);
  StreamEncoder b(weights_, 4);
  EXPECT_EQ(b.Flush().frames, 0);
}

TEST_F(StreamTest, FlushBoundaryMatchesReference) {
  std::mt19937_64 rng(5);
  const auto x = RandomSignal(1280, rng);
  for (size_t n = 320; n <= 1280; n += 37) {
    std::vector<float> prefix(x.begin(), x.begin() + n);
    StreamEncoder enc(weights_, 4);
    TokenMatrix got = enc.Feed(prefix);
    const int64_t before = got.frames;
    got.Append(enc.Flush());
    const TokenMatrix ref = ReferenceEncode(*weights_, prefix, 4).tokens;
    EXPECT_EQ(got.frames, static_cast<int>((n + 319) / 320)) << n;
    EXPECT_EQ(got, ref) << n;
    EXPECT_EQ(before, std::max<int64_t>(0, static_cast<int64_t>(n) / 320 - 1));
  }
}

TEST_F(StreamTest, ChunkingInvariance) {
  std::mt19937_64 rng(6);
  const auto x = RandomSignal(9000, rng);
  const TokenMatrix whole = StreamAll(weights_, x, {}, 4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<size_t> cuts;
    size_t pos = 0;
    std::uniform_int_distribution<size_t> step(1, trial % 2 ? 10000 : 700);
    while ((pos += step(rng)) < x.size()) cuts.push_back(pos);
    EXPECT_EQ(StreamAll(weights_, x, cuts, 4), whole);
  }
  EXPECT_EQ(whole, ReferenceEncode(*weights_, x, 4).tokens);
}

TEST_F(StreamTest, ReferenceTracksTorchForward) {
  std::mt19937_64 rng(8);
  AudioSegment audio;
  audio.samples = RandomSignal(16000, rng);
  torch::NoGradGuard guard;
  auto z_conv = (*model_)->ConvEncode(AudioToTensor(audio));
  auto z = MixLatents(z_conv, (*model_)->TransformerEncode(z_conv), MixMode::kAverage);
  const LatentSequence torch_z = TensorToLatent(z, 0, 50);
  const ReferenceEncoding ref = ReferenceEncode(*weights_, audio.samples, 4);
  ASSERT_EQ(ref.latent.frames, torch_z.frames);
  double max_diff = 0.0, scale = 0.0;
  for (size_t i = 0; i < ref.latent.values.size(); ++i) {
    max_diff = std::max<double>(max_diff, std::abs(ref.latent.values[i] - torch_z.values[i]));
    scale = std::max<double>(scale, std::abs(torch_z.values[i]));
  }
  EXPECT_LT(max_diff, 1e-4 * std::max(1.0, scale));
  const TokenMatrix torch_tokens = (*model_)->Encode(audio, 4);
  int same = 0;
  for (int t = 0; t < torch_tokens.frames; ++t) same += torch_tokens.at(0, t) == ref.tokens.at(0, t);
  EXPECT_GE(same, torch_tokens.frames - 1);

  const AudioSegment torch_audio = (*model_)->DecodeTokens(ref.tokens);
  const std::vector<float> ref_audio = ReferenceDecode(*weights_, ref.tokens);
  ASSERT_EQ(ref_audio.size(), torch_audio.samples.size());
  double dec_diff = 0.0;
  for (size_t i = 0; i < ref_audio.size(); ++i)
    dec_diff = std::max<double>(dec_diff, std::abs(ref_audio[i] - torch_audio.samples[i]));
  EXPECT_LT(dec_diff, 1e-4);
}

TEST_F(StreamTest, CausalityUnderPerturbation) {
  std::mt19937_64 rng(9);
  const auto x = RandomSignal(4800, rng);
  const TokenMatrix base = ReferenceEncode(*weights_, x, 4).tokens;
  for (int trial = 0; trial < 10; ++trial) {
    const int k = std::uniform_int_distribution<int>(0, 12)(rng);
    const size_t horizon = static_cast<size_t>(k + 1) * 320 + 320;
    auto y = x;
    std::normal_distribution<float> g(0.0f, 0.5f);
    for (size_t i = horizon; i < y.size(); ++i) y[i] += g(rng);
    StreamEncoder enc(weights_, 4);
    const TokenMatrix got = enc.Feed(y);
    for (int t = 0; t <= k; ++t)
      for (int q = 0; q < 4; ++q) EXPECT_EQ(got.at(q, t), base.at(q, t));
  }
}

TEST_F(StreamTest, IndependentInterleavedStreams) {
  std::mt19937_64 rng(10);
  const auto x = RandomSignal(5000, rng), y = RandomSignal(5000, rng);
  const TokenMatrix rx = StreamAll(weights_, x, {}, 2), ry = StreamAll(weights_, y, {}, 2);
  StreamEncoder a(weights_, 2), b(weights_, 2);
  TokenMatrix ax(2, 0, 64, 50), by(2, 0, 64, 50);
  for (size_t pos = 0; pos < 5000; pos += 333) {
    const size_t len = std::min<size_t>(333, 5000 - pos);
    ax.Append(a.Feed(std::span<const float>(x).subspan(pos, len)));
    by.Append(b.Feed(std::span<const float>(y).subspan(pos, len)));
  }
  ax.Append(a.Flush());
  by.Append(b.Flush());
  EXPECT_EQ(ax, rx);
  EXPECT_EQ(by, ry);
}

TEST_F(StreamTest, ConcurrentStreamsOnSharedWeights) {
  std::mt19937_64 rng(11);
  const auto x = RandomSignal(4000, rng);
  const TokenMatrix expect = ReferenceEncode(*weights_, x, 4).tokens;
  std::vector<TokenMatrix> got(3);
  std::vector<std::thread> threads;
  for (int i = 0; i < 3; ++i)
    threads.emplace_back([&, i] { got[i] = StreamAll(weights_, x, {100u * (i + 1)}, 4); });
  for (auto& t : threads) t.join();
  for (const auto& g : got) EXPECT_EQ(g, expect);
}

TEST_F(StreamTest, ResetRestoresFreshState) {
  std::mt19937_64 rng(12);
  const auto x = RandomSignal(3000, rng);
  StreamEncoder enc(weights_, 4);
  enc.Feed(RandomSignal(2000, rng));
  enc.Reset();
  EXPECT_EQ(enc.frames_emitted(), 0);
  EXPECT_EQ(enc.samples_consumed(), 0);
  TokenMatrix got = enc.Feed(x);
  got.Append(enc.Flush());
  EXPECT_EQ(got, StreamAll(weights_, x, {}, 4));
}

TEST_F(StreamTest, StateErrors) {
  StreamEncoder enc(weights_, 4);
  enc.Flush();
  try {
    enc.Flush();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
  std::vector<float> one(1, 0.0f);
  try {
    enc.Feed(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
  StreamDecoder dec(weights_);
  TokenMatrix bad(1, 1, 64, 50);
  bad.at(0, 0) = 64;
  try {
    dec.Feed(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

TEST_F(StreamTest, MemoryIsBounded) {
  std::mt19937_64 rng(13);
  StreamEncoder enc(weights_, 4);
  StreamDecoder dec(weights_);
  std::vector<size_t> enc_sizes, dec_sizes;
  for (int block = 0; block < 8; ++block) {
    const TokenMatrix t = enc.Feed(RandomSignal(16000, rng));
    dec.Feed(t);
    enc_sizes.push_back(enc.StateFloats());
    dec_sizes.push_back(dec.StateFloats());
  }
  // The attention window (150 frames) is full after 3 s.
  for (int i = 4; i < 8; ++i) {
    EXPECT_EQ(enc_sizes[i], enc_sizes[3]);
    EXPECT_EQ(dec_sizes[i], dec_sizes[0]);
  }
}

TEST_F(StreamTest, DecodeStreamMatchesReference) {
  std::mt19937_64 rng(14);
  const TokenMatrix tokens = ReferenceEncode(*weights_, RandomSignal(16000, rng), 4).tokens;
  ASSERT_EQ(tokens.frames, 50);
  const std::vector<float> ref = ReferenceDecode(*weights_, tokens);
  ASSERT_EQ(ref.size(), 16000u);
  StreamDecoder dec(weights_);
  std::vector<float> got;
  int t = 0;
  while (t < tokens.frames) {
    const int n = std::min(1 + t % 3, tokens.frames - t);
    TokenMatrix part(4, n, 64, 50);
    for (int q = 0; q < 4; ++q)
      for (int i = 0; i < n; ++i) part.at(q, i) = tokens.at(q, t + i);
    const auto out = dec.Feed(part);
    EXPECT_EQ(out.size(), static_cast<size_t>(n) * 320);
    got.insert(got.end(), out.begin(), out.end());
    t += n;
  }
  ASSERT_EQ(got.size(), ref.size());
  double diff = 0.0;
  for (size_t i = 0; i < got.size(); ++i) diff = std::max<double>(diff, std::abs(got[i] - ref[i]));
  EXPECT_LE(diff, 1e-5);
}

}  // namespace
}  // namespace past
