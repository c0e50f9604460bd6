// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Exercises the shared library strictly through its C interface, and the
// command-line tool built on it.

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"
#include "past/past.h"

namespace {

namespace fs = std::filesystem;

class Scratch {
 public:
  Scratch() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("past_capi_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  past_string_free(s);
  return out;
}

std::string Resolve(const std::vector<std::string>& overrides) {
  std::vector<const char*> ptrs;
  for (const auto& o : overrides) ptrs.push_back(o.c_str());
  char* out = nullptr;
  EXPECT_EQ(past_config_resolve("tiny", nullptr, ptrs.data(), ptrs.size(), &out), PAST_OK)
      << past_last_error();
  return TakeString(out);
}

past_model* CreateModel(const std::vector<std::string>& overrides, uint64_t seed = 1) {
  const std::string cfg = Resolve(overrides);
  past_model* m = nullptr;
  EXPECT_EQ(past_model_create(cfg.c_str(), seed, &m), PAST_OK) << past_last_error();
  return m;
}

std::vector<float> Signal(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.1f);
  std::vector<float> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = 0.3f * std::sin(0.05f * i) + g(rng);
  return x;
}

TEST(CApiTest, VersionAndStatusNames) {
  EXPECT_NE(std::string(past_version()), "");
  EXPECT_STREQ(past_status_name(PAST_OK), "ok");
  EXPECT_NE(std::string(past_status_name(PAST_ERR_WAV)), past_status_name(PAST_ERR_CONFIG));
}

TEST(CApiTest, ConfigErrors) {
  char* out = nullptr;
  EXPECT_EQ(past_config_resolve("tiny", "{not json", nullptr, 0, &out), PAST_ERR_CONFIG);
  EXPECT_NE(std::string(past_last_error()), "");
  const char* bad[] = {"model.nope=1"};
  EXPECT_EQ(past_config_resolve("tiny", nullptr, bad, 1, &out), PAST_ERR_CONFIG);
  EXPECT_EQ(past_config_resolve("tiny", nullptr, nullptr, 0, nullptr), PAST_ERR_ARGUMENT);
  const std::string cfg = Resolve({});
  char* hex = nullptr;
  ASSERT_EQ(past_config_hash(cfg.c_str(), &hex), PAST_OK);
  EXPECT_EQ(TakeString(hex).size(), 16u);
}

TEST(CApiTest, EncodeDecodeRoundTripPreservesDuration) {
  past_model* m = CreateModel({});
  ASSERT_NE(m, nullptr);
  past_model_info info{};
  ASSERT_EQ(past_model_info_get(m, &info), PAST_OK);
  EXPECT_EQ(info.hop, 320);
  EXPECT_EQ(info.frame_rate, 50);
  const auto x = Signal(16000, 1);
  past_tokens* t = nullptr;
  ASSERT_EQ(past_model_encode(m, x.data(), x.size(), 16000, 2, &t), PAST_OK) << past_last_error();
  EXPECT_EQ(past_tokens_frames(t), 50);
  EXPECT_EQ(past_tokens_n_q(t), 2);
  float* y = nullptr;
  size_t n = 0;
  ASSERT_EQ(past_model_decode(m, t, 0, &y, &n), PAST_OK);
  EXPECT_EQ(n, x.size());
  past_samples_free(y);
  past_tokens_free(t);
  EXPECT_EQ(past_model_encode(m, x.data(), x.size(), 8000, 2, &t), PAST_ERR_CONFIG);
  EXPECT_EQ(past_model_encode(m, x.data(), x.size(), 16000, 9, &t), PAST_ERR_ARGUMENT);
  past_model_free(m);
}

TEST(CApiTest, StreamingMatchesOfflineCausalEncode) {
  past_model* m = CreateModel({"model.causal=true"});
  const auto x = Signal(7000, 2);
  past_tokens* offline = nullptr;
  ASSERT_EQ(past_model_encode(m, x.data(), x.size(), 16000, 4, &offline), PAST_OK);
  past_stream* s = nullptr;
  ASSERT_EQ(past_stream_open(m, 4, &s), PAST_OK) << past_last_error();
  std::vector<int32_t> streamed_q1;
  size_t pos = 0;
  std::mt19937_64 rng(3);
  auto collect = [&](past_tokens* t) {
    const int frames = past_tokens_frames(t);
    const int32_t* d = past_tokens_data(t);
    for (int f = 0; f < frames; ++f) streamed_q1.push_back(d[f]);
    past_tokens_free(t);
  };
  while (pos < x.size()) {
    const size_t n = std::min<size_t>(1 + rng() % 900, x.size() - pos);
    past_tokens* t = nullptr;
    ASSERT_EQ(past_stream_feed(s, x.data() + pos, n, &t), PAST_OK);
    collect(t);
    pos += n;
  }
  past_tokens* tail = nullptr;
  ASSERT_EQ(past_stream_flush(s, &tail), PAST_OK);
  collect(tail);
  const int frames = past_tokens_frames(offline);
  ASSERT_EQ(static_cast<int>(streamed_q1.size()), frames);
  EXPECT_EQ(past_stream_frames_emitted(s), frames);
  // The offline path runs the tensor backend; the first stream agrees up to
  // rare near-tie frames.
  int differ = 0;
  for (int f = 0; f < frames; ++f) differ += streamed_q1[f] != past_tokens_data(offline)[f];
  EXPECT_LE(differ, 1);
  past_tokens* more = nullptr;
  EXPECT_EQ(past_stream_feed(s, x.data(), 10, &more), PAST_ERR_STATE);
  EXPECT_EQ(past_stream_reset(s), PAST_OK);
  EXPECT_EQ(past_stream_frames_emitted(s), 0);
  past_stream_free(s);
  past_tokens_free(offline);
  past_model_free(m);
}

TEST(CApiTest, StreamingRejectsNonCausalModel) {
  past_model* m = CreateModel({});
  past_stream* s = nullptr;
  EXPECT_EQ(past_stream_open(m, 4, &s), PAST_ERR_CONFIG);
  EXPECT_EQ(s, nullptr);
  past_model_free(m);
}

TEST(CApiTest, FileErrorsHaveDistinctCodes) {
  Scratch dir;
  past_model* m = nullptr;
  EXPECT_EQ(past_model_load((dir / "missing.ckpt").c_str(), &m), PAST_ERR_CHECKPOINT);
  {
    std::ofstream os(dir / "x.wav");
    os << "not a wav file";
  }
  float* s = nullptr;
  size_t n = 0;
  int sr = 0;
  EXPECT_EQ(past_wav_read((dir / "x.wav").c_str(), &s, &n, &sr), PAST_ERR_WAV);
  past_tokens* t = nullptr;
  EXPECT_EQ(past_tokens_read((dir / "x.wav").c_str(), &t), PAST_ERR_DATA);
  const int32_t bad[] = {0, 70};
  EXPECT_EQ(past_tokens_create(1, 2, 64, 50, bad, &t), PAST_ERR_DATA);
}

TEST(CApiTest, ModelSaveLoadKeepsTokens) {
  Scratch dir;
  past_model* m = CreateModel({}, 5);
  ASSERT_EQ(past_model_save(m, (dir / "m.ckpt").c_str()), PAST_OK);
  past_model* back = nullptr;
  ASSERT_EQ(past_model_load((dir / "m.ckpt").c_str(), &back), PAST_OK);
  const auto x = Signal(3200, 6);
  past_tokens *a = nullptr, *b = nullptr;
  ASSERT_EQ(past_model_encode(m, x.data(), x.size(), 16000, 4, &a), PAST_OK);
  ASSERT_EQ(past_model_encode(back, x.data(), x.size(), 16000, 4, &b), PAST_OK);
  const int count = past_tokens_frames(a) * past_tokens_n_q(a);
  EXPECT_TRUE(std::equal(past_tokens_data(a), past_tokens_data(a) + count, past_tokens_data(b)));
  past_tokens_free(a);
  past_tokens_free(b);
  past_model_free(m);
  past_model_free(back);
}

// ---- Command-line tool

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string(PAST_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  while (size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    past_model* m = CreateModel({"model.causal=true", "model.rvq.n_q=8",
                                 "model.rvq.codebook_size=1024"});
    ASSERT_EQ(past_model_save(m, (dir_ / "m.ckpt").c_str()), PAST_OK);
    past_model_free(m);
    const auto x = Signal(16000, 7);
    ASSERT_EQ(past_wav_write((dir_ / "one.wav").c_str(), x.data(), x.size(), 16000), PAST_OK);
    ASSERT_EQ(past_wav_write((dir_ / "slow.wav").c_str(), x.data(), 8000, 8000), PAST_OK);
  }
  Scratch dir_;
};

TEST_F(CliTest, EncodeReportsBitrateAndRoundTripsDuration) {
  const auto r = RunCli("encode --quiet --checkpoint " + (dir_ / "m.ckpt") + " --input " +
                     (dir_ / "one.wav") + " --output " + (dir_ / "one.tok"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["frames"], 50);
  EXPECT_EQ(j["n_q"], 8);
  EXPECT_DOUBLE_EQ(j["bitrate"].get<double>(), 4000.0);
  EXPECT_TRUE(fs::exists(dir_ / "one.tok.config.json"));

  const auto r1 = RunCli("encode --quiet --n-q 1 --checkpoint " + (dir_ / "m.ckpt") + " --input " +
                      (dir_ / "one.wav") + " --output " + (dir_ / "q1.tok"));
  ASSERT_EQ(r1.code, 0);
  past_tokens* t = nullptr;
  ASSERT_EQ(past_tokens_read((dir_ / "q1.tok").c_str(), &t), PAST_OK);
  EXPECT_EQ(past_tokens_n_q(t), 1);
  past_tokens_free(t);

  const auto d = RunCli("decode --quiet --checkpoint " + (dir_ / "m.ckpt") + " --input " +
                     (dir_ / "one.tok") + " --output " + (dir_ / "back.wav"));
  ASSERT_EQ(d.code, 0);
  float* s = nullptr;
  size_t n = 0;
  int sr = 0;
  ASSERT_EQ(past_wav_read((dir_ / "back.wav").c_str(), &s, &n, &sr), PAST_OK);
  EXPECT_EQ(n, 16000u);
  past_samples_free(s);
}

TEST_F(CliTest, StreamEncodeMatchesOfflineFrameCount) {
  const auto r = RunCli("stream-encode --quiet --chunk 123 --checkpoint " + (dir_ / "m.ckpt") +
                     " --input " + (dir_ / "one.wav") + " --output " + (dir_ / "s.tok"));
  ASSERT_EQ(r.code, 0) << r.out;
  past_tokens* t = nullptr;
  ASSERT_EQ(past_tokens_read((dir_ / "s.tok").c_str(), &t), PAST_OK);
  EXPECT_EQ(past_tokens_frames(t), 50);
  past_tokens_free(t);
}

TEST_F(CliTest, DistinctExitCodes) {
  EXPECT_EQ(RunCli("encode --checkpoint " + (dir_ / "none.ckpt") + " --input " +
                (dir_ / "one.wav") + " --output " + (dir_ / "x.tok"))
                .code,
            PAST_ERR_CHECKPOINT);
  {
    std::ofstream os(dir_ / "bad.wav");
    os << "garbage";
  }
  EXPECT_EQ(RunCli("encode --checkpoint " + (dir_ / "m.ckpt") + " --input " + (dir_ / "bad.wav") +
                " --output " + (dir_ / "x.tok"))
                .code,
            PAST_ERR_WAV);
  EXPECT_EQ(RunCli("encode --checkpoint " + (dir_ / "m.ckpt") + " --input " +
                (dir_ / "slow.wav") + " --output " + (dir_ / "x.tok"))
                .code,
            PAST_ERR_CONFIG);
  EXPECT_EQ(RunCli("train --out " + (dir_ / "t") + " --override model.bogus=1").code,
            PAST_ERR_CONFIG);
  EXPECT_NE(RunCli("encode").code, 0);
}

TEST_F(CliTest, ResolvedConfigIsPersistedAndReusable) {
  const auto r = RunCli("encode --quiet --seed 3 --override eval.abx_max_triplets=7 --checkpoint " +
                     (dir_ / "m.ckpt") + " --input " + (dir_ / "one.wav") + " --output " +
                     (dir_ / "a.tok"));
  ASSERT_EQ(r.code, 0);
  std::ifstream is(dir_ / "a.tok.config.json");
  const auto cfg = nlohmann::json::parse(is);
  EXPECT_EQ(cfg["seed"], 3);
  EXPECT_EQ(cfg["eval"]["abx_max_triplets"], 7);
  const auto again = RunCli("encode --quiet --config " + (dir_ / "a.tok.config.json") +
                         " --checkpoint " + (dir_ / "m.ckpt") + " --input " +
                         (dir_ / "one.wav") + " --output " + (dir_ / "b.tok"));
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["config_hash"],
            nlohmann::json::parse(again.out)["config_hash"]);
}

}  // namespace
