// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "past/past.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>

#include "codec/model.h"
#include "core/audio_io.h"
#include "core/config.h"
#include "core/errors.h"
#include "core/token_io.h"
#include "stream/engine.h"
#include "workflow/workflows.h"

struct past_model {
  past::PastModel model{nullptr};
  std::once_flag weights_once;
  std::shared_ptr<const past::CausalCodecWeights> weights;
};

struct past_tokens {
  past::TokenMatrix tokens;
};

struct past_stream {
  past::StreamEncoder encoder;
};

struct past_decode_stream {
  past::StreamDecoder decoder;
};

struct past_token_writer {
  std::unique_ptr<past::TokenWriter> writer;
};

struct past_audio_reader {
  std::unique_ptr<past::AudioReader> reader;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
past_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

past_status StatusOf(past::ErrorKind kind) {
  switch (kind) {
    case past::ErrorKind::kArgument: return PAST_ERR_ARGUMENT;
    case past::ErrorKind::kConfig: return PAST_ERR_CONFIG;
    case past::ErrorKind::kData: return PAST_ERR_DATA;
    case past::ErrorKind::kState: return PAST_ERR_STATE;
    case past::ErrorKind::kIo: return PAST_ERR_IO;
    case past::ErrorKind::kTraining: return PAST_ERR_TRAINING;
    case past::ErrorKind::kWav: return PAST_ERR_WAV;
    case past::ErrorKind::kCheckpoint: return PAST_ERR_CHECKPOINT;
  }
  return PAST_ERR_INTERNAL;
}

template <typename F>
past_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PAST_OK;
  } catch (const past::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PAST_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PAST_ERR_INTERNAL;
  }
}

void Need(const void* p, const char* what) {
  PAST_REQUIRE(p != nullptr, kArgument, std::string(what) + " must not be NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  PAST_REQUIRE(out != nullptr, kIo, "out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const nlohmann::json& j) {
  if (out) *out = CopyString(j.dump());
}

float* CopySamples(const std::vector<float>& v) {
  float* out = static_cast<float*>(std::malloc(std::max<size_t>(1, v.size()) * sizeof(float)));
  PAST_REQUIRE(out != nullptr, kIo, "out of memory");
  std::copy(v.begin(), v.end(), out);
  return out;
}

std::string Str(const char* s) { return s ? std::string(s) : std::string(); }

past::LogSink Sink() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (!g_log_fn) return {};
  past_log_fn fn = g_log_fn;
  void* user = g_log_user;
  return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

nlohmann::json ParseResolved(const char* text) {
  Need(text, "configuration");
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  PAST_REQUIRE(!j.is_discarded() && j.is_object(), kConfig, "configuration is not a JSON object");
  past::RunConfigFromJson(j);  // validates
  return j;
}

const std::shared_ptr<const past::CausalCodecWeights>& Weights(const past_model* m) {
  auto* mm = const_cast<past_model*>(m);
  std::call_once(mm->weights_once, [mm] {
    mm->weights = past::CausalCodecWeights::FromModel(mm->model);
  });
  return mm->weights;
}

}  // namespace

extern "C" {

const char* past_version(void) { return "0.1.0"; }

const char* past_status_name(past_status status) {
  switch (status) {
    case PAST_OK: return "ok";
    case PAST_ERR_ARGUMENT: return "argument";
    case PAST_ERR_CONFIG: return "config";
    case PAST_ERR_DATA: return "data";
    case PAST_ERR_STATE: return "state";
    case PAST_ERR_IO: return "io";
    case PAST_ERR_TRAINING: return "training";
    case PAST_ERR_WAV: return "wav";
    case PAST_ERR_CHECKPOINT: return "checkpoint";
    case PAST_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* past_last_error(void) { return g_last_error.c_str(); }
void past_string_free(char* s) { std::free(s); }
void past_samples_free(float* samples) { std::free(samples); }

void past_set_log_callback(past_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

past_status past_set_num_threads(int threads) {
  return Guard([&] {
    PAST_REQUIRE(threads >= 0, kArgument, "thread count must be >= 0");
    if (threads > 0) torch::set_num_threads(threads);
  });
}

// ---- Configuration

past_status past_config_resolve(const char* preset, const char* config_json,
                                const char* const* overrides, size_t n_overrides,
                                char** out_json) {
  return Guard([&] {
    Need(out_json, "out_json");
    nlohmann::json file;
    if (config_json && *config_json) {
      file = nlohmann::json::parse(config_json, nullptr, false);
      PAST_REQUIRE(!file.is_discarded() && file.is_object(), kConfig,
                   "config file is not a JSON object");
    }
    std::vector<std::string> ov;
    for (size_t i = 0; i < n_overrides; ++i) {
      Need(overrides[i], "override");
      ov.emplace_back(overrides[i]);
    }
    *out_json = CopyString(past::ResolveConfigJson(Str(preset), file, ov).dump(2));
  });
}

past_status past_config_hash(const char* resolved_json, char** out_hex) {
  return Guard([&] {
    Need(out_hex, "out_hex");
    *out_hex = CopyString(past::DescribeHash(past::ConfigHash(ParseResolved(resolved_json))));
  });
}

// ---- Models

past_status past_model_create(const char* resolved_json, uint64_t seed, past_model** out) {
  return Guard([&] {
    Need(out, "out");
    const past::RunConfig cfg = past::RunConfigFromJson(ParseResolved(resolved_json));
    torch::manual_seed(seed);
    auto m = std::make_unique<past_model>();
    m->model = past::PastModel(cfg.model);
    m->model->eval();
    *out = m.release();
  });
}

past_status past_model_load(const char* path, past_model** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    auto m = std::make_unique<past_model>();
    m->model = past::LoadModel(std::string(path));
    m->model->eval();
    *out = m.release();
  });
}

past_status past_model_save(const past_model* model, const char* path) {
  return Guard([&] {
    Need(model, "model");
    Need(path, "path");
    past::SaveModel(const_cast<past_model*>(model)->model, path);
  });
}

past_status past_model_info_get(const past_model* model, past_model_info* out) {
  return Guard([&] {
    Need(model, "model");
    Need(out, "out");
    const past::ModelConfig& c = model->model->cfg;
    out->sample_rate = c.sample_rate;
    out->hop = c.Hop();
    out->frame_rate = c.FrameRate();
    out->n_q = c.rvq.n_q;
    out->codebook_size = c.rvq.codebook_size;
    out->dim = c.dim;
    out->causal = c.causal ? 1 : 0;
    out->use_transformer = c.use_transformer ? 1 : 0;
  });
}

void past_model_free(past_model* model) { delete model; }

past_status past_model_encode(past_model* model, const float* samples, size_t n,
                              int sample_rate, int n_q, past_tokens** out) {
  return Guard([&] {
    Need(model, "model");
    Need(samples, "samples");
    Need(out, "out");
    PAST_REQUIRE(n > 0, kArgument, "empty audio input");
    past::AudioSegment audio;
    audio.sample_rate = sample_rate;
    audio.samples.assign(samples, samples + n);
    auto t = std::make_unique<past_tokens>();
    t->tokens = model->model->Encode(audio, n_q);
    *out = t.release();
  });
}

past_status past_model_decode(past_model* model, const past_tokens* tokens, int n_q,
                              float** out_samples, size_t* out_n) {
  return Guard([&] {
    Need(model, "model");
    Need(tokens, "tokens");
    Need(out_samples, "out_samples");
    Need(out_n, "out_n");
    const past::AudioSegment audio = model->model->DecodeTokens(tokens->tokens, n_q > 0 ? n_q : -1);
    *out_samples = CopySamples(audio.samples);
    *out_n = audio.samples.size();
  });
}

// ---- Token matrices

past_status past_tokens_create(int n_q, int frames, int codebook_size, int frame_rate,
                               const int32_t* indices, past_tokens** out) {
  return Guard([&] {
    Need(out, "out");
    PAST_REQUIRE(n_q >= 1 && frames >= 0 && codebook_size >= 1 && frame_rate >= 1, kArgument,
                 "bad token matrix shape");
    auto t = std::make_unique<past_tokens>();
    t->tokens = past::TokenMatrix(n_q, frames, codebook_size, frame_rate);
    if (frames > 0) {
      Need(indices, "indices");
      std::copy(indices, indices + static_cast<size_t>(n_q) * frames, t->tokens.indices.begin());
    }
    t->tokens.Validate();
    *out = t.release();
  });
}

past_status past_tokens_read(const char* path, past_tokens** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    auto t = std::make_unique<past_tokens>();
    t->tokens = past::ReadTokenFile(path);
    *out = t.release();
  });
}

past_status past_tokens_write(const past_tokens* tokens, const char* path) {
  return Guard([&] {
    Need(tokens, "tokens");
    Need(path, "path");
    past::WriteTokenFile(path, tokens->tokens);
  });
}

int past_tokens_n_q(const past_tokens* t) { return t ? t->tokens.n_q : 0; }
int past_tokens_frames(const past_tokens* t) { return t ? t->tokens.frames : 0; }
int past_tokens_codebook_size(const past_tokens* t) { return t ? t->tokens.codebook_size : 0; }
int past_tokens_frame_rate(const past_tokens* t) { return t ? t->tokens.frame_rate : 0; }
const int32_t* past_tokens_data(const past_tokens* t) {
  return t ? t->tokens.indices.data() : nullptr;
}
void past_tokens_free(past_tokens* tokens) { delete tokens; }

past_status past_token_writer_open(const char* path, int n_q, int codebook_size,
                                   int frame_rate, past_token_writer** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    auto w = std::make_unique<past_token_writer>();
    w->writer = std::make_unique<past::TokenWriter>(path, n_q, codebook_size, frame_rate);
    *out = w.release();
  });
}

past_status past_token_writer_append(past_token_writer* writer, const past_tokens* frames) {
  return Guard([&] {
    Need(writer, "writer");
    Need(frames, "frames");
    writer->writer->Append(frames->tokens);
  });
}

past_status past_token_writer_close(past_token_writer* writer) {
  return Guard([&] {
    Need(writer, "writer");
    writer->writer->Close();
  });
}

void past_token_writer_free(past_token_writer* writer) { delete writer; }

// ---- Audio files

past_status past_wav_read(const char* path, float** out_samples, size_t* out_n,
                          int* out_sample_rate) {
  return Guard([&] {
    Need(path, "path");
    Need(out_samples, "out_samples");
    Need(out_n, "out_n");
    const past::AudioSegment a = past::ReadWav(path);
    *out_samples = CopySamples(a.samples);
    *out_n = a.samples.size();
    if (out_sample_rate) *out_sample_rate = a.sample_rate;
  });
}

past_status past_wav_write(const char* path, const float* samples, size_t n, int sample_rate) {
  return Guard([&] {
    Need(path, "path");
    PAST_REQUIRE(n == 0 || samples != nullptr, kArgument, "samples must not be NULL");
    past::AudioSegment a;
    a.sample_rate = sample_rate;
    if (n) a.samples.assign(samples, samples + n);
    past::WriteWav(path, a);
  });
}

past_status past_audio_reader_open(const char* path, int raw_sample_rate,
                                   past_audio_reader** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    auto r = std::make_unique<past_audio_reader>();
    r->reader = std::make_unique<past::AudioReader>(path, raw_sample_rate);
    *out = r.release();
  });
}

int past_audio_reader_sample_rate(const past_audio_reader* reader) {
  return reader ? reader->reader->sample_rate() : 0;
}

past_status past_audio_reader_read(past_audio_reader* reader, float* out, size_t max,
                                   size_t* out_n) {
  return Guard([&] {
    Need(reader, "reader");
    Need(out, "out");
    Need(out_n, "out_n");
    *out_n = reader->reader->Read(out, max);
  });
}

void past_audio_reader_free(past_audio_reader* reader) { delete reader; }

// ---- Streaming

past_status past_stream_open(const past_model* model, int n_q, past_stream** out) {
  return Guard([&] {
    Need(model, "model");
    Need(out, "out");
    *out = new past_stream{past::StreamEncoder(Weights(model), n_q)};
  });
}

past_status past_stream_feed(past_stream* stream, const float* samples, size_t n,
                             past_tokens** out) {
  return Guard([&] {
    Need(stream, "stream");
    Need(out, "out");
    PAST_REQUIRE(n == 0 || samples != nullptr, kArgument, "samples must not be NULL");
    auto t = std::make_unique<past_tokens>();
    t->tokens = stream->encoder.Feed(std::span<const float>(samples, n));
    *out = t.release();
  });
}

past_status past_stream_flush(past_stream* stream, past_tokens** out) {
  return Guard([&] {
    Need(stream, "stream");
    Need(out, "out");
    auto t = std::make_unique<past_tokens>();
    t->tokens = stream->encoder.Flush();
    *out = t.release();
  });
}

past_status past_stream_reset(past_stream* stream) {
  return Guard([&] {
    Need(stream, "stream");
    stream->encoder.Reset();
  });
}

int64_t past_stream_frames_emitted(const past_stream* stream) {
  return stream ? stream->encoder.frames_emitted() : 0;
}

void past_stream_free(past_stream* stream) { delete stream; }

past_status past_decode_stream_open(const past_model* model, past_decode_stream** out) {
  return Guard([&] {
    Need(model, "model");
    Need(out, "out");
    *out = new past_decode_stream{past::StreamDecoder(Weights(model))};
  });
}

past_status past_decode_stream_feed(past_decode_stream* stream, const past_tokens* tokens,
                                    float** out_samples, size_t* out_n) {
  return Guard([&] {
    Need(stream, "stream");
    Need(tokens, "tokens");
    Need(out_samples, "out_samples");
    Need(out_n, "out_n");
    const std::vector<float> y = stream->decoder.Feed(tokens->tokens);
    *out_samples = CopySamples(y);
    *out_n = y.size();
  });
}

void past_decode_stream_free(past_decode_stream* stream) { delete stream; }

// ---- Workflows

past_status past_corpus_generate(const char* resolved_json, const char* out_dir,
                                 char** report_json) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    Emit(report_json, past::CorpusGenerate(ParseResolved(resolved_json), out_dir));
  });
}

past_status past_train(const char* resolved_json, const char* data_dir, const char* out_dir,
                       const char* resume, char** report_json) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    Emit(report_json, past::TrainWorkflow(ParseResolved(resolved_json), Str(data_dir), out_dir,
                                          Str(resume), Sink()));
  });
}

past_status past_evaluate(const char* resolved_json, const char* checkpoint,
                          const char* data_dir, const char* metrics, char** report_json) {
  return Guard([&] {
    Need(checkpoint, "checkpoint");
    Emit(report_json,
         past::EvaluateWorkflow(ParseResolved(resolved_json), checkpoint, Str(data_dir),
                                metrics ? metrics : "pnmi,abx,sisnr,cer"));
  });
}

past_status past_ablate(const char* resolved_json, const char* data_dir, const char* out_dir,
                        int reuse, char** report_json) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    Emit(report_json, past::AblateWorkflow(ParseResolved(resolved_json), Str(data_dir),
                                           out_dir, reuse != 0, Sink()));
  });
}

past_status past_lm_train(const char* resolved_json, const char* checkpoint,
                          const char* data_dir, const char* lm_out, char** report_json) {
  return Guard([&] {
    Need(checkpoint, "checkpoint");
    Need(lm_out, "lm_out");
    Emit(report_json, past::LmTrainWorkflow(ParseResolved(resolved_json), checkpoint,
                                            Str(data_dir), lm_out, Sink()));
  });
}

past_status past_swuggy_pairs(const char* resolved_json, const char* checkpoint,
                              const char* pairs_out, char** report_json) {
  return Guard([&] {
    Need(checkpoint, "checkpoint");
    Need(pairs_out, "pairs_out");
    Emit(report_json,
         past::SwuggyPairsWorkflow(ParseResolved(resolved_json), checkpoint, pairs_out));
  });
}

past_status past_swuggy(const char* lm_path, const char* pairs_path, char** report_json) {
  return Guard([&] {
    Need(lm_path, "lm_path");
    Need(pairs_path, "pairs_path");
    Emit(report_json, past::SwuggyWorkflow(lm_path, pairs_path));
  });
}

}  // extern "C"
