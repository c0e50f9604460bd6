/* Copyright 2026 The past Authors
 * License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
 *
 * C interface of libpast: a speech tokenizer with residual vector
 * quantization, incremental causal encoding/decoding and the training and
 * evaluation workflows around it.
 *
 * Conventions: every fallible call returns a past_status; on failure the
 * message is available from past_last_error() on the same thread until the
 * next call. Objects are opaque handles released with their *_free function
 * (NULL is accepted). Strings and sample buffers returned through out
 * parameters are owned by the caller and released with past_string_free /
 * past_samples_free. Token matrices are stored stream-major:
 * indices[q * frames + t].
 */
#ifndef PAST_PAST_H_
#define PAST_PAST_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define PAST_API __attribute__((visibility("default")))
#else
#define PAST_API
#endif

typedef enum past_status {
  PAST_OK = 0,
  PAST_ERR_ARGUMENT = 1,
  PAST_ERR_CONFIG = 2,
  PAST_ERR_DATA = 3,
  PAST_ERR_STATE = 4,
  PAST_ERR_IO = 5,
  PAST_ERR_TRAINING = 6,
  PAST_ERR_WAV = 7,
  PAST_ERR_CHECKPOINT = 8,
  PAST_ERR_INTERNAL = 9
} past_status;

typedef struct past_model past_model;
typedef struct past_tokens past_tokens;
typedef struct past_stream past_stream;
typedef struct past_decode_stream past_decode_stream;

/* Receives progress lines from long-running workflows. */
typedef void (*past_log_fn)(const char* line, void* user);

PAST_API const char* past_version(void);
PAST_API const char* past_status_name(past_status status);
PAST_API const char* past_last_error(void);
PAST_API void past_string_free(char* s);
PAST_API void past_samples_free(float* samples);
PAST_API void past_set_log_callback(past_log_fn fn, void* user);
/* Intra-op threads used by the tensor backend (0 leaves the default). */
PAST_API past_status past_set_num_threads(int threads);

/* ---- Configuration ---------------------------------------------------- */

/* Resolves a preset ("tiny" | "paper", or NULL for the file's preset or
 * "tiny"), an optional JSON config text and "key.path=value" overrides into
 * the full configuration JSON. Unknown keys are rejected. */
PAST_API past_status past_config_resolve(const char* preset, const char* config_json,
                                         const char* const* overrides, size_t n_overrides,
                                         char** out_json);
/* 64-bit hash of a resolved configuration, as 16 hex digits. */
PAST_API past_status past_config_hash(const char* resolved_json, char** out_hex);

/* ---- Models ----------------------------------------------------------- */

typedef struct past_model_info {
  int sample_rate;
  int hop;
  int frame_rate;
  int n_q;
  int codebook_size;
  int dim;
  int causal;
  int use_transformer;
} past_model_info;

/* Fresh model from a resolved configuration, initialized from `seed`. */
PAST_API past_status past_model_create(const char* resolved_json, uint64_t seed,
                                       past_model** out);
/* Loads a model checkpoint or a full training checkpoint. */
PAST_API past_status past_model_load(const char* path, past_model** out);
PAST_API past_status past_model_save(const past_model* model, const char* path);
PAST_API past_status past_model_info_get(const past_model* model, past_model_info* out);
PAST_API void past_model_free(past_model* model);

/* Offline tokenization of a whole signal with the first n_q streams. */
PAST_API past_status past_model_encode(past_model* model, const float* samples, size_t n,
                                       int sample_rate, int n_q, past_tokens** out);
/* Decodes with the first n_q streams of `tokens` (n_q <= 0: all). */
PAST_API past_status past_model_decode(past_model* model, const past_tokens* tokens, int n_q,
                                       float** out_samples, size_t* out_n);

/* ---- Token matrices --------------------------------------------------- */

PAST_API past_status past_tokens_create(int n_q, int frames, int codebook_size,
                                        int frame_rate, const int32_t* indices,
                                        past_tokens** out);
PAST_API past_status past_tokens_read(const char* path, past_tokens** out);
PAST_API past_status past_tokens_write(const past_tokens* tokens, const char* path);
PAST_API int past_tokens_n_q(const past_tokens* tokens);
PAST_API int past_tokens_frames(const past_tokens* tokens);
PAST_API int past_tokens_codebook_size(const past_tokens* tokens);
PAST_API int past_tokens_frame_rate(const past_tokens* tokens);
/* Borrowed pointer, valid until the handle is freed. */
PAST_API const int32_t* past_tokens_data(const past_tokens* tokens);
PAST_API void past_tokens_free(past_tokens* tokens);

/* Incremental writer for the frame-major token file ("-" = stdout). */
typedef struct past_token_writer past_token_writer;
PAST_API past_status past_token_writer_open(const char* path, int n_q, int codebook_size,
                                            int frame_rate, past_token_writer** out);
PAST_API past_status past_token_writer_append(past_token_writer* writer,
                                              const past_tokens* frames);
PAST_API past_status past_token_writer_close(past_token_writer* writer);
PAST_API void past_token_writer_free(past_token_writer* writer);

/* ---- Audio files ------------------------------------------------------ */

/* Mono PCM16 / float32 WAV. */
PAST_API past_status past_wav_read(const char* path, float** out_samples, size_t* out_n,
                                   int* out_sample_rate);
PAST_API past_status past_wav_write(const char* path, const float* samples, size_t n,
                                    int sample_rate);

/* Incremental reader over a WAV file or raw PCM16 ("-" = stdin). */
typedef struct past_audio_reader past_audio_reader;
PAST_API past_status past_audio_reader_open(const char* path, int raw_sample_rate,
                                            past_audio_reader** out);
PAST_API int past_audio_reader_sample_rate(const past_audio_reader* reader);
/* Reads up to `max` samples; *out_n = 0 at end of stream. */
PAST_API past_status past_audio_reader_read(past_audio_reader* reader, float* out, size_t max,
                                            size_t* out_n);
PAST_API void past_audio_reader_free(past_audio_reader* reader);

/* ---- Streaming (causal models only) ----------------------------------- */

/* Token frame k is emitted once samples through (k + 2) * hop - 1 have been
 * fed. Streams opened from one model are independent. */
PAST_API past_status past_stream_open(const past_model* model, int n_q, past_stream** out);
PAST_API past_status past_stream_feed(past_stream* stream, const float* samples, size_t n,
                                      past_tokens** out);
/* Zero-pads the trailing partial hop, emits the remaining frames, closes. */
PAST_API past_status past_stream_flush(past_stream* stream, past_tokens** out);
PAST_API past_status past_stream_reset(past_stream* stream);
PAST_API int64_t past_stream_frames_emitted(const past_stream* stream);
PAST_API void past_stream_free(past_stream* stream);

PAST_API past_status past_decode_stream_open(const past_model* model, past_decode_stream** out);
PAST_API past_status past_decode_stream_feed(past_decode_stream* stream,
                                             const past_tokens* tokens, float** out_samples,
                                             size_t* out_n);
PAST_API void past_decode_stream_free(past_decode_stream* stream);

/* ---- Workflows ---------------------------------------------------------
 * Each takes a resolved configuration JSON and returns a JSON report. The
 * data directory holds a corpus written by past_corpus_generate; NULL or an
 * empty string generates the synthetic corpus in memory from the config. */

PAST_API past_status past_corpus_generate(const char* resolved_json, const char* out_dir,
                                          char** report_json);
/* Trains into out_dir (resolved config, metrics.jsonl, checkpoints/,
 * model.ckpt). `resume` names a training checkpoint or is NULL. */
PAST_API past_status past_train(const char* resolved_json, const char* data_dir,
                                const char* out_dir, const char* resume, char** report_json);
/* metrics: comma list of pnmi, abx, sisnr, cer. */
PAST_API past_status past_evaluate(const char* resolved_json, const char* checkpoint,
                                   const char* data_dir, const char* metrics,
                                   char** report_json);
PAST_API past_status past_ablate(const char* resolved_json, const char* data_dir,
                                 const char* out_dir, int reuse, char** report_json);
/* Trains the token LM on first-stream tokens of the transcribed and
 * phonetic corpora, saving to lm_out. */
PAST_API past_status past_lm_train(const char* resolved_json, const char* checkpoint,
                                   const char* data_dir, const char* lm_out,
                                   char** report_json);
/* Builds word / pseudo-word pairs from the synthetic lexicon through the
 * tokenizer and writes them as a pair file. */
PAST_API past_status past_swuggy_pairs(const char* resolved_json, const char* checkpoint,
                                       const char* pairs_out, char** report_json);
/* Scores a pair file with a trained LM. */
PAST_API past_status past_swuggy(const char* lm_path, const char* pairs_path,
                                 char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* PAST_PAST_H_ */
