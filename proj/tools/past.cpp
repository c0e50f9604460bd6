// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// past: command-line front end over libpast.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "past/past.h"

namespace {

using json = nlohmann::json;

// Carries a status out of a command so main() can turn it into an exit code.
struct Failure {
  past_status status;
  std::string message;
};

void Check(past_status s) {
  if (s != PAST_OK) throw Failure{s, past_last_error()};
}

void Fail(past_status s, const std::string& message) { throw Failure{s, message}; }

// Frees a C-API string on scope exit.
struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { past_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using Model = Handle<past_model, past_model_free>;
using Tokens = Handle<past_tokens, past_tokens_free>;
using Stream = Handle<past_stream, past_stream_free>;
using Writer = Handle<past_token_writer, past_token_writer_free>;
using Reader = Handle<past_audio_reader, past_audio_reader_free>;

struct Samples {
  float* p = nullptr;
  size_t n = 0;
  ~Samples() { past_samples_free(p); }
};

struct GlobalOptions {
  std::string config_path;
  std::string preset;
  int64_t seed = -1;
  std::vector<std::string> overrides;
  int threads = 1;
  bool quiet = false;
};

std::string ReadText(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(PAST_ERR_IO, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string DataDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("PAST_DATA_DIR");
  return env ? env : "";
}

class Session {
 public:
  explicit Session(const GlobalOptions& g) : g_(g) {
    Check(past_set_num_threads(g.threads));
    if (!g.quiet) {
      past_set_log_callback([](const char* line, void*) { std::cerr << line << "\n"; }, nullptr);
    }
  }

  // Resolves preset + file + overrides (+ --seed) once.
  const std::string& Resolved() {
    if (!resolved_.empty()) return resolved_;
    std::vector<std::string> ov = g_.overrides;
    if (g_.seed >= 0) ov.push_back("seed=" + std::to_string(g_.seed));
    std::vector<const char*> ptrs;
    for (const auto& o : ov) ptrs.push_back(o.c_str());
    const std::string file = g_.config_path.empty() ? "" : ReadText(g_.config_path);
    OwnedString out;
    Check(past_config_resolve(g_.preset.empty() ? nullptr : g_.preset.c_str(),
                              file.empty() ? nullptr : file.c_str(), ptrs.data(), ptrs.size(),
                              &out.p));
    resolved_ = out.str();
    return resolved_;
  }

  json Header() {
    OwnedString hash;
    Check(past_config_hash(Resolved().c_str(), &hash.p));
    return {{"config_hash", hash.str()}, {"seed", json::parse(Resolved())["seed"]}};
  }

  // Resolved config next to an output file, verbatim.
  void Persist(const std::string& output) {
    if (output.empty() || output == "-") return;
    std::ofstream os(output + ".config.json");
    os << Resolved() << "\n";
    if (!os) Fail(PAST_ERR_IO, "cannot write " + output + ".config.json");
  }

 private:
  GlobalOptions g_;
  std::string resolved_;
};

void PrintReport(const json& report, std::ostream& os = std::cout) { os << report.dump(2) << "\n"; }

json ParseReport(const OwnedString& s) { return json::parse(s.str()); }

void LoadModel(const std::string& path, Model& m) { Check(past_model_load(path.c_str(), &m.p)); }

past_model_info Info(const Model& m) {
  past_model_info info{};
  Check(past_model_info_get(m.p, &info));
  return info;
}

// ---- Commands

int CmdEncode(Session& s, const std::string& ckpt, const std::string& input,
              const std::string& output, int n_q) {
  Model model;
  LoadModel(ckpt, model);
  const past_model_info info = Info(model);
  if (n_q <= 0) n_q = info.n_q;
  Samples audio;
  int sr = 0;
  Check(past_wav_read(input.c_str(), &audio.p, &audio.n, &sr));
  Tokens tokens;
  Check(past_model_encode(model.p, audio.p, audio.n, sr, n_q, &tokens.p));
  Check(past_tokens_write(tokens.p, output.c_str()));
  s.Persist(output);
  const int frames = past_tokens_frames(tokens.p);
  const double seconds = static_cast<double>(audio.n) / sr;
  json r = s.Header();
  r["frames"] = frames;
  r["n_q"] = n_q;
  r["codebook_size"] = info.codebook_size;
  r["duration_seconds"] = seconds;
  r["bitrate"] = frames * n_q * std::log2(static_cast<double>(info.codebook_size)) / seconds;
  r["output"] = output;
  PrintReport(r);
  return 0;
}

int CmdDecode(Session& s, const std::string& ckpt, const std::string& input,
              const std::string& output, int n_q) {
  Model model;
  LoadModel(ckpt, model);
  const past_model_info info = Info(model);
  Tokens tokens;
  Check(past_tokens_read(input.c_str(), &tokens.p));
  Samples audio;
  Check(past_model_decode(model.p, tokens.p, n_q, &audio.p, &audio.n));
  for (size_t i = 0; i < audio.n; ++i) {
    if (!std::isfinite(audio.p[i])) Fail(PAST_ERR_DATA, "decoded audio is not finite");
  }
  Check(past_wav_write(output.c_str(), audio.p, audio.n, info.sample_rate));
  s.Persist(output);
  json r = s.Header();
  r["frames"] = past_tokens_frames(tokens.p);
  r["samples"] = audio.n;
  r["duration_seconds"] = static_cast<double>(audio.n) / info.sample_rate;
  r["output"] = output;
  PrintReport(r);
  return 0;
}

int CmdStreamEncode(Session& s, const std::string& ckpt, const std::string& input,
                    const std::string& output, int n_q, int chunk) {
  Model model;
  LoadModel(ckpt, model);
  const past_model_info info = Info(model);
  if (n_q <= 0) n_q = info.n_q;
  Reader reader;
  Check(past_audio_reader_open(input.c_str(), info.sample_rate, &reader.p));
  if (past_audio_reader_sample_rate(reader.p) != info.sample_rate) {
    Fail(PAST_ERR_CONFIG, "input sample rate " +
                              std::to_string(past_audio_reader_sample_rate(reader.p)) +
                              " does not match the model (" + std::to_string(info.sample_rate) +
                              ")");
  }
  Stream stream;
  Check(past_stream_open(model.p, n_q, &stream.p));
  Writer writer;
  Check(past_token_writer_open(output.c_str(), n_q, info.codebook_size, info.frame_rate,
                               &writer.p));
  std::vector<float> buf(static_cast<size_t>(std::max(1, chunk)));
  size_t consumed = 0;
  while (true) {
    size_t got = 0;
    Check(past_audio_reader_read(reader.p, buf.data(), buf.size(), &got));
    if (got == 0) break;
    consumed += got;
    Tokens frames;
    Check(past_stream_feed(stream.p, buf.data(), got, &frames.p));
    Check(past_token_writer_append(writer.p, frames.p));
  }
  Tokens tail;
  Check(past_stream_flush(stream.p, &tail.p));
  Check(past_token_writer_append(writer.p, tail.p));
  Check(past_token_writer_close(writer.p));
  s.Persist(output);
  json r = s.Header();
  r["samples"] = consumed;
  r["frames"] = past_stream_frames_emitted(stream.p);
  r["n_q"] = n_q;
  r["output"] = output;
  PrintReport(r, output == "-" ? std::cerr : std::cout);
  return 0;
}

int CmdTrain(Session& s, const std::string& data, const std::string& out,
             const std::string& resume) {
  OwnedString report;
  Check(past_train(s.Resolved().c_str(), DataDir(data).c_str(), out.c_str(),
                   resume.empty() ? nullptr : resume.c_str(), &report.p));
  PrintReport(ParseReport(report));
  return 0;
}

int CmdEval(Session& s, const std::string& ckpt, const std::string& data,
            const std::string& metrics, const std::string& report_path) {
  OwnedString report;
  Check(past_evaluate(s.Resolved().c_str(), ckpt.c_str(), DataDir(data).c_str(),
                      metrics.c_str(), &report.p));
  const json r = ParseReport(report);
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    os << r.dump(2) << "\n";
    if (!os) Fail(PAST_ERR_IO, "cannot write " + report_path);
    s.Persist(report_path);
  }
  PrintReport(r);
  return 0;
}

int CmdAblate(Session& s, const std::string& data, const std::string& out, bool reuse) {
  OwnedString report;
  Check(past_ablate(s.Resolved().c_str(), DataDir(data).c_str(), out.c_str(), reuse ? 1 : 0,
                    &report.p));
  const json r = ParseReport(report);
  std::cerr << r["table"].get<std::string>();
  PrintReport(r);
  return 0;
}

int CmdLmTrain(Session& s, const std::string& ckpt, const std::string& data,
               const std::string& out) {
  OwnedString report;
  Check(past_lm_train(s.Resolved().c_str(), ckpt.c_str(), DataDir(data).c_str(), out.c_str(),
                      &report.p));
  s.Persist(out);
  PrintReport(ParseReport(report));
  return 0;
}

int CmdSwuggy(Session& s, const std::string& lm, const std::string& pairs,
              const std::string& build_from) {
  json r = s.Header();
  if (!build_from.empty()) {
    OwnedString built;
    Check(past_swuggy_pairs(s.Resolved().c_str(), build_from.c_str(), pairs.c_str(), &built.p));
    r["built"] = ParseReport(built);
  }
  OwnedString report;
  Check(past_swuggy(lm.c_str(), pairs.c_str(), &report.p));
  r["scores"] = ParseReport(report);
  PrintReport(r);
  return 0;
}

int CmdCorpusGen(Session& s, const std::string& out) {
  const std::string dir = DataDir(out);
  if (dir.empty()) Fail(PAST_ERR_ARGUMENT, "corpus-gen needs --out or PAST_DATA_DIR");
  OwnedString report;
  Check(past_corpus_generate(s.Resolved().c_str(), dir.c_str(), &report.p));
  PrintReport(ParseReport(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"past: joint phonetic-acoustic speech tokenizer"};
  app.require_subcommand(1);
  GlobalOptions g;
  auto globals = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_path, "JSON config file");
    sub->add_option("--preset", g.preset, "Base preset (tiny|paper)");
    sub->add_option("--seed", g.seed, "Seed (overrides the config)");
    sub->add_option("--override", g.overrides, "key.path=value (repeatable)");
    sub->add_option("--threads", g.threads, "Intra-op threads")->capture_default_str();
    sub->add_flag("--quiet", g.quiet, "No progress output");
  };

  std::string ckpt, input, output, data, resume, metrics = "pnmi,abx,sisnr,cer", report_path,
                                                       lm, pairs, build_pairs;
  int n_q = 0, chunk = 4000;
  bool no_reuse = false;

  auto* train = app.add_subcommand("train", "Train a tokenizer");
  train->add_option("--data", data, "Corpus directory (default: $PAST_DATA_DIR or synthetic)");
  train->add_option("--out", output, "Run directory")->required();
  train->add_option("--resume", resume, "Training checkpoint to resume from");

  auto* encode = app.add_subcommand("encode", "Tokenize a 16 kHz mono WAV");
  encode->add_option("--checkpoint", ckpt)->required();
  encode->add_option("--input", input, "WAV file")->required();
  encode->add_option("--output", output, "Token file")->required();
  encode->add_option("--n-q", n_q, "Streams to keep (default: all)");

  auto* decode = app.add_subcommand("decode", "Synthesize audio from a token file");
  decode->add_option("--checkpoint", ckpt)->required();
  decode->add_option("--input", input, "Token file")->required();
  decode->add_option("--output", output, "WAV file")->required();
  decode->add_option("--n-q", n_q, "Streams to use (default: all)");

  auto* stream = app.add_subcommand("stream-encode", "Incremental tokenization (causal models)");
  stream->add_option("--checkpoint", ckpt)->required();
  stream->add_option("--input", input, "WAV or raw PCM16 file, or - for stdin")->required();
  stream->add_option("--output", output, "Token file, or - for stdout")->required();
  stream->add_option("--n-q", n_q, "Streams to keep (default: all)");
  stream->add_option("--chunk", chunk, "Samples per read")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "PNMI / ABX / SISNR / CER on the test split");
  eval->add_option("--checkpoint", ckpt)->required();
  eval->add_option("--data", data, "Corpus directory");
  eval->add_option("--metrics", metrics, "Comma list")->capture_default_str();
  eval->add_option("--report", report_path, "Also write the report here");

  auto* ablate = app.add_subcommand("ablate", "Component ablation grid");
  ablate->add_option("--data", data, "Corpus directory");
  ablate->add_option("--out", output, "Ablation directory")->required();
  ablate->add_flag("--no-reuse", no_reuse, "Retrain rows even if cached");

  auto* lm_train = app.add_subcommand("lm-train", "Train the first-stream token LM");
  lm_train->add_option("--checkpoint", ckpt, "Tokenizer checkpoint")->required();
  lm_train->add_option("--data", data, "Corpus directory");
  lm_train->add_option("--out", output, "LM checkpoint")->required();

  auto* swuggy = app.add_subcommand("swuggy", "Word / pseudo-word likelihood probe");
  swuggy->add_option("--lm", lm, "LM checkpoint")->required();
  swuggy->add_option("--pairs", pairs, "Pair file")->required();
  swuggy->add_option("--build-pairs-from", build_pairs,
                     "Tokenizer checkpoint: render the lexicon pairs into --pairs first");

  auto* corpus = app.add_subcommand("corpus-gen", "Write the synthetic corpus");
  corpus->add_option("--out", output, "Directory (default: $PAST_DATA_DIR)");

  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) globals(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    Session s(g);
    if (*train) return CmdTrain(s, data, output, resume);
    if (*encode) return CmdEncode(s, ckpt, input, output, n_q);
    if (*decode) return CmdDecode(s, ckpt, input, output, n_q);
    if (*stream) return CmdStreamEncode(s, ckpt, input, output, n_q, chunk);
    if (*eval) return CmdEval(s, ckpt, data, metrics, report_path);
    if (*ablate) return CmdAblate(s, data, output, !no_reuse);
    if (*lm_train) return CmdLmTrain(s, ckpt, data, output);
    if (*swuggy) return CmdSwuggy(s, lm, pairs, build_pairs);
    if (*corpus) return CmdCorpusGen(s, output);
  } catch (const Failure& f) {
    std::cerr << "past: " << past_status_name(f.status) << " error: " << f.message << "\n";
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "past: internal error: " << e.what() << "\n";
    return PAST_ERR_INTERNAL;
  }
  return 0;
}
