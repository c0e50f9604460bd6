// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "workflow/workflows.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "codec/model.h"
#include "core/errors.h"
#include "eval/evaluate.h"
#include "lm/probe.h"
#include "lm/token_lm.h"
#include "train/trainer.h"
#include "workflow/ablation.h"

namespace past {

namespace fs = std::filesystem;

std::string DescribeHash(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  PAST_REQUIRE(!ec, kIo, "cannot create directory " + dir);
}

void WriteJson(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  os << j.dump(2) << "\n";
  PAST_REQUIRE(os.good(), kIo, "cannot write " + path.string());
}

// Common report header: which config and seed produced the result.
nlohmann::json Header(const nlohmann::json& resolved, const RunConfig& cfg) {
  return {{"config_hash", DescribeHash(ConfigHash(resolved))}, {"seed", cfg.seed}};
}

void RequireFinite(double v, const std::string& what) {
  PAST_REQUIRE(std::isfinite(v), kTraining, what + " is not finite");
}

}  // namespace

SyntheticCorpora LoadCorpora(const RunConfig& cfg, const std::string& data_dir) {
  const int sr = cfg.model.sample_rate, hop = cfg.model.Hop();
  if (data_dir.empty()) return GenerateSyntheticCorpora(cfg.data, sr, hop, cfg.seed);
  const std::string manifest = (fs::path(data_dir) / "manifest.jsonl").string();
  PAST_REQUIRE(fs::exists(manifest), kIo, "no manifest.jsonl in " + data_dir);
  SyntheticCorpora out;
  out.phonetic = LoadCorpus(manifest, "phonetic", hop);
  out.transcribed = LoadCorpus(manifest, "transcribed", hop);
  out.test = LoadCorpus(manifest, "test", hop);
  return out;
}

nlohmann::json CorpusGenerate(const nlohmann::json& resolved, const std::string& out_dir) {
  const RunConfig cfg = RunConfigFromJson(resolved);
  PAST_REQUIRE(!out_dir.empty(), kArgument, "corpus-gen needs an output directory");
  EnsureDir(out_dir);
  const SyntheticCorpora data = GenerateSyntheticCorpora(
      cfg.data, cfg.model.sample_rate, cfg.model.Hop(), cfg.seed);
  WriteCorpusDir(out_dir, {&data.phonetic, &data.transcribed, &data.test}, cfg.model.Hop());
  WriteJson(fs::path(out_dir) / "config.json", resolved);
  auto seconds = [&](const Corpus& c) {
    double s = 0.0;
    for (const auto& u : c.utterances) s += u.audio.Seconds();
    return s;
  };
  nlohmann::json report = Header(resolved, cfg);
  report["out_dir"] = out_dir;
  for (const Corpus* c : {&data.phonetic, &data.transcribed, &data.test}) {
    report["corpora"][c->name] = {{"utterances", c->utterances.size()},
                                  {"seconds", seconds(*c)}};
  }
  return report;
}

nlohmann::json TrainWorkflow(const nlohmann::json& resolved, const std::string& data_dir,
                             const std::string& out_dir, const std::string& resume,
                             const LogSink& log) {
  const RunConfig cfg = RunConfigFromJson(resolved);
  PAST_REQUIRE(!out_dir.empty(), kArgument, "train needs an output directory");
  EnsureDir(out_dir);
  WriteJson(fs::path(out_dir) / "config.json", resolved);
  const SyntheticCorpora data = LoadCorpora(cfg, data_dir);
  Trainer trainer(cfg, data.phonetic, data.transcribed);
  if (!resume.empty()) trainer.LoadCheckpoint(resume);
  const int64_t start = trainer.step();
  StepRecord last;
  RunOptions run;
  run.out_dir = out_dir;
  run.on_step = [&](const StepRecord& rec) {
    last = rec;
    if (log && (rec.step % std::max(1, cfg.train.log_every) == 0)) {
      char line[160];
      std::snprintf(line, sizeof(line), "step %lld loss %.5f lr %.3g mode %s",
                    static_cast<long long>(rec.step), rec.total, rec.lr, MixModeName(rec.mode));
      log(line);
    }
  };
  trainer.Run(run);
  const std::string model_path = (fs::path(out_dir) / "model.ckpt").string();
  SaveModel(trainer.model(), model_path);

  nlohmann::json report = Header(resolved, cfg);
  report["start_step"] = start;
  report["steps"] = trainer.step();
  report["model"] = model_path;
  if (trainer.step() > start) {
    RequireFinite(last.total, "final loss");
    report["final"] = last.ToJson();
  }
  WriteJson(fs::path(out_dir) / "report.json", report);
  return report;
}

nlohmann::json EvaluateWorkflow(const nlohmann::json& resolved, const std::string& checkpoint,
                                const std::string& data_dir, const std::string& metrics) {
  const RunConfig cfg = RunConfigFromJson(resolved);
  PastModel model = LoadModel(checkpoint);
  model->eval();
  const SyntheticCorpora data = LoadCorpora(cfg, data_dir);
  const EvalReport r = Evaluate(model, data.test, ParseMetricList(metrics),
                                cfg.eval.abx_max_triplets, cfg.seed);
  nlohmann::json report = Header(resolved, cfg);
  report["checkpoint"] = checkpoint;
  report["metrics"] = r.ToJson();
  return report;
}

nlohmann::json AblateWorkflow(const nlohmann::json& resolved, const std::string& data_dir,
                              const std::string& out_dir, bool reuse, const LogSink& log) {
  const RunConfig cfg = RunConfigFromJson(resolved);
  PAST_REQUIRE(!out_dir.empty(), kArgument, "ablate needs an output directory");
  EnsureDir(out_dir);
  WriteJson(fs::path(out_dir) / "config.json", resolved);
  const SyntheticCorpora data = LoadCorpora(cfg, data_dir);
  AblationOptions opts;
  opts.out_dir = out_dir;
  opts.reuse = reuse;
  opts.verbose = static_cast<bool>(log);
  const auto results = RunAblation(cfg, data, AblationGrid(), opts);
  nlohmann::json report = Header(resolved, cfg);
  report["rows"] = nlohmann::json::array();
  for (const auto& r : results) report["rows"].push_back(r.ToJson());
  report["table"] = RenderAblationTable(results);
  return report;
}

nlohmann::json LmTrainWorkflow(const nlohmann::json& resolved, const std::string& checkpoint,
                               const std::string& data_dir, const std::string& lm_out,
                               const LogSink& log) {
  const RunConfig cfg = RunConfigFromJson(resolved);
  PAST_REQUIRE(!lm_out.empty(), kArgument, "lm-train needs an output path");
  PastModel model = LoadModel(checkpoint);
  model->eval();
  const SyntheticCorpora data = LoadCorpora(cfg, data_dir);
  const TokenCorpus corpus = FirstStreamCorpus(model, {&data.transcribed, &data.phonetic});
  double last = 0.0;
  TokenLm lm = TrainTokenLm(corpus, cfg.lm, cfg.seed, [&](const LmStepRecord& rec) {
    last = rec.loss;
    if (log && rec.step % 100 == 0) log("lm step " + std::to_string(rec.step) +
                                        " loss " + std::to_string(rec.loss));
  });
  if (cfg.lm.steps > 0) RequireFinite(last, "LM loss");
  SaveTokenLm(lm, lm_out);
  nlohmann::json report = Header(resolved, cfg);
  report["checkpoint"] = checkpoint;
  report["lm"] = lm_out;
  report["sequences"] = corpus.sequences.size();
  report["vocab_size"] = corpus.vocab_size;
  report["final_loss"] = last;
  return report;
}

nlohmann::json SwuggyPairsWorkflow(const nlohmann::json& resolved,
                                   const std::string& checkpoint, const std::string& pairs_out) {
  const RunConfig cfg = RunConfigFromJson(resolved);
  PastModel model = LoadModel(checkpoint);
  model->eval();
  const SyntheticVoice voice(cfg.data, cfg.model.sample_rate, cfg.model.Hop(), cfg.seed);
  const auto pairs = BuildLexiconPairs(model, voice, cfg.lm.renders_per_word, cfg.seed);
  WritePairFile(pairs_out, pairs);
  int inter = 0;
  for (const auto& p : pairs) inter += p.category == PairCategory::kInter;
  nlohmann::json report = Header(resolved, cfg);
  report["pairs"] = pairs_out;
  report["inter"] = inter;
  report["oov"] = static_cast<int>(pairs.size()) - inter;
  return report;
}

nlohmann::json SwuggyWorkflow(const std::string& lm_path, const std::string& pairs_path) {
  TokenLm lm = LoadTokenLm(lm_path);
  lm->eval();
  const auto pairs = ReadPairFile(pairs_path);
  PAST_REQUIRE(!pairs.empty(), kData, "pair file " + pairs_path + " is empty");
  TokenLmScorer scorer(lm);
  const SwuggyScores s = SwuggyScore(scorer, pairs);
  nlohmann::json report = {{"lm", lm_path}, {"pairs", pairs_path}};
  report["inter"] = s.inter ? nlohmann::json(*s.inter) : nlohmann::json(nullptr);
  report["oov"] = s.oov ? nlohmann::json(*s.oov) : nlohmann::json(nullptr);
  // Length-normalized variant, for diagnostics.
  double norm_hits = 0.0;
  int n_inter = 0;
  for (const auto& p : pairs) {
    if (p.category != PairCategory::kInter) continue;
    const double a = NormalizedLogLikelihood(scorer, p.word_tokens);
    const double b = NormalizedLogLikelihood(scorer, p.pseudo_tokens);
    norm_hits += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    ++n_inter;
  }
  if (n_inter > 0) report["inter_normalized"] = norm_hits / n_inter;
  return report;
}

}  // namespace past
