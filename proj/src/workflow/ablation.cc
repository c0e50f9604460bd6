// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "workflow/ablation.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "codec/model.h"
#include "core/errors.h"
#include "train/trainer.h"

namespace past {

std::vector<AblationRow> AblationGrid() {
  return {
      {"XXX", false, false, false, true}, {"VXX", true, false, false, true},
      {"VVX", true, true, false, true},   {"VXV", true, false, true, true},
      {"XVV", false, true, true, true},   {"VVV", true, true, true, true},
      {"VVV-nodrop", true, true, true, false},
  };
}

RunConfig ApplyAblationRow(const RunConfig& base, const AblationRow& row) {
  RunConfig cfg = base;
  cfg.model.use_transformer = row.transformer;
  if (!row.phoneme_head) cfg.loss.lambda_phn = 0.0;
  if (!row.ctc_head) cfg.loss.lambda_ctc = 0.0;
  if (!row.skip_dropout) {
    cfg.model.p_trns_only = 0.0;
    cfg.model.p_skip_only = 0.0;
  }
  return cfg;
}

nlohmann::json AblationResult::ToJson() const {
  return {{"row", row.name},
          {"transformer", row.transformer},
          {"phoneme_head", row.phoneme_head},
          {"ctc_head", row.ctc_head},
          {"skip_dropout", row.skip_dropout},
          {"metrics", report.ToJson()},
          {"transformer_grad_share", transformer_grad_share},
          {"final_loss", final_loss},
          {"checkpoint", checkpoint},
          {"config_hash", config_hash}};
}

namespace {

std::optional<double> OptionalField(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j[key].get<double>();
}

std::optional<AblationResult> LoadCachedResult(const std::filesystem::path& path,
                                               const AblationRow& row, uint64_t hash) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(is);
    if (j.at("config_hash").get<uint64_t>() != hash) return std::nullopt;
    // The model sits next to the record; the stored path may be relative to
    // whichever directory the run started in.
    const auto ckpt = std::filesystem::absolute(path.parent_path() / "model.ckpt");
    if (!std::filesystem::exists(ckpt)) return std::nullopt;
    AblationResult r;
    r.row = row;
    r.config_hash = hash;
    r.transformer_grad_share = j.at("transformer_grad_share").get<double>();
    r.final_loss = j.at("final_loss").get<double>();
    r.checkpoint = ckpt.string();
    const auto& m = j.at("metrics");
    r.report.pnmi = OptionalField(m, "pnmi");
    r.report.abx_within = OptionalField(m, "abx_within");
    r.report.abx_across = OptionalField(m, "abx_across");
    r.report.sisnr = OptionalField(m, "sisnr");
    r.report.cer = OptionalField(m, "cer");
    r.report.wer = OptionalField(m, "wer");
    r.report.utterances = m.value("utterances", 0);
    return r;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<AblationResult> RunAblation(const RunConfig& base, const SyntheticCorpora& data,
                                        const std::vector<AblationRow>& rows,
                                        const AblationOptions& opts) {
  namespace fs = std::filesystem;
  PAST_REQUIRE(!opts.out_dir.empty(), kArgument, "ablation needs an output directory");
  std::vector<AblationResult> results;
  for (const AblationRow& row : rows) {
    const RunConfig cfg = ApplyAblationRow(base, row);
    const nlohmann::json resolved = RunConfigToJson(cfg);
    const uint64_t hash = ConfigHash(resolved);
    const fs::path dir = fs::path(opts.out_dir) / row.name;
    const fs::path result_path = dir / "result.json";
    if (opts.reuse) {
      if (auto cached = LoadCachedResult(result_path, row, hash)) {
        if (opts.verbose) std::cerr << "[ablate] " << row.name << ": reusing " << dir << "\n";
        results.push_back(*cached);
        continue;
      }
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    PAST_REQUIRE(!ec, kIo, "cannot create " + dir.string());
    {
      std::ofstream os(dir / "config.json");
      os << resolved.dump(2) << "\n";
    }

    Trainer trainer(cfg, data.phonetic, data.transcribed);
    const int64_t window_end = std::min<int64_t>(2000, cfg.train.steps);
    const int64_t window_begin = std::max<int64_t>(0, window_end - 100);
    double share_sum = 0.0, last_loss = 0.0;
    int share_n = 0;
    RunOptions run;
    run.out_dir = dir.string();
    run.on_step = [&](const StepRecord& rec) {
      if (rec.step >= window_begin && rec.step < window_end) {
        share_sum += rec.transformer_grad_share;
        ++share_n;
      }
      last_loss = rec.total;
      if (opts.verbose && rec.step % 500 == 0) {
        std::cerr << "[ablate] " << row.name << " step " << rec.step << " loss " << rec.total
                  << " (" << rec.seconds << " s/step)\n";
      }
    };
    trainer.Run(run);

    AblationResult r;
    r.row = row;
    r.config_hash = hash;
    r.transformer_grad_share = share_n ? share_sum / share_n : 0.0;
    r.final_loss = last_loss;
    r.checkpoint = fs::absolute(dir / "model.ckpt").string();
    SaveModel(trainer.model(), r.checkpoint);
    r.report = Evaluate(trainer.model(), data.test, {"pnmi", "abx", "sisnr", "cer"},
                        cfg.eval.abx_max_triplets, cfg.seed);
    {
      std::ofstream os(result_path);
      os << r.ToJson().dump(2) << "\n";
      PAST_REQUIRE(os.good(), kIo, "cannot write " + result_path.string());
    }
    if (opts.verbose) std::cerr << "[ablate] " << row.name << ": " << r.ToJson().dump() << "\n";
    results.push_back(r);
  }
  std::ofstream jl(fs::path(opts.out_dir) / "ablation.jsonl");
  for (const auto& r : results) jl << r.ToJson().dump() << "\n";
  std::ofstream table(fs::path(opts.out_dir) / "table.txt");
  table << RenderAblationTable(results);
  return results;
}

std::string RenderAblationTable(const std::vector<AblationResult>& results) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %4s %4s %4s %5s %8s %9s %9s %8s %8s %10s\n", "row",
                "trns", "phn", "ctc", "drop", "pnmi", "abx_in", "abx_out", "sisnr", "cer",
                "trns_grad");
  os << line;
  auto fmt = [](const std::optional<double>& v, double scale) {
    char buf[32];
    if (v) {
      std::snprintf(buf, sizeof(buf), "%.3f", *v * scale);
    } else {
      std::snprintf(buf, sizeof(buf), "-");
    }
    return std::string(buf);
  };
  for (const auto& r : results) {
    std::snprintf(line, sizeof(line), "%-12s %4s %4s %4s %5s %8s %9s %9s %8s %8s %10.3f\n",
                  r.row.name.c_str(), r.row.transformer ? "V" : "X",
                  r.row.phoneme_head ? "V" : "X", r.row.ctc_head ? "V" : "X",
                  r.row.skip_dropout ? "on" : "off", fmt(r.report.pnmi, 1).c_str(),
                  fmt(r.report.abx_within, 100).c_str(), fmt(r.report.abx_across, 100).c_str(),
                  fmt(r.report.sisnr, 1).c_str(), fmt(r.report.cer, 100).c_str(),
                  r.transformer_grad_share);
    os << line;
  }
  return os.str();
}

}  // namespace past
