// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <string>

#include "core/config.h"
#include "json.hpp"
#include "train/corpus.h"

namespace past {

// Progress sink for the long-running workflows; may be empty.
using LogSink = std::function<void(const std::string&)>;

// Corpora from a directory written by CorpusGenerate, or the synthetic
// corpora generated in memory from the config when `data_dir` is empty.
SyntheticCorpora LoadCorpora(const RunConfig& cfg, const std::string& data_dir);

// Writes the synthetic corpora and the resolved config under `out_dir`.
nlohmann::json CorpusGenerate(const nlohmann::json& resolved, const std::string& out_dir);

// Trains into `out_dir`: config.json (resolved, verbatim), metrics.jsonl,
// checkpoints/, model.ckpt and report.json.
nlohmann::json TrainWorkflow(const nlohmann::json& resolved, const std::string& data_dir,
                             const std::string& out_dir, const std::string& resume,
                             const LogSink& log);

nlohmann::json EvaluateWorkflow(const nlohmann::json& resolved, const std::string& checkpoint,
                                const std::string& data_dir, const std::string& metrics);

nlohmann::json AblateWorkflow(const nlohmann::json& resolved, const std::string& data_dir,
                              const std::string& out_dir, bool reuse, const LogSink& log);

nlohmann::json LmTrainWorkflow(const nlohmann::json& resolved, const std::string& checkpoint,
                               const std::string& data_dir, const std::string& lm_out,
                               const LogSink& log);

nlohmann::json SwuggyPairsWorkflow(const nlohmann::json& resolved,
                                   const std::string& checkpoint, const std::string& pairs_out);

nlohmann::json SwuggyWorkflow(const std::string& lm_path, const std::string& pairs_path);

// 16 lowercase hex digits.
std::string DescribeHash(uint64_t hash);

}  // namespace past
