// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "core/config.h"
#include "eval/evaluate.h"
#include "json.hpp"
#include "train/corpus.h"

namespace past {

// One configuration of the component grid.
struct AblationRow {
  std::string name;  // e.g. "VVX": transformer, phoneme head, CTC head
  bool transformer = true;
  bool phoneme_head = true;
  bool ctc_head = true;
  bool skip_dropout = true;
};

// XXX, VXX, VVX, VXV, XVV, VVV, then VVV without skip-connection dropout.
std::vector<AblationRow> AblationGrid();

// `base` with the row's components switched off.
RunConfig ApplyAblationRow(const RunConfig& base, const AblationRow& row);

struct AblationResult {
  AblationRow row;
  EvalReport report;
  // Mean transformer share of the generator gradient norm over the 100 steps
  // ending at step 2000 (or the last 100 steps of shorter runs).
  double transformer_grad_share = 0.0;
  double final_loss = 0.0;
  std::string checkpoint;  // model checkpoint of the finished run
  uint64_t config_hash = 0;

  nlohmann::json ToJson() const;
};

struct AblationOptions {
  std::string out_dir;
  // Reuse a finished row whose result record carries the same config hash.
  bool reuse = true;
  bool verbose = false;
};

// Trains and evaluates each row on the given corpora. Writes, per row,
// <out_dir>/<name>/{config.json, metrics.jsonl, checkpoints/, model.ckpt,
// result.json}, then <out_dir>/ablation.jsonl and <out_dir>/table.txt.
std::vector<AblationResult> RunAblation(const RunConfig& base, const SyntheticCorpora& data,
                                        const std::vector<AblationRow>& rows,
                                        const AblationOptions& opts);

std::string RenderAblationTable(const std::vector<AblationResult>& results);

}  // namespace past
