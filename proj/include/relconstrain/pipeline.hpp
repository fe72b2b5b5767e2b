// Copyright 2026 The relconstrain Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relconstrain/constraints.hpp"
#include "relconstrain/decoder.hpp"
#include "relconstrain/eval.hpp"
#include "relconstrain/lm.hpp"
#include "relconstrain/saliency.hpp"
#include "relconstrain/text.hpp"

namespace relconstrain {

// Reserved separator surface between query and summary in LM training
// sequences and decoding prefixes. The tokenizer can never produce it.
inline constexpr const char* kSepSurface = "<sep>";

struct QfsExample {
  std::string id;
  std::string query;
  std::string document;
  std::string summary;  // reference
};

// JSONL, one example per line with string fields id/query/document/summary.
// Errors carry 1-based line numbers ("line 3: missing field document");
// duplicate ids are rejected. An empty file yields an empty list.
std::vector<QfsExample> load_dataset(const std::string& path);

enum class ConstraintSource { kQuery, kDocument, kBoth };

ConstraintSource constraint_source_from_string(const std::string& name);
std::string to_string(ConstraintSource source);

// Saliency-driven constraint construction for one example: attribute the
// scorer logit over the chosen token source, keep the top-k content tokens,
// expand word forms into a CNF. Documents are truncated to max_doc_tokens
// tokens (a warning goes to stderr).
Cnf constrain_example(const QfsExample& ex, const ScorerSpec& scorer, int ig_steps,
                      const StopList& stops, const MorphologyTable& morph, int k,
                      ConstraintSource source, int max_doc_tokens = 512);

struct PipelineConfig {
  std::string train_path;
  std::string test_path;
  std::string output_dir;

  std::string lm_path;  // when set, load this model instead of training
  int lm_order = 3;
  double lm_k = 1.0;

  std::string scorer_path;  // optional RELCONSTRAIN-SCORER file
  int embed_dim = 16;
  std::uint64_t seed = 42;
  int ig_steps = 10;

  std::string stopword_path;    // empty -> built-in default list
  std::string morphology_path;  // empty -> rules only

  int k_constraints = 3;
  ConstraintSource source = ConstraintSource::kDocument;
  int max_doc_tokens = 512;

  DecoderConfig decoder;
  bool baseline = true;  // also decode without constraints
};

struct ExampleReport {
  std::string id;
  std::string prediction;
  std::vector<std::vector<std::string>> constraints;  // clause -> literal strings
  bool satisfied = false;   // full re-scan of the constrained output
  double cum_logprob = 0.0;
  RougeScores rouge;

  std::string baseline_prediction;  // filled when the baseline runs
  bool baseline_satisfied = false;
  double baseline_cum_logprob = 0.0;
  RougeScores baseline_rouge;
};

struct PipelineReport {
  int n_examples = 0;
  RougeScores mean;  // constrained run, averaged over examples
  double satisfaction_rate = 0.0;
  bool has_baseline = false;
  RougeScores baseline_mean;
  double baseline_satisfaction_rate = 0.0;
  PairedTestResult significance_r1, significance_r2, significance_rl;  // on per-example F1
  std::vector<ExampleReport> examples;
};

// End to end: train (or load) the LM on the train split, build constraints
// for every test example, decode with and (when cfg.baseline) without them,
// score ROUGE, and write predictions.jsonl, predictions_unconstrained.jsonl
// and report.json under cfg.output_dir. Deterministic for a fixed config:
// reruns produce byte-identical files. Component errors are rethrown with
// the offending example id prefixed.
PipelineReport run_pipeline(const PipelineConfig& cfg);

// Shared by run_pipeline and the CLI: report serialization.
std::string report_to_json(const PipelineReport& report);

// The `evaluate` subcommand: score predictions ({"id","prediction"} JSONL)
// against references ({"id","summary"} or {"id","reference"} JSONL); when
// compare_path is non-empty, add paired t-tests per metric against a second
// predictions file. Returns the JSON report text.
std::string evaluate_files(const std::string& predictions_path, const std::string& references_path,
                           const std::string& compare_path = "");

}  // namespace relconstrain
