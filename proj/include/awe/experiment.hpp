// Copyright 2026 AWE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the Apache 2 License for the specific language governing permissions
// and limitations under the License.

#ifndef AWE_EXPERIMENT_HPP_
#define AWE_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "awe/abx.hpp"
#include "awe/caernn.hpp"
#include "awe/corpus.hpp"

namespace awe {

// Where a corpus comes from: a manifest on disk or a synthetic generator.
struct CorpusSource {
  std::optional<std::string> manifest;  // resolved against the config dir
  std::optional<SynthSpec> synth;
};

struct TaskSpec {
  std::string id;
  std::string kind;      // "phone", "minimal_pair", "edit_distance"
  std::string language;  // "a" or "b": which evaluation corpus to sample
  std::string item1, item2;  // phones or word types for the first two kinds
  int distance = 0;          // for "edit_distance"
  uint64_t n = 0;            // triplet count (n_max for edit distance)
  bool distinct_speakers = false;
};

struct ExperimentConfig {
  CorpusSource language_a, language_b;
  std::optional<CorpusSource> eval_a, eval_b;  // default: fresh synth sample
                                               // or the training manifest
  std::vector<std::pair<int, int>> ratios;     // (share A, share B), sum 100
  uint64_t token_budget = 0;
  uint64_t pair_budget = 0;
  ModelDims model;
  TrainConfig train;  // per-cell seed overrides train.seed
  PairOptions pair_options;
  std::vector<TaskSpec> tasks;
  bool probe = false;
  uint64_t probe_tokens_per_language = 0;  // 0 = all evaluation tokens
  std::vector<uint64_t> seeds;
  uint64_t data_seed = 0;  // corpora and task sampling; cells use `seeds`
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::string& config_dir);

// Building blocks of the config schema, reusable by single-step commands.
// Relative manifest paths resolve against config_dir; partial model/train
// objects override the defaults field by field.
CorpusSource parse_corpus_source(const nlohmann::json& j,
                                 const std::string& config_dir,
                                 const std::string& what);
ModelDims parse_model_dims(const nlohmann::json& j);
TrainConfig parse_train_config(const nlohmann::json& j);
std::vector<TaskSpec> parse_task_specs(const nlohmann::json& array);

// Samples the described task from the given corpus. The triplet stream is
// keyed by the task id, so tasks are independent of listing order.
AbxTask sample_task_spec(const TaskSpec& spec, const Corpus& corpus,
                         uint64_t data_seed);

struct ReportRow {
  int ratio_a = 0;
  int ratio_b = 0;
  std::string task_id;
  std::optional<int> edit_distance;
  uint64_t seed = 0;
  double error_rate = 0.0;
};

struct ExperimentOutcome {
  std::vector<ReportRow> rows;
  std::vector<std::string> failures;  // one line per failed cell
  int failed_cells = 0;
};

// Runs every (ratio x seed) cell, resuming from per-cell artifact files,
// then assembles report.csv, figures/, comparisons.csv and, if enabled,
// probe.csv under out_dir. Cell failures are isolated; the outcome lists
// them and the caller decides the exit status.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::string& out_dir, int jobs = 1);

// Report assembly alone: reduces whatever completed cell files exist under
// out_dir into the same report outputs, without training anything. Cells
// with missing artifacts are listed as failures and skipped.
ExperimentOutcome assemble_report(const ExperimentConfig& cfg,
                                  const std::string& out_dir);

std::string report_csv(const std::vector<ReportRow>& rows);

// figures/fig_<task>.csv for plain tasks (x = share of language A) and
// figures/fig_edit_distance.csv for distance-bucketed tasks (x = distance),
// columns ratio,x,mean_error,se,n.
void emit_figure_data(const std::vector<ReportRow>& rows,
                      const std::string& dir);

// Pairwise ratio comparisons per task over per-seed error rates.
std::string comparisons_csv(const std::vector<ReportRow>& rows,
                            uint64_t data_seed);

Corpus load_corpus_source(const CorpusSource& src, uint64_t synth_seed,
                          bool eager = false);

}  // namespace awe

#endif  // AWE_EXPERIMENT_HPP_
