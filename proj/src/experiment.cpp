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

#include "awe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "awe/probes.hpp"

namespace awe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string ratio_label(int a, int b) {
  return std::to_string(a) + ":" + std::to_string(b);
}

bool safe_id(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

}  // namespace

CorpusSource parse_corpus_source(const json& j, const std::string& config_dir,
                                 const std::string& what) {
  require(j.is_object(), what + " must be an object");
  require(j.contains("manifest") != j.contains("synth_spec"),
          what + " needs exactly one of 'manifest' or 'synth_spec'");
  CorpusSource src;
  if (j.contains("manifest")) {
    fs::path p = j.at("manifest").get<std::string>();
    if (p.is_relative()) p = fs::path(config_dir) / p;
    src.manifest = p.string();
  } else {
    src.synth = parse_synth_spec(j.at("synth_spec"));
  }
  return src;
}

ModelDims parse_model_dims(const json& m) {
  ModelDims dims;
  try {
    dims.enc_layers = m.value("enc_layers", dims.enc_layers);
    dims.enc_units = m.value("enc_units", dims.enc_units);
    dims.embed_dim = m.value("embed_dim", dims.embed_dim);
    dims.dec_layers = m.value("dec_layers", dims.dec_layers);
    dims.dec_units = m.value("dec_units", dims.dec_units);
  } catch (const json::exception& e) {
    fail(std::string("model config: ") + e.what());
  }
  return dims;
}

TrainConfig parse_train_config(const json& t) {
  TrainConfig cfg;
  try {
    cfg.pretrain_epochs = t.value("pretrain_epochs", cfg.pretrain_epochs);
    cfg.train_epochs = t.value("train_epochs", cfg.train_epochs);
    cfg.learning_rate = t.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = t.value("batch_size", cfg.batch_size);
    cfg.gradient_clip_norm =
        t.value("gradient_clip_norm", cfg.gradient_clip_norm);
  } catch (const json::exception& e) {
    fail(std::string("train config: ") + e.what());
  }
  return cfg;
}

std::vector<TaskSpec> parse_task_specs(const json& array) {
  std::vector<TaskSpec> specs;
  std::set<std::string> ids;
  try {
    for (const json& t : array) {
      TaskSpec spec;
      spec.id = t.at("id").get<std::string>();
      require(safe_id(spec.id), "task id '" + spec.id +
                                    "' must be non-empty [A-Za-z0-9_-]");
      require(ids.insert(spec.id).second,
              "duplicate task id '" + spec.id + "'");
      spec.kind = t.at("kind").get<std::string>();
      spec.language = t.value("language", "a");
      require(spec.language == "a" || spec.language == "b",
              "task '" + spec.id + "': language must be 'a' or 'b'");
      spec.distinct_speakers = t.value("distinct_speakers", false);
      if (spec.kind == "phone" || spec.kind == "minimal_pair") {
        spec.item1 = t.at("item1").get<std::string>();
        spec.item2 = t.at("item2").get<std::string>();
        spec.n = t.at("n").get<uint64_t>();
      } else if (spec.kind == "edit_distance") {
        spec.distance = t.at("distance").get<int>();
        spec.n = t.at("n").get<uint64_t>();
      } else {
        fail("task '" + spec.id + "': unknown kind '" + spec.kind + "'");
      }
      specs.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    fail(std::string("task config: ") + e.what());
  }
  return specs;
}

namespace {

// Writes content to path via a temp file so a crash never leaves a partial
// artifact behind for a later resume to trip over.
void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    require(os.good(), "cannot open " + tmp.string() + " for writing");
    os << content;
    require(os.good(), "failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

Corpus load_corpus_source(const CorpusSource& src, uint64_t synth_seed,
                          bool eager) {
  if (src.manifest.has_value()) return load_manifest(*src.manifest, eager);
  return synth_corpus(*src.synth, synth_seed);
}

ExperimentConfig parse_experiment_config(const json& j,
                                         const std::string& config_dir) {
  ExperimentConfig cfg;
  try {
    cfg.language_a =
        parse_corpus_source(j.at("language_a"), config_dir, "language_a");
    cfg.language_b =
        parse_corpus_source(j.at("language_b"), config_dir, "language_b");
    if (j.contains("eval_a"))
      cfg.eval_a = parse_corpus_source(j.at("eval_a"), config_dir, "eval_a");
    if (j.contains("eval_b"))
      cfg.eval_b = parse_corpus_source(j.at("eval_b"), config_dir, "eval_b");

    require(j.contains("ratios") && j.at("ratios").is_array() &&
                !j.at("ratios").empty(),
            "experiment config needs a non-empty 'ratios' array");
    for (const json& r : j.at("ratios")) {
      require(r.is_array() && r.size() == 2,
              "each ratio must be a [share_a, share_b] pair");
      const int a = r[0].get<int>(), b = r[1].get<int>();
      require(a >= 0 && b >= 0 && a + b == 100,
              "ratio " + ratio_label(a, b) + " does not sum to 100");
      cfg.ratios.emplace_back(a, b);
    }

    cfg.token_budget = j.at("token_budget").get<uint64_t>();
    cfg.pair_budget = j.at("pair_budget").get<uint64_t>();
    require(cfg.token_budget > 0 && cfg.pair_budget > 0,
            "budgets must be positive");

    if (j.contains("model")) cfg.model = parse_model_dims(j.at("model"));
    if (j.contains("train")) cfg.train = parse_train_config(j.at("train"));
    cfg.pair_options.cross_speaker_only =
        j.contains("pair_options")
            ? j.at("pair_options").value("cross_speaker_only", false)
            : false;
    cfg.tasks = parse_task_specs(j.value("tasks", json::array()));

    cfg.probe = j.value("probe", false);
    cfg.probe_tokens_per_language =
        j.value("probe_tokens_per_language", uint64_t{0});
    require(j.contains("seeds") && j.at("seeds").is_array() &&
                !j.at("seeds").empty(),
            "experiment config needs a non-empty 'seeds' array");
    for (const json& s : j.at("seeds")) cfg.seeds.push_back(s.get<uint64_t>());
    cfg.data_seed = j.value("data_seed", uint64_t{0});
  } catch (const json::exception& e) {
    fail(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

AbxTask sample_task_spec(const TaskSpec& spec, const Corpus& corpus,
                         uint64_t data_seed) {
  SamplerOptions opts;
  opts.distinct_speakers = spec.distinct_speakers;
  const uint64_t seed = mix_seed(data_seed, "task." + spec.id);
  AbxTask task;
  if (spec.kind == "phone") {
    task = sample_phone_triplets(corpus, spec.item1, spec.item2, spec.n, seed,
                                 opts);
  } else if (spec.kind == "minimal_pair") {
    task = sample_minimal_pair_triplets(corpus, spec.item1, spec.item2, spec.n,
                                        seed, opts);
  } else {
    task = sample_edit_distance_triplets(corpus, spec.distance, spec.n, seed,
                                         opts);
  }
  task.name = spec.id;
  return task;
}

namespace {

struct CellRef {
  size_t ratio_idx = 0;
  size_t seed_idx = 0;
};

std::string cell_dir_name(const ExperimentConfig& cfg, const CellRef& cell) {
  const auto [a, b] = cfg.ratios[cell.ratio_idx];
  return "r" + std::to_string(a) + "_" + std::to_string(b) + "_s" +
         std::to_string(cfg.seeds[cell.seed_idx]);
}

std::vector<size_t> probe_token_subset(const Corpus& corpus, uint64_t cap) {
  size_t n = corpus.tokens.size();
  if (cap > 0) n = std::min<size_t>(n, cap);
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// One (ratio x seed) cell: mix the training set, pretrain, train, score
// every task, optionally run the probe. Every stage resumes from its file.
void run_cell(const ExperimentConfig& cfg, const CellRef& cell,
              const Corpus& corpus_a, const Corpus& corpus_b,
              const Corpus& eval_a, const Corpus& eval_b,
              const std::vector<AbxTask>& tasks, const fs::path& dir) {
  fs::create_directories(dir);
  const auto [share_a, share_b] = cfg.ratios[cell.ratio_idx];
  const uint64_t seed = cfg.seeds[cell.seed_idx];

  const fs::path model_path = dir / "model.awem";
  const fs::path pretrain_path = dir / "pretrain.awem";

  CaeRnn<float> net(cfg.model, seed);
  if (fs::exists(model_path)) {
    net = load_checkpoint(model_path.string());
  } else {
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    TrainingSet ts = mix_bilingual(
        corpus_a, corpus_b, {share_a, share_b},
        static_cast<int64_t>(cfg.token_budget),
        static_cast<int64_t>(cfg.pair_budget), seed, cfg.pair_options);

    std::vector<EpochStat> log;
    if (fs::exists(pretrain_path)) {
      net = load_checkpoint(pretrain_path.string());
      require(net.dims() == cfg.model,
              "pretrain checkpoint dims do not match the config");
    } else {
      net = pretrain_autoencoder(cfg.model, ts, tc, &log);
      save_checkpoint((pretrain_path.string() + ".tmp"), net);
      fs::rename(pretrain_path.string() + ".tmp", pretrain_path);
    }
    train_cae(net, ts, tc, &log);
    save_checkpoint((model_path.string() + ".tmp"), net);
    fs::rename(model_path.string() + ".tmp", model_path);

    json jl = json::array();
    for (const EpochStat& e : log)
      jl.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}});
    write_file_atomic(dir / "train_log.json", jl.dump(2) + "\n");
  }

  Embedder embedder = [&net](const FeatureMatrix& x) {
    return embed_token(net, x);
  };

  for (const AbxTask& task : tasks) {
    const fs::path out = dir / ("task_" + task.name + ".json");
    if (fs::exists(out)) continue;
    AbxResult res = abx_error_rate(task, embedder);
    write_file_atomic(out, abx_result_json(res) + "\n");
  }

  if (cfg.probe) {
    const fs::path out = dir / "probe.json";
    if (!fs::exists(out)) {
      LabeledEmbeddingSet set;
      set.split_seed = seed;
      for (const Corpus* c : {&eval_a, &eval_b}) {
        for (size_t i : probe_token_subset(*c, cfg.probe_tokens_per_language)) {
          set.embeddings.push_back(embed_token(net, c->tokens[i].features()));
          set.labels.push_back(c->language);
        }
      }
      ProbeResult pr = train_language_probe(set);
      write_file_atomic(out, probe_result_json(pr) + "\n");
    }
  }
}

struct ProbeAgg {
  std::string rows = "ratio,seed,accuracy,n_train,n_test\n";
  std::map<std::pair<int, int>, std::vector<double>> groups;
};

// The per-cell files the report needs; training artifacts are not required.
std::vector<fs::path> required_cell_files(const ExperimentConfig& cfg,
                                          const fs::path& dir) {
  std::vector<fs::path> files;
  for (const TaskSpec& spec : cfg.tasks)
    files.push_back(dir / ("task_" + spec.id + ".json"));
  if (cfg.probe) files.push_back(dir / "probe.json");
  return files;
}

// Reads one completed cell's result files into the report accumulators.
void collect_cell(const ExperimentConfig& cfg, const CellRef& cell,
                  const fs::path& dir, std::vector<ReportRow>& rows,
                  ProbeAgg& probe) {
  const auto [a, b] = cfg.ratios[cell.ratio_idx];
  const uint64_t seed = cfg.seeds[cell.seed_idx];
  for (const TaskSpec& spec : cfg.tasks) {
    const json j = json::parse(read_file(dir / ("task_" + spec.id + ".json")));
    ReportRow row;
    row.ratio_a = a;
    row.ratio_b = b;
    row.task_id = spec.id;
    if (spec.kind == "edit_distance") row.edit_distance = spec.distance;
    row.seed = seed;
    row.error_rate = j.at("error_rate").get<double>();
    rows.push_back(std::move(row));
  }
  if (cfg.probe) {
    const json j = json::parse(read_file(dir / "probe.json"));
    const double acc = j.at("accuracy").get<double>();
    probe.rows += ratio_label(a, b) + "," + std::to_string(seed) + "," +
                  fmt6(acc) + "," +
                  std::to_string(j.at("n_train").get<uint64_t>()) + "," +
                  std::to_string(j.at("n_test").get<uint64_t>()) + "\n";
    probe.groups[{a, b}].push_back(acc);
  }
}

void write_report_outputs(const ExperimentConfig& cfg, const fs::path& out,
                          const std::vector<ReportRow>& rows,
                          const ProbeAgg& probe) {
  if (!rows.empty()) {
    write_file_atomic(out / "report.csv", report_csv(rows));
    emit_figure_data(rows, (out / "figures").string());
    write_file_atomic(out / "comparisons.csv",
                      comparisons_csv(rows, cfg.data_seed));
  }
  if (cfg.probe && !probe.groups.empty()) {
    write_file_atomic(out / "probe.csv", probe.rows);
    std::string summary = "ratio,x,mean_accuracy,se,n\n";
    for (const auto& [ratio, accs] : probe.groups) {
      const MeanSe m = mean_se(accs);
      summary += ratio_label(ratio.first, ratio.second) + "," +
                 std::to_string(ratio.first) + "," + fmt6(m.mean) + "," +
                 fmt6(m.se) + "," + std::to_string(m.n) + "\n";
    }
    write_file_atomic(out / "probe_summary.csv", summary);
  }
}

std::vector<CellRef> cell_grid(const ExperimentConfig& cfg) {
  std::vector<CellRef> cells;
  for (size_t r = 0; r < cfg.ratios.size(); ++r)
    for (size_t s = 0; s < cfg.seeds.size(); ++s) cells.push_back({r, s});
  return cells;
}

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "ratio,task_id,edit_distance,seed,error_rate\n";
  for (const ReportRow& r : rows) {
    out += ratio_label(r.ratio_a, r.ratio_b) + "," + r.task_id + ",";
    if (r.edit_distance.has_value()) out += std::to_string(*r.edit_distance);
    out += "," + std::to_string(r.seed) + "," + fmt6(r.error_rate) + "\n";
  }
  return out;
}

void emit_figure_data(const std::vector<ReportRow>& rows,
                      const std::string& dir) {
  require(!rows.empty(), "no report rows to aggregate");
  fs::create_directories(dir);

  // Plain tasks: one file per task, x is the share of language A.
  std::map<std::string, std::map<std::pair<int, int>, std::vector<double>>>
      plain;
  // Distance-bucketed tasks: one shared file, x is the edit distance.
  std::map<std::pair<int, int>, std::map<int, std::vector<double>>> dist;
  for (const ReportRow& r : rows) {
    if (r.edit_distance.has_value()) {
      dist[{r.ratio_a, r.ratio_b}][*r.edit_distance].push_back(r.error_rate);
    } else {
      plain[r.task_id][{r.ratio_a, r.ratio_b}].push_back(r.error_rate);
    }
  }

  const std::string header = "ratio,x,mean_error,se,n\n";
  for (const auto& [task, groups] : plain) {
    std::string out = header;
    for (const auto& [ratio, errs] : groups) {
      const MeanSe m = mean_se(errs);
      out += ratio_label(ratio.first, ratio.second) + "," +
             std::to_string(ratio.first) + "," + fmt6(m.mean) + "," +
             fmt6(m.se) + "," + std::to_string(m.n) + "\n";
    }
    write_file_atomic(fs::path(dir) / ("fig_" + task + ".csv"), out);
  }
  if (!dist.empty()) {
    std::string out = header;
    for (const auto& [ratio, by_d] : dist) {
      for (const auto& [d, errs] : by_d) {
        const MeanSe m = mean_se(errs);
        out += ratio_label(ratio.first, ratio.second) + "," +
               std::to_string(d) + "," + fmt6(m.mean) + "," + fmt6(m.se) +
               "," + std::to_string(m.n) + "\n";
      }
    }
    write_file_atomic(fs::path(dir) / "fig_edit_distance.csv", out);
  }
}

std::string comparisons_csv(const std::vector<ReportRow>& rows,
                            uint64_t data_seed) {
  // Per task, compare per-seed error rates between every pair of ratios.
  std::map<std::string, std::map<std::pair<int, int>, std::vector<double>>>
      groups;
  for (const ReportRow& r : rows)
    groups[r.task_id][{r.ratio_a, r.ratio_b}].push_back(r.error_rate);

  std::string out =
      "task_id,ratio_1,ratio_2,n_1,n_2,observed_diff,p_value,degenerate,"
      "method\n";
  for (const auto& [task, by_ratio] : groups) {
    std::vector<std::pair<int, int>> ratios;
    for (const auto& [ratio, errs] : by_ratio) ratios.push_back(ratio);
    for (size_t i = 0; i < ratios.size(); ++i) {
      for (size_t k = i + 1; k < ratios.size(); ++k) {
        const auto& ga = by_ratio.at(ratios[i]);
        const auto& gb = by_ratio.at(ratios[k]);
        const std::string l1 = ratio_label(ratios[i].first, ratios[i].second);
        const std::string l2 = ratio_label(ratios[k].first, ratios[k].second);
        const PermutationResult pr = permutation_test(
            ga, gb, 10000,
            mix_seed(data_seed, "comparison." + task + "." + l1 + "|" + l2));
        out += task + "," + l1 + "," + l2 + "," + std::to_string(ga.size()) +
               "," + std::to_string(gb.size()) + "," + fmt6(pr.observed) +
               "," + fmt6(pr.p) + "," + (pr.degenerate ? "1" : "0") +
               ",permutation_substitute_for_mixed_effects\n";
      }
    }
  }
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::string& out_dir, int jobs) {
  require(!cfg.seeds.empty() && !cfg.ratios.empty(),
          "experiment config has no cells");
  const fs::path out(out_dir);
  fs::create_directories(out / "cells");

  const Corpus corpus_a =
      load_corpus_source(cfg.language_a, mix_seed(cfg.data_seed, "corpus.a"));
  const Corpus corpus_b =
      load_corpus_source(cfg.language_b, mix_seed(cfg.data_seed, "corpus.b"));

  // Evaluation corpora: explicit source, else a fresh synthetic sample,
  // else the training manifest itself.
  auto eval_of = [&](const std::optional<CorpusSource>& src,
                     const CorpusSource& train_src,
                     const std::string& tag) -> Corpus {
    if (src.has_value())
      return load_corpus_source(*src, mix_seed(cfg.data_seed, tag));
    if (train_src.synth.has_value())
      return load_corpus_source(train_src, mix_seed(cfg.data_seed, tag));
    return load_corpus_source(train_src, 0);
  };
  const Corpus eval_a = eval_of(cfg.eval_a, cfg.language_a, "eval.a");
  const Corpus eval_b = eval_of(cfg.eval_b, cfg.language_b, "eval.b");

  // Tasks are sampled once; every cell scores the same triplets.
  std::vector<AbxTask> tasks;
  for (const TaskSpec& spec : cfg.tasks) {
    const Corpus& c = (spec.language == "a") ? eval_a : eval_b;
    tasks.push_back(sample_task_spec(spec, c, cfg.data_seed));
    const AbxTask& task = tasks.back();
    fs::create_directories(out / "tasks");
    write_triplets((out / "tasks" / (task.name + ".triplets.jsonl")).string(),
                   task);
    if (!task.notice.empty())
      write_file_atomic(out / "tasks" / (task.name + ".notice.txt"),
                        task.notice + "\n");
  }

  const std::vector<CellRef> cells = cell_grid(cfg);
  std::vector<std::string> cell_errors(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const fs::path dir = out / "cells" / cell_dir_name(cfg, cells[i]);
      try {
        run_cell(cfg, cells[i], corpus_a, corpus_b, eval_a, eval_b, tasks,
                 dir);
      } catch (const std::exception& e) {
        cell_errors[i] = e.what();
        try {
          fs::create_directories(dir);
          write_file_atomic(dir / "error.txt", std::string(e.what()) + "\n");
        } catch (...) {
        }
      }
    }
  };
  const int n_workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  // Report assembly: deterministic walk over completed cells.
  ExperimentOutcome outcome;
  ProbeAgg probe;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (!cell_errors[i].empty()) {
      ++outcome.failed_cells;
      outcome.failures.push_back("cell " + cell_dir_name(cfg, cells[i]) +
                                 ": " + cell_errors[i]);
      continue;
    }
    collect_cell(cfg, cells[i], out / "cells" / cell_dir_name(cfg, cells[i]),
                 outcome.rows, probe);
  }
  write_report_outputs(cfg, out, outcome.rows, probe);
  return outcome;
}

ExperimentOutcome assemble_report(const ExperimentConfig& cfg,
                                  const std::string& out_dir) {
  const fs::path out(out_dir);
  ExperimentOutcome outcome;
  ProbeAgg probe;
  for (const CellRef& cell : cell_grid(cfg)) {
    const fs::path dir = out / "cells" / cell_dir_name(cfg, cell);
    std::string missing;
    for (const fs::path& f : required_cell_files(cfg, dir)) {
      if (!fs::exists(f)) {
        missing = f.filename().string();
        break;
      }
    }
    if (!missing.empty()) {
      ++outcome.failed_cells;
      outcome.failures.push_back("cell " + cell_dir_name(cfg, cell) +
                                 ": incomplete, missing " + missing);
      continue;
    }
    collect_cell(cfg, cell, dir, outcome.rows, probe);
  }
  write_report_outputs(cfg, out, outcome.rows, probe);
  return outcome;
}

}  // namespace awe
