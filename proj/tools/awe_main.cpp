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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "awe/abx.hpp"
#include "awe/caernn.hpp"
#include "awe/corpus.hpp"
#include "awe/experiment.hpp"
#include "awe/io.hpp"
#include "awe/probes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  int jobs = 1;
  bool eager_features = false;
  bool cross_speaker_only = false;
  bool distinct_speakers = false;

  std::string config_dir() const {
    const std::string dir = fs::path(config_path).parent_path().string();
    return dir.empty() ? "." : dir;
  }
};

json load_config(const std::string& path) {
  awe::require(!path.empty(), "this subcommand needs --config PATH");
  std::ifstream is(path);
  awe::require(is.good(), "cannot open config " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    awe::fail("config " + path + ": " + e.what());
  }
}

std::string resolve_path(const std::string& p, const std::string& config_dir) {
  fs::path path(p);
  if (path.is_relative()) path = fs::path(config_dir) / path;
  return path.string();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  awe::require(os.good(), "cannot open " + path.string() + " for writing");
  os << content;
  awe::require(os.good(), "failed writing " + path.string());
}

std::string epoch_log_json(const std::vector<awe::EpochStat>& log) {
  json j = json::array();
  for (const awe::EpochStat& e : log)
    j.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}});
  return j.dump(2) + "\n";
}

awe::PairOptions pair_options_of(const json& cfg, const GlobalArgs& args) {
  awe::PairOptions opts;
  opts.cross_speaker_only =
      args.cross_speaker_only ||
      (cfg.contains("pair_options") &&
       cfg.at("pair_options").value("cross_speaker_only", false));
  return opts;
}

// synth: config is a synthesis spec; writes a manifest plus feature files.
int cmd_synth(const GlobalArgs& args) {
  const awe::SynthSpec spec = awe::parse_synth_spec(load_config(args.config_path));
  const awe::Corpus corpus = awe::synth_corpus(spec, args.seed);
  fs::create_directories(args.out_dir);
  const fs::path manifest = fs::path(args.out_dir) / "manifest.jsonl";
  awe::write_manifest(corpus, manifest.string(),
                      (fs::path(args.out_dir) / "features").string());
  std::printf("synth: %zu tokens, %s, language %s -> %s\n",
              corpus.tokens.size(), corpus.total_duration_hhmm().c_str(),
              corpus.language.c_str(), manifest.string().c_str());
  return 0;
}

// prepare: corpora -> a training token manifest plus a pair list. With one
// corpus it selects the most frequent types; with two it ratio-mixes them.
int cmd_prepare(const GlobalArgs& args) {
  const json cfg = load_config(args.config_path);
  const std::string dir = args.config_dir();
  const awe::CorpusSource src_a =
      awe::parse_corpus_source(cfg.at("corpus_a"), dir, "corpus_a");
  awe::Corpus a = awe::load_corpus_source(
      src_a, awe::mix_seed(args.seed, "corpus.a"), args.eager_features);

  const int64_t token_budget = cfg.at("token_budget").get<int64_t>();
  const int64_t pair_budget = cfg.at("pair_budget").get<int64_t>();
  const awe::PairOptions opts = pair_options_of(cfg, args);

  awe::TrainingSet ts;
  std::optional<awe::Corpus> b;
  if (cfg.contains("corpus_b")) {
    const awe::CorpusSource src_b =
        awe::parse_corpus_source(cfg.at("corpus_b"), dir, "corpus_b");
    b = awe::load_corpus_source(src_b, awe::mix_seed(args.seed, "corpus.b"),
                                args.eager_features);
    if (cfg.value("match_speakers", false))
      std::tie(a, *b) = match_subsets(a, *b);
    const json& r = cfg.at("ratio");
    awe::require(r.is_array() && r.size() == 2,
                 "'ratio' must be a [share_a, share_b] pair");
    ts = awe::mix_bilingual(a, *b, {r[0].get<int>(), r[1].get<int>()},
                            token_budget, pair_budget, args.seed, opts);
  } else {
    awe::require(!cfg.value("match_speakers", false),
                 "match_speakers needs corpus_b");
    ts.tokens = awe::select_most_frequent(a, token_budget);
    ts.pairs = awe::generate_pairs(ts.tokens, pair_budget,
                                   awe::mix_seed(args.seed, "pairs"), opts);
  }

  std::set<std::string> ids;
  for (const awe::WordToken& t : ts.tokens)
    awe::require(ids.insert(t.token_id).second,
                 "token id '" + t.token_id + "' collides across corpora");

  // A corpus manifest holds one language, so the selection is written as
  // one manifest per language; pairs.jsonl ties them together by token id.
  fs::create_directories(args.out_dir);
  auto write_part = [&](const std::string& lang,
                        const std::string& stem) -> size_t {
    awe::Corpus part;
    part.language = lang;
    for (const awe::WordToken& t : ts.tokens)
      if (t.language == lang) part.tokens.push_back(t);
    if (part.tokens.empty()) return 0;
    awe::write_manifest(part,
                        (fs::path(args.out_dir) / (stem + ".jsonl")).string(),
                        (fs::path(args.out_dir) / ("features_" + stem)).string());
    return part.tokens.size();
  };
  const size_t n_a = write_part(a.language, "tokens_a");
  const size_t n_b = b.has_value() && b->language != a.language
                         ? write_part(b->language, "tokens_b")
                         : 0;
  awe::require(n_a + n_b == ts.tokens.size(),
               "training tokens carry unexpected language tags");

  std::string pairs;
  for (const awe::TrainingPair& p : ts.pairs) {
    json j = {{"input", ts.tokens[p.input].token_id},
              {"target", ts.tokens[p.target].token_id}};
    pairs += j.dump() + "\n";
  }
  write_text(fs::path(args.out_dir) / "pairs.jsonl", pairs);
  std::printf(
      "prepare: %zu + %zu tokens (share %d:%d), %zu pairs -> %s\n", n_a, n_b,
      ts.share_a, ts.share_b, ts.pairs.size(), args.out_dir.c_str());
  return 0;
}

awe::Corpus load_manifest_arg(const json& cfg, const std::string& key,
                              const GlobalArgs& args) {
  return awe::load_manifest(
      resolve_path(cfg.at(key).get<std::string>(), args.config_dir()),
      args.eager_features);
}

// Training commands accept 'manifest' (one file) or 'manifests' (several,
// e.g. the per-language outputs of prepare), concatenated in listed order.
std::vector<awe::WordToken> load_tokens_arg(const json& cfg,
                                            const GlobalArgs& args) {
  awe::require(cfg.contains("manifest") != cfg.contains("manifests"),
               "config needs exactly one of 'manifest' or 'manifests'");
  std::vector<std::string> paths;
  if (cfg.contains("manifest")) {
    paths.push_back(cfg.at("manifest").get<std::string>());
  } else {
    for (const json& p : cfg.at("manifests"))
      paths.push_back(p.get<std::string>());
    awe::require(!paths.empty(), "'manifests' must be non-empty");
  }
  std::vector<awe::WordToken> tokens;
  std::set<std::string> ids;
  for (const std::string& p : paths) {
    awe::Corpus c = awe::load_manifest(resolve_path(p, args.config_dir()),
                                       args.eager_features);
    for (awe::WordToken& t : c.tokens) {
      awe::require(ids.insert(t.token_id).second,
                   "token id '" + t.token_id + "' collides across manifests");
      tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

// pretrain: every token reconstructs itself; writes pretrain.awem.
int cmd_pretrain(const GlobalArgs& args) {
  const json cfg = load_config(args.config_path);
  const awe::ModelDims dims =
      awe::parse_model_dims(cfg.value("model", json::object()));
  awe::TrainConfig tc =
      awe::parse_train_config(cfg.value("train", json::object()));
  tc.seed = args.seed;

  awe::TrainingSet ts;
  ts.tokens = load_tokens_arg(cfg, args);
  std::vector<awe::EpochStat> log;
  const awe::CaeRnn<float> net = awe::pretrain_autoencoder(dims, ts, tc, &log);

  fs::create_directories(args.out_dir);
  const fs::path ckpt = fs::path(args.out_dir) / "pretrain.awem";
  awe::save_checkpoint(ckpt.string(), net);
  write_text(fs::path(args.out_dir) / "pretrain_log.json", epoch_log_json(log));
  std::printf("pretrain: %zu tokens, %d epochs, final mean loss %.6f -> %s\n",
              ts.tokens.size(), tc.pretrain_epochs,
              log.empty() ? 0.0 : log.back().mean_loss, ckpt.string().c_str());
  return 0;
}

// train: correspondence training over a pair list (from a file or sampled).
int cmd_train(const GlobalArgs& args) {
  const json cfg = load_config(args.config_path);
  awe::TrainConfig tc =
      awe::parse_train_config(cfg.value("train", json::object()));
  tc.seed = args.seed;

  awe::TrainingSet ts;
  ts.tokens = load_tokens_arg(cfg, args);
  awe::require(cfg.contains("pairs") != cfg.contains("n_pairs"),
               "train config needs exactly one of 'pairs' or 'n_pairs'");
  if (cfg.contains("pairs")) {
    std::map<std::string, uint32_t> index;
    for (size_t i = 0; i < ts.tokens.size(); ++i)
      index[ts.tokens[i].token_id] = static_cast<uint32_t>(i);
    const std::string path =
        resolve_path(cfg.at("pairs").get<std::string>(), args.config_dir());
    std::ifstream is(path);
    awe::require(is.good(), "cannot open pairs file " + path);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        awe::fail("pairs file " + path + ": " + e.what());
      }
      awe::TrainingPair p;
      for (auto [key, field] : {std::pair<const char*, uint32_t*>{"input", &p.input},
                                {"target", &p.target}}) {
        const std::string id = j.at(key).get<std::string>();
        const auto it = index.find(id);
        awe::require(it != index.end(),
                     "pairs file names unknown token '" + id + "'");
        *field = it->second;
      }
      ts.pairs.push_back(p);
    }
  } else {
    ts.pairs = awe::generate_pairs(ts.tokens, cfg.at("n_pairs").get<int64_t>(),
                                   awe::mix_seed(args.seed, "pairs"),
                                   pair_options_of(cfg, args));
  }

  awe::CaeRnn<float> net = [&] {
    if (cfg.contains("init")) {
      awe::CaeRnn<float> loaded = awe::load_checkpoint(
          resolve_path(cfg.at("init").get<std::string>(), args.config_dir()));
      awe::require(!cfg.contains("model") ||
                       awe::parse_model_dims(cfg.at("model")) == loaded.dims(),
                   "'model' dims disagree with the 'init' checkpoint");
      return loaded;
    }
    return awe::CaeRnn<float>(
        awe::parse_model_dims(cfg.value("model", json::object())), args.seed);
  }();

  std::vector<awe::EpochStat> log;
  awe::train_cae(net, ts, tc, &log);

  fs::create_directories(args.out_dir);
  const fs::path ckpt = fs::path(args.out_dir) / "model.awem";
  awe::save_checkpoint(ckpt.string(), net);
  write_text(fs::path(args.out_dir) / "train_log.json", epoch_log_json(log));
  std::printf("train: %zu pairs, %d epochs, final mean loss %.6f -> %s\n",
              ts.pairs.size(), tc.train_epochs,
              log.empty() ? 0.0 : log.back().mean_loss, ckpt.string().c_str());
  return 0;
}

// embed: manifest + checkpoint -> one embedding row per token.
int cmd_embed(const GlobalArgs& args) {
  const json cfg = load_config(args.config_path);
  const awe::Corpus corpus = load_manifest_arg(cfg, "manifest", args);
  const awe::CaeRnn<float> net = awe::load_checkpoint(
      resolve_path(cfg.at("checkpoint").get<std::string>(), args.config_dir()));

  Eigen::MatrixXf rows(corpus.tokens.size(), net.dims().embed_dim);
  std::vector<std::string> ids;
  for (size_t i = 0; i < corpus.tokens.size(); ++i) {
    rows.row(i) = awe::embed_token(net, corpus.tokens[i].features());
    ids.push_back(corpus.tokens[i].token_id);
  }
  fs::create_directories(args.out_dir);
  const fs::path path = fs::path(args.out_dir) / "embeddings.awee";
  awe::write_awee(path.string(), rows, ids);
  std::printf("embed: %zu tokens, dim %d -> %s\n", ids.size(),
              net.dims().embed_dim, path.string().c_str());
  return 0;
}

// abx: sample the configured tasks from a corpus and score a checkpoint.
int cmd_abx(const GlobalArgs& args) {
  const json cfg = load_config(args.config_path);
  const awe::Corpus corpus = load_manifest_arg(cfg, "manifest", args);
  const awe::CaeRnn<float> net = awe::load_checkpoint(
      resolve_path(cfg.at("checkpoint").get<std::string>(), args.config_dir()));
  std::vector<awe::TaskSpec> specs =
      awe::parse_task_specs(cfg.value("tasks", json::array()));
  awe::require(!specs.empty(), "abx config needs a non-empty 'tasks' array");

  const awe::Embedder embedder = [&net](const awe::FeatureMatrix& x) {
    return awe::embed_token(net, x);
  };
  const fs::path task_dir = fs::path(args.out_dir) / "tasks";
  fs::create_directories(task_dir);
  std::string csv = awe::abx_csv_header() + "\n";
  for (awe::TaskSpec& spec : specs) {
    spec.distinct_speakers = spec.distinct_speakers || args.distinct_speakers;
    const awe::AbxTask task = awe::sample_task_spec(spec, corpus, args.seed);
    awe::write_triplets((task_dir / (task.name + ".triplets.jsonl")).string(),
                        task);
    if (!task.notice.empty())
      std::fprintf(stderr, "notice: %s: %s\n", task.name.c_str(),
                   task.notice.c_str());
    const awe::AbxResult res = awe::abx_error_rate(task, embedder);
    write_text(task_dir / (task.name + ".json"), awe::abx_result_json(res) + "\n");
    const std::string row = awe::abx_csv_row(res);
    csv += row + "\n";
    std::printf("%s\n", row.c_str());
  }
  write_text(fs::path(args.out_dir) / "abx.csv", csv);
  return 0;
}

// probe: language classification accuracy over embeddings, either computed
// here from manifests + a checkpoint or read from two embedding files.
int cmd_probe(const GlobalArgs& args) {
  const json cfg = load_config(args.config_path);
  awe::LabeledEmbeddingSet set;
  set.split_seed = args.seed;

  if (cfg.contains("checkpoint")) {
    const awe::CaeRnn<float> net = awe::load_checkpoint(resolve_path(
        cfg.at("checkpoint").get<std::string>(), args.config_dir()));
    const uint64_t cap = cfg.value("tokens_per_language", uint64_t{0});
    for (const char* key : {"manifest_a", "manifest_b"}) {
      const awe::Corpus corpus = load_manifest_arg(cfg, key, args);
      const size_t n = cap > 0 ? std::min<size_t>(corpus.tokens.size(), cap)
                               : corpus.tokens.size();
      for (size_t i = 0; i < n; ++i) {
        set.embeddings.push_back(
            awe::embed_token(net, corpus.tokens[i].features()));
        set.labels.push_back(corpus.language);
      }
    }
  } else {
    const std::string label[2] = {cfg.value("label_a", "a"),
                                  cfg.value("label_b", "b")};
    const char* key[2] = {"embeddings_a", "embeddings_b"};
    for (int s = 0; s < 2; ++s) {
      const auto [rows, ids] = awe::read_awee(
          resolve_path(cfg.at(key[s]).get<std::string>(), args.config_dir()));
      for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        set.embeddings.push_back(rows.row(i));
        set.labels.push_back(label[s]);
      }
    }
  }

  const awe::ProbeResult res =
      awe::train_language_probe(set, cfg.value("l2_lambda", 1e-4));
  fs::create_directories(args.out_dir);
  write_text(fs::path(args.out_dir) / "probe.json",
             awe::probe_result_json(res, cfg.value("include_weights", false)) +
                 "\n");
  std::printf("probe: accuracy %.2f%% (%s vs %s, train %llu, test %llu)\n",
              res.accuracy, res.label_neg.c_str(), res.label_pos.c_str(),
              static_cast<unsigned long long>(res.n_train),
              static_cast<unsigned long long>(res.n_test));
  return 0;
}

void print_outcome(const awe::ExperimentOutcome& outcome,
                   const GlobalArgs& args) {
  for (const std::string& f : outcome.failures)
    std::fprintf(stderr, "warning: %s\n", f.c_str());
  std::printf("%d cell(s) failed or incomplete; %zu report rows -> %s\n",
              outcome.failed_cells, outcome.rows.size(), args.out_dir.c_str());
}

// run: the full ratio x seed sweep with resume; report assembly included.
int cmd_run(const GlobalArgs& args) {
  const awe::ExperimentConfig cfg = awe::parse_experiment_config(
      load_config(args.config_path), args.config_dir());
  const awe::ExperimentOutcome outcome =
      awe::run_experiment(cfg, args.out_dir, args.jobs);
  print_outcome(outcome, args);
  return outcome.failed_cells == 0 ? 0 : 1;
}

// report: re-assemble outputs from whatever cells have finished so far.
int cmd_report(const GlobalArgs& args) {
  const awe::ExperimentConfig cfg = awe::parse_experiment_config(
      load_config(args.config_path), args.config_dir());
  print_outcome(awe::assemble_report(cfg, args.out_dir), args);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic word embeddings: corpora, training, ABX, probes"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "JSON config file")
      ->type_name("PATH");
  app.add_option("--seed", args.seed, "base random seed")->type_name("N");
  app.add_option("--out", args.out_dir, "output directory")->type_name("DIR");
  app.add_option("--jobs", args.jobs, "parallel cells for 'run'")
      ->type_name("K");
  app.add_flag("--eager-features", args.eager_features,
               "load features when the manifest is read");
  app.add_flag("--cross-speaker-only", args.cross_speaker_only,
               "restrict training pairs to distinct speakers");
  app.add_flag("--distinct-speakers", args.distinct_speakers,
               "require distinct speakers within every sampled triplet");

  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const GlobalArgs&);
  };
  const Cmd cmds[] = {
      {"prepare", "build a matched/mixed training set from corpora",
       cmd_prepare},
      {"synth", "generate a synthetic corpus from a spec", cmd_synth},
      {"pretrain", "autoencoder pretraining on a token manifest",
       cmd_pretrain},
      {"train", "correspondence training over word pairs", cmd_train},
      {"embed", "embed every manifest token into an embedding file",
       cmd_embed},
      {"abx", "sample and score discrimination tasks", cmd_abx},
      {"probe", "language classification probe over embeddings", cmd_probe},
      {"report", "assemble reports from completed experiment cells",
       cmd_report},
      {"run", "run a full experiment sweep with resume", cmd_run},
  };
  for (const Cmd& c : cmds) app.add_subcommand(c.name, c.help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string chosen = app.get_subcommands().front()->get_name();
    for (const Cmd& c : cmds)
      if (chosen == c.name) return c.fn(args);
    return 2;  // unreachable: require_subcommand guarantees a match
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
