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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "awe/probes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const awe::Error& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

size_t line_count(const std::string& text) {
  size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("awe_exp_" + name);
  fs::remove_all(dir);
  return dir;
}

awe::SynthPhone phone_proto(const std::string& symbol, int dim) {
  awe::SynthPhone p;
  p.symbol = symbol;
  p.mean = Eigen::VectorXf::Zero(awe::kMfccDim);
  p.mean[dim] = 3.0f;
  return p;
}

awe::SynthSpeaker speaker(const std::string& id, awe::Gender g, float off) {
  awe::SynthSpeaker s;
  s.id = id;
  s.gender = g;
  s.offset = Eigen::VectorXf::Zero(awe::kMfccDim);
  s.offset[11] = off;
  return s;
}

awe::SynthWord word(const std::string& type,
                    const std::vector<std::string>& phones) {
  awe::SynthWord w;
  w.word_type = type;
  w.phones = phones;
  return w;
}

awe::SynthSpec lang_a_spec() {
  awe::SynthSpec s;
  s.language = "lgA";
  s.phones = {phone_proto("aa", 0), phone_proto("ee", 1), phone_proto("p", 2),
              phone_proto("t", 3), phone_proto("k", 4)};
  s.words = {word("w1", {"aa", "p", "t", "k"}), word("w2", {"ee", "p", "t", "k"}),
             word("w3", {"aa", "p", "t", "t"})};
  s.speakers = {speaker("sA1", awe::Gender::kFemale, 0.05f),
                speaker("sA2", awe::Gender::kMale, -0.05f)};
  s.tokens_per_type = 3;
  s.noise_scale = 0.05;
  s.min_frames_per_phone = 3;
  s.max_frames_per_phone = 3;
  return s;
}

awe::SynthSpec lang_b_spec() {
  awe::SynthSpec s;
  s.language = "lgB";
  s.phones = {phone_proto("oo", 5), phone_proto("uu", 6), phone_proto("b", 7),
              phone_proto("d", 8), phone_proto("g", 9)};
  s.words = {word("v1", {"oo", "b", "d", "g"}), word("v2", {"uu", "b", "d", "g"}),
             word("v3", {"oo", "b", "b", "g"})};
  s.speakers = {speaker("sB1", awe::Gender::kFemale, 0.05f),
                speaker("sB2", awe::Gender::kMale, -0.05f)};
  s.tokens_per_type = 3;
  s.noise_scale = 0.05;
  s.min_frames_per_phone = 3;
  s.max_frames_per_phone = 3;
  return s;
}

awe::ExperimentConfig tiny_config() {
  awe::ExperimentConfig cfg;
  cfg.language_a.synth = lang_a_spec();
  cfg.language_b.synth = lang_b_spec();
  cfg.ratios = {{100, 0}, {50, 50}};
  cfg.token_budget = 12;
  cfg.pair_budget = 40;
  cfg.model.enc_layers = 1;
  cfg.model.enc_units = 8;
  cfg.model.embed_dim = 4;
  cfg.model.dec_layers = 1;
  cfg.model.dec_units = 8;
  cfg.train.pretrain_epochs = 2;
  cfg.train.train_epochs = 2;
  cfg.train.batch_size = 8;

  awe::TaskSpec ph;
  ph.id = "aa_vs_ee";
  ph.kind = "phone";
  ph.language = "a";
  ph.item1 = "aa";
  ph.item2 = "ee";
  ph.n = 30;
  awe::TaskSpec ed;
  ed.id = "near1";
  ed.kind = "edit_distance";
  ed.language = "a";
  ed.distance = 1;
  ed.n = 40;
  cfg.tasks = {ph, ed};

  cfg.probe = true;
  cfg.seeds = {1, 2};
  cfg.data_seed = 77;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("config parsing resolves sources, tasks, and defaults") {
  json j = {
      {"language_a", {{"manifest", "sub/a.jsonl"}}},
      {"language_b",
       {{"synth_spec",
         {{"language", "lgB"},
          {"phones", json::array({{{"symbol", "oo"},
                                   {"mean", std::vector<float>(13, 1.0f)}}})},
          {"words",
           json::array({{{"word_type", "v"}, {"phones", {"oo"}}}})},
          {"speakers",
           json::array({{{"id", "s1"},
                         {"gender", "F"},
                         {"offset", std::vector<float>(13, 0.0f)}}})}}}}},
      {"ratios", {{100, 0}, {50, 50}}},
      {"token_budget", 12},
      {"pair_budget", 40},
      {"model", {{"enc_layers", 1}, {"enc_units", 8}, {"embed_dim", 4}}},
      {"train", {{"train_epochs", 2}, {"batch_size", 8}}},
      {"pair_options", {{"cross_speaker_only", true}}},
      {"tasks",
       {{{"id", "aa_vs_ee"},
         {"kind", "phone"},
         {"language", "a"},
         {"item1", "aa"},
         {"item2", "ee"},
         {"n", 30}},
        {{"id", "near2"},
         {"kind", "edit_distance"},
         {"distance", 2},
         {"n", 10},
         {"distinct_speakers", true}}}},
      {"probe", true},
      {"probe_tokens_per_language", 50},
      {"seeds", {1, 2, 3}},
      {"data_seed", 9}};

  const awe::ExperimentConfig cfg = awe::parse_experiment_config(j, "/cfgdir");
  CHECK(cfg.language_a.manifest.has_value());
  CHECK(*cfg.language_a.manifest == "/cfgdir/sub/a.jsonl");
  CHECK(cfg.language_b.synth.has_value());
  CHECK(cfg.language_b.synth->language == "lgB");
  CHECK_FALSE(cfg.eval_a.has_value());
  REQUIRE(cfg.ratios.size() == 2);
  CHECK(cfg.ratios[1] == std::pair<int, int>(50, 50));
  CHECK(cfg.token_budget == 12);
  CHECK(cfg.pair_budget == 40);
  CHECK(cfg.model.enc_layers == 1);
  CHECK(cfg.model.enc_units == 8);
  CHECK(cfg.model.embed_dim == 4);
  CHECK(cfg.model.dec_layers == 3);   // untouched default
  CHECK(cfg.train.train_epochs == 2);
  CHECK(cfg.train.pretrain_epochs == 15);  // untouched default
  CHECK(cfg.pair_options.cross_speaker_only);
  REQUIRE(cfg.tasks.size() == 2);
  CHECK(cfg.tasks[0].kind == "phone");
  CHECK(cfg.tasks[0].item2 == "ee");
  CHECK(cfg.tasks[1].kind == "edit_distance");
  CHECK(cfg.tasks[1].distance == 2);
  CHECK(cfg.tasks[1].language == "a");  // default
  CHECK(cfg.tasks[1].distinct_speakers);
  CHECK(cfg.probe);
  CHECK(cfg.probe_tokens_per_language == 50);
  CHECK(cfg.seeds == std::vector<uint64_t>{1, 2, 3});
  CHECK(cfg.data_seed == 9);

  // Absolute manifest paths pass through untouched.
  json j2 = j;
  j2["language_a"]["manifest"] = "/abs/a.jsonl";
  CHECK(*awe::parse_experiment_config(j2, "/cfgdir").language_a.manifest ==
        "/abs/a.jsonl");
}

TEST_CASE("config parsing rejects malformed inputs") {
  const json base = {{"language_a", {{"manifest", "a.jsonl"}}},
                     {"language_b", {{"manifest", "b.jsonl"}}},
                     {"ratios", {{100, 0}}},
                     {"token_budget", 12},
                     {"pair_budget", 40},
                     {"seeds", {1}}};
  CHECK(awe::parse_experiment_config(base, ".").ratios.size() == 1);

  auto drop = [&](const std::string& key) {
    json j = base;
    j.erase(key);
    return j;
  };
  auto parse = [](const json& j) {
    return [j] { awe::parse_experiment_config(j, "."); };
  };

  CHECK(contains(error_of(parse(drop("language_a"))), "experiment config"));
  CHECK(contains(error_of(parse(drop("ratios"))), "ratios"));
  CHECK(contains(error_of(parse(drop("seeds"))), "seeds"));
  CHECK(contains(error_of(parse(drop("token_budget"))), "experiment config"));

  json both = base;
  both["language_a"]["synth_spec"] = {{"language", "x"}};
  CHECK(contains(error_of(parse(both)),
                 "language_a needs exactly one of 'manifest' or 'synth_spec'"));

  json neither = base;
  neither["language_b"] = json::object();
  CHECK(contains(error_of(parse(neither)),
                 "language_b needs exactly one of 'manifest' or 'synth_spec'"));

  json bad_ratio = base;
  bad_ratio["ratios"] = {{90, 20}};
  CHECK(contains(error_of(parse(bad_ratio)), "ratio 90:20 does not sum to 100"));

  json empty_seeds = base;
  empty_seeds["seeds"] = json::array();
  CHECK(contains(error_of(parse(empty_seeds)), "seeds"));

  json zero_budget = base;
  zero_budget["pair_budget"] = 0;
  CHECK(contains(error_of(parse(zero_budget)), "budgets must be positive"));

  json bad_kind = base;
  bad_kind["tasks"] = {{{"id", "x"}, {"kind", "triphone"}}};
  CHECK(contains(error_of(parse(bad_kind)), "unknown kind 'triphone'"));

  json bad_lang = base;
  bad_lang["tasks"] = {{{"id", "x"},
                        {"kind", "edit_distance"},
                        {"language", "c"},
                        {"distance", 1},
                        {"n", 5}}};
  CHECK(contains(error_of(parse(bad_lang)), "language must be 'a' or 'b'"));

  json bad_id = base;
  bad_id["tasks"] = {{{"id", "a/b"},
                      {"kind", "edit_distance"},
                      {"distance", 1},
                      {"n", 5}}};
  CHECK(contains(error_of(parse(bad_id)), "must be non-empty [A-Za-z0-9_-]"));

  json dup = base;
  dup["tasks"] = {
      {{"id", "x"}, {"kind", "edit_distance"}, {"distance", 1}, {"n", 5}},
      {{"id", "x"}, {"kind", "edit_distance"}, {"distance", 2}, {"n", 5}}};
  CHECK(contains(error_of(parse(dup)), "duplicate task id 'x'"));
}

TEST_CASE("report csv formats rows exactly") {
  awe::ReportRow r1;
  r1.ratio_a = 90;
  r1.ratio_b = 10;
  r1.task_id = "aa_vs_ee";
  r1.seed = 3;
  r1.error_rate = 12.5;
  awe::ReportRow r2;
  r2.ratio_a = 0;
  r2.ratio_b = 100;
  r2.task_id = "near1";
  r2.edit_distance = 1;
  r2.seed = 7;
  r2.error_rate = 33.333333343;
  CHECK(awe::report_csv({r1, r2}) ==
        "ratio,task_id,edit_distance,seed,error_rate\n"
        "90:10,aa_vs_ee,,3,12.500000\n"
        "0:100,near1,1,7,33.333333\n");
}

TEST_CASE("figure data aggregates by ratio and edit distance") {
  auto row = [](int a, int b, const std::string& task,
                std::optional<int> d, uint64_t seed, double err) {
    awe::ReportRow r;
    r.ratio_a = a;
    r.ratio_b = b;
    r.task_id = task;
    r.edit_distance = d;
    r.seed = seed;
    r.error_rate = err;
    return r;
  };
  std::vector<awe::ReportRow> rows = {
      row(100, 0, "x", std::nullopt, 1, 10.0),
      row(100, 0, "x", std::nullopt, 2, 20.0),
      row(50, 50, "x", std::nullopt, 1, 30.0),
      row(100, 0, "near", 1, 1, 5.0),
      row(100, 0, "near", 1, 2, 7.0),
      row(100, 0, "near2", 2, 1, 9.0),
  };
  const fs::path dir = fresh_dir("figs");
  awe::emit_figure_data(rows, dir.string());

  // mean_se({10,20}) has se 5 exactly; singletons report se 0.
  CHECK(slurp(dir / "fig_x.csv") ==
        "ratio,x,mean_error,se,n\n"
        "50:50,50,30.000000,0.000000,1\n"
        "100:0,100,15.000000,5.000000,2\n");
  CHECK(slurp(dir / "fig_edit_distance.csv") ==
        "ratio,x,mean_error,se,n\n"
        "100:0,1,6.000000,1.000000,2\n"
        "100:0,2,9.000000,0.000000,1\n");
  CHECK_FALSE(fs::exists(dir / "fig_near.csv"));

  const awe::MeanSe m = awe::mean_se({10.0, 20.0});
  CHECK(m.mean == doctest::Approx(15.0));
  CHECK(m.se == doctest::Approx(5.0));

  CHECK(contains(error_of([&] { awe::emit_figure_data({}, dir.string()); }),
                 "no report rows"));
}

TEST_CASE("comparison table covers ratio pairs and flags degenerate groups") {
  auto row = [](int a, const std::string& task, uint64_t seed, double err) {
    awe::ReportRow r;
    r.ratio_a = a;
    r.ratio_b = 100 - a;
    r.task_id = task;
    r.seed = seed;
    r.error_rate = err;
    return r;
  };
  std::vector<awe::ReportRow> rows;
  for (uint64_t s = 1; s <= 3; ++s) {
    rows.push_back(row(100, "x", s, 1.0 + double(s)));
    rows.push_back(row(0, "x", s, 7.0 + double(s)));
    rows.push_back(row(100, "flat", s, 4.0));
    rows.push_back(row(0, "flat", s, 4.0));
  }
  const std::string csv = awe::comparisons_csv(rows, 42);
  CHECK(line_count(csv) == 3);  // header + one ratio pair per task
  CHECK(contains(csv,
                 "task_id,ratio_1,ratio_2,n_1,n_2,observed_diff,p_value,"
                 "degenerate,method\n"));
  CHECK(contains(csv, "flat,0:100,100:0,3,3,0.000000,1.000000,1,"
                      "permutation_substitute_for_mixed_effects\n"));
  // Observed |mean difference| for task x is exactly 6.
  CHECK(contains(csv, "x,0:100,100:0,3,3,6.000000,"));
  CHECK_FALSE(contains(csv, "x,0:100,100:0,3,3,6.000000,1.000000"));
  CHECK(awe::comparisons_csv(rows, 42) == csv);
}

TEST_CASE("tiny bilingual experiment produces a full report") {
  const awe::ExperimentConfig cfg = tiny_config();
  const fs::path out = fresh_dir("tiny");
  const awe::ExperimentOutcome outcome =
      awe::run_experiment(cfg, out.string(), 1);

  CHECK(outcome.failed_cells == 0);
  CHECK(outcome.failures.empty());
  REQUIRE(outcome.rows.size() == 8);  // 2 ratios x 2 seeds x 2 tasks

  std::set<std::string> keys;
  for (const awe::ReportRow& r : outcome.rows) {
    CHECK(r.error_rate >= 0.0);
    CHECK(r.error_rate <= 100.0);
    if (r.task_id == "near1") {
      REQUIRE(r.edit_distance.has_value());
      CHECK(*r.edit_distance == 1);
    } else {
      CHECK(r.task_id == "aa_vs_ee");
      CHECK_FALSE(r.edit_distance.has_value());
    }
    keys.insert(std::to_string(r.ratio_a) + "/" + std::to_string(r.seed) +
                "/" + r.task_id);
  }
  CHECK(keys.size() == 8);

  for (const char* name :
       {"report.csv", "comparisons.csv", "probe.csv", "probe_summary.csv",
        "figures/fig_aa_vs_ee.csv", "figures/fig_edit_distance.csv",
        "tasks/aa_vs_ee.triplets.jsonl", "tasks/near1.triplets.jsonl",
        "cells/r100_0_s1/model.awem", "cells/r100_0_s1/pretrain.awem",
        "cells/r100_0_s1/train_log.json", "cells/r100_0_s1/task_near1.json",
        "cells/r50_50_s2/probe.json"}) {
    CAPTURE(name);
    CHECK(fs::exists(out / name));
  }

  const std::string report = slurp(out / "report.csv");
  CHECK(line_count(report) == 9);
  CHECK(report.rfind("ratio,task_id,edit_distance,seed,error_rate\n", 0) == 0);
  CHECK(contains(report, "100:0,aa_vs_ee,,1,"));
  CHECK(contains(report, "50:50,near1,1,2,"));
  CHECK(report == awe::report_csv(outcome.rows));

  CHECK(line_count(slurp(out / "probe.csv")) == 5);      // header + 4 cells
  CHECK(line_count(slurp(out / "probe_summary.csv")) == 3);
  CHECK(line_count(slurp(out / "comparisons.csv")) == 3);

  const json probe = json::parse(slurp(out / "cells/r100_0_s1/probe.json"));
  CHECK(probe.at("n_train").get<int>() == 28);
  CHECK(probe.at("n_test").get<int>() == 8);
  CHECK(probe.at("label_neg").get<std::string>() == "lgA");
  CHECK(probe.at("label_pos").get<std::string>() == "lgB");
}

TEST_CASE("rerunning an experiment resumes from artifacts byte for byte") {
  const awe::ExperimentConfig cfg = tiny_config();
  const fs::path out = fresh_dir("rerun");
  awe::run_experiment(cfg, out.string(), 1);

  const std::vector<std::string> files = {
      "report.csv",          "comparisons.csv",
      "probe.csv",           "probe_summary.csv",
      "figures/fig_aa_vs_ee.csv", "figures/fig_edit_distance.csv",
      "cells/r100_0_s1/task_aa_vs_ee.json"};
  std::vector<std::string> before;
  for (const std::string& f : files) before.push_back(slurp(out / f));
  const auto model_time = fs::last_write_time(out / "cells/r100_0_s1/model.awem");
  const std::string model_bytes = slurp(out / "cells/r100_0_s1/model.awem");

  awe::ExperimentOutcome again = awe::run_experiment(cfg, out.string(), 1);
  CHECK(again.rows.size() == 8);
  for (size_t i = 0; i < files.size(); ++i) {
    CAPTURE(files[i]);
    CHECK(slurp(out / files[i]) == before[i]);
  }
  // Training was skipped: the checkpoint was not rewritten.
  CHECK(fs::last_write_time(out / "cells/r100_0_s1/model.awem") == model_time);

  // A deleted task result is recomputed from the checkpoint, byte for byte.
  fs::remove(out / "cells/r100_0_s1/task_aa_vs_ee.json");
  awe::run_experiment(cfg, out.string(), 1);
  CHECK(slurp(out / "cells/r100_0_s1/task_aa_vs_ee.json") == before.back());
  CHECK(fs::last_write_time(out / "cells/r100_0_s1/model.awem") == model_time);
  CHECK(slurp(out / "cells/r100_0_s1/model.awem") == model_bytes);
}

TEST_CASE("a fresh output directory reproduces the same report") {
  const awe::ExperimentConfig cfg = tiny_config();
  const fs::path out1 = fresh_dir("repro1");
  const fs::path out2 = fresh_dir("repro2");
  awe::run_experiment(cfg, out1.string(), 1);
  awe::run_experiment(cfg, out2.string(), 2);  // worker count must not matter

  for (const char* f : {"report.csv", "comparisons.csv", "probe.csv",
                        "figures/fig_aa_vs_ee.csv"}) {
    CAPTURE(f);
    CHECK(slurp(out1 / f) == slurp(out2 / f));
  }
  CHECK(slurp(out1 / "cells/r50_50_s1/model.awem") ==
        slurp(out2 / "cells/r50_50_s1/model.awem"));
}

TEST_CASE("monolingual cells do not depend on the unused language") {
  awe::ExperimentConfig cfg = tiny_config();
  cfg.ratios = {{100, 0}};
  cfg.seeds = {3};
  cfg.probe = false;
  cfg.tasks.resize(1);  // language-a phone task only

  awe::ExperimentConfig other = cfg;
  awe::SynthSpec alt = lang_b_spec();
  alt.words = {word("z1", {"uu", "d", "g", "b"}), word("z2", {"oo", "oo", "d", "g"})};
  alt.tokens_per_type = 5;
  other.language_b.synth = alt;

  const fs::path out1 = fresh_dir("mono1");
  const fs::path out2 = fresh_dir("mono2");
  CHECK(awe::run_experiment(cfg, out1.string(), 1).failed_cells == 0);
  CHECK(awe::run_experiment(other, out2.string(), 1).failed_cells == 0);

  CHECK(slurp(out1 / "cells/r100_0_s3/model.awem") ==
        slurp(out2 / "cells/r100_0_s3/model.awem"));
  CHECK(slurp(out1 / "report.csv") == slurp(out2 / "report.csv"));
}

TEST_CASE("failing cells are isolated and reported") {
  awe::ExperimentConfig cfg = tiny_config();
  awe::SynthSpec starved = lang_b_spec();
  starved.tokens_per_type = 1;
  starved.speakers.resize(1);
  starved.words.resize(2);  // 2 tokens total, far below the token budget
  cfg.language_b.synth = starved;
  cfg.ratios = {{100, 0}, {0, 100}};
  cfg.probe = false;
  cfg.tasks.resize(1);

  const fs::path out = fresh_dir("fail");
  const awe::ExperimentOutcome outcome =
      awe::run_experiment(cfg, out.string(), 1);

  CHECK(outcome.failed_cells == 2);
  REQUIRE(outcome.failures.size() == 2);
  CHECK(contains(outcome.failures[0], "cell r0_100_s1: "));
  CHECK(contains(outcome.failures[1], "cell r0_100_s2: "));
  CHECK(fs::exists(out / "cells/r0_100_s1/error.txt"));

  REQUIRE(outcome.rows.size() == 2);  // the two healthy 100:0 cells
  const std::string report = slurp(out / "report.csv");
  CHECK(contains(report, "100:0,aa_vs_ee"));
  CHECK_FALSE(contains(report, "0:100,"));
}

TEST_SUITE_END();
