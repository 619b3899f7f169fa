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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "awe/abx.hpp"
#include "awe/caernn.hpp"
#include "awe/corpus.hpp"
#include "awe/experiment.hpp"
#include "awe/frontend.hpp"
#include "awe/io.hpp"
#include "awe/probes.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json parse_json_arg(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    awe::fail(std::string(what) + ": " + e.what());
  }
}

const awe::WordToken& token_at(const awe::Corpus& c, size_t i) {
  awe::require(i < c.tokens.size(),
               "token index " + std::to_string(i) + " out of range (corpus has " +
                   std::to_string(c.tokens.size()) + " tokens)");
  return c.tokens[i];
}

std::vector<awe::WordToken> concat_tokens(
    const std::vector<const awe::Corpus*>& corpora) {
  std::vector<awe::WordToken> tokens;
  for (const awe::Corpus* c : corpora)
    tokens.insert(tokens.end(), c->tokens.begin(), c->tokens.end());
  return tokens;
}

py::dict outcome_dict(const awe::ExperimentOutcome& outcome) {
  py::list rows;
  for (const awe::ReportRow& r : outcome.rows) {
    py::dict d;
    d["ratio_a"] = r.ratio_a;
    d["ratio_b"] = r.ratio_b;
    d["task_id"] = r.task_id;
    d["edit_distance"] =
        r.edit_distance ? py::cast(*r.edit_distance) : py::none();
    d["seed"] = r.seed;
    d["error_rate"] = r.error_rate;
    rows.append(d);
  }
  py::dict d;
  d["rows"] = rows;
  d["failed_cells"] = outcome.failed_cells;
  d["failures"] = outcome.failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Acoustic word embeddings: MFCC frontend, corpora, encoder-decoder "
      "training, ABX evaluation, language probes, experiment sweeps.";

  m.def(
      "mfcc",
      [](std::vector<float> samples, int sample_rate) {
        awe::Waveform w;
        w.samples = std::move(samples);
        w.sample_rate = sample_rate;
        return awe::compute_mfcc(w);
      },
      py::arg("samples"), py::arg("sample_rate"),
      "13 cepstral coefficients per 10 ms frame (25 ms Hamming window).");

  py::class_<awe::Corpus>(m, "Corpus",
                          "A single-language collection of word tokens.")
      .def_static(
          "load",
          [](const std::string& path, bool eager_features) {
            return awe::load_manifest(path, eager_features);
          },
          py::arg("path"), py::arg("eager_features") = false)
      .def_static(
          "synth",
          [](const std::string& spec_json, uint64_t seed) {
            return awe::synth_corpus(
                awe::parse_synth_spec(parse_json_arg(spec_json, "synth spec")),
                seed);
          },
          py::arg("spec_json"), py::arg("seed"))
      .def_property_readonly(
          "language", [](const awe::Corpus& c) { return c.language; })
      .def("__len__", [](const awe::Corpus& c) { return c.tokens.size(); })
      .def("token_id",
           [](const awe::Corpus& c, size_t i) { return token_at(c, i).token_id; })
      .def(
          "features",
          [](const awe::Corpus& c, size_t i) -> awe::FeatureMatrix {
            return token_at(c, i).features();
          },
          py::arg("i"), "The token's feature matrix, frames by 13.")
      .def(
          "meta",
          [](const awe::Corpus& c, size_t i) {
            const awe::WordToken& t = token_at(c, i);
            py::dict d;
            d["token_id"] = t.token_id;
            d["word_type"] = t.word_type;
            d["phones"] = t.phones;
            d["lemma"] = t.lemma ? py::cast(*t.lemma) : py::none();
            d["speaker_id"] = t.speaker_id;
            d["language"] = t.language;
            d["duration_ms"] = t.duration_ms;
            return d;
          },
          py::arg("i"))
      .def(
          "write",
          [](const awe::Corpus& c, const std::string& manifest_path,
             const std::string& feature_dir) {
            awe::write_manifest(c, manifest_path, feature_dir);
          },
          py::arg("manifest_path"), py::arg("feature_dir"));

  py::class_<awe::CaeRnn<float>>(
      m, "Model", "Recurrent encoder-decoder over word feature matrices.")
      .def_static("load", &awe::load_checkpoint, py::arg("path"))
      .def(
          "save",
          [](const awe::CaeRnn<float>& net, const std::string& path) {
            awe::save_checkpoint(path, net);
          },
          py::arg("path"))
      .def_property_readonly(
          "embed_dim",
          [](const awe::CaeRnn<float>& net) { return net.dims().embed_dim; })
      .def_property_readonly("steps_done", &awe::CaeRnn<float>::steps_done)
      .def(
          "embed",
          [](const awe::CaeRnn<float>& net, const awe::FeatureMatrix& x) {
            return awe::embed_token(net, x);
          },
          py::arg("features"),
          "Fixed-dimensional embedding of one variable-length segment.");

  m.def(
      "pretrain",
      [](const std::vector<const awe::Corpus*>& corpora,
         const std::string& model_json, const std::string& train_json,
         uint64_t seed) {
        awe::TrainingSet ts;
        ts.tokens = concat_tokens(corpora);
        awe::TrainConfig tc =
            awe::parse_train_config(parse_json_arg(train_json, "train config"));
        tc.seed = seed;
        return awe::pretrain_autoencoder(
            awe::parse_model_dims(parse_json_arg(model_json, "model config")),
            ts, tc);
      },
      py::arg("corpora"), py::arg("model_json") = "{}",
      py::arg("train_json") = "{}", py::arg("seed") = 0,
      "Autoencoder pretraining over all tokens of the given corpora.");

  m.def(
      "train",
      [](awe::CaeRnn<float>& model,
         const std::vector<const awe::Corpus*>& corpora, int64_t n_pairs,
         const std::string& train_json, uint64_t seed,
         bool cross_speaker_only) {
        awe::TrainingSet ts;
        ts.tokens = concat_tokens(corpora);
        awe::PairOptions opts;
        opts.cross_speaker_only = cross_speaker_only;
        ts.pairs = awe::generate_pairs(ts.tokens, n_pairs,
                                       awe::mix_seed(seed, "pairs"), opts);
        awe::TrainConfig tc =
            awe::parse_train_config(parse_json_arg(train_json, "train config"));
        tc.seed = seed;
        awe::train_cae(model, ts, tc);
      },
      py::arg("model"), py::arg("corpora"), py::arg("n_pairs"),
      py::arg("train_json") = "{}", py::arg("seed") = 0,
      py::arg("cross_speaker_only") = false,
      "Correspondence training on sampled same-type token pairs, in place.");

  m.def("angular_cosine_distance", &awe::angular_cosine_distance,
        py::arg("u"), py::arg("v"),
        "arccos of cosine similarity scaled to [0, 1].");

  m.def("phone_edit_distance", &awe::phone_edit_distance, py::arg("a"),
        py::arg("b"), "Levenshtein distance over phone symbol sequences.");

  m.def(
      "abx_error",
      [](const awe::Corpus& corpus, const awe::CaeRnn<float>& model,
         const std::string& task_json, uint64_t seed) {
        const std::vector<awe::TaskSpec> specs = awe::parse_task_specs(
            json::array({parse_json_arg(task_json, "task spec")}));
        const awe::AbxTask task =
            awe::sample_task_spec(specs.at(0), corpus, seed);
        const awe::AbxResult res =
            awe::abx_error_rate(task, [&](const awe::FeatureMatrix& x) {
              return awe::embed_token(model, x);
            });
        py::dict d;
        d["task"] = res.task;
        d["n_trials"] = res.n_trials;
        d["n_ties"] = res.n_ties;
        d["error_rate"] = res.error_rate;
        d["notice"] = task.notice;
        return d;
      },
      py::arg("corpus"), py::arg("model"), py::arg("task_json"),
      py::arg("seed") = 0,
      "Samples one discrimination task from the corpus and scores the model.");

  m.def(
      "train_probe",
      [](const Eigen::MatrixXf& embeddings,
         const std::vector<std::string>& labels, uint64_t split_seed,
         double l2_lambda) {
        awe::LabeledEmbeddingSet set;
        set.split_seed = split_seed;
        for (Eigen::Index i = 0; i < embeddings.rows(); ++i)
          set.embeddings.push_back(embeddings.row(i));
        set.labels = labels;
        const awe::ProbeResult r = awe::train_language_probe(set, l2_lambda);
        py::dict d;
        d["accuracy"] = r.accuracy;
        d["n_train"] = r.n_train;
        d["n_test"] = r.n_test;
        d["label_neg"] = r.label_neg;
        d["label_pos"] = r.label_pos;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("embeddings"), py::arg("labels"), py::arg("split_seed") = 0,
      py::arg("l2_lambda") = 1e-4,
      "Logistic-regression label probe on an 80/20 stratified split.");

  m.def(
      "mean_se",
      [](const std::vector<double>& values) {
        const awe::MeanSe r = awe::mean_se(values);
        return py::make_tuple(r.mean, r.se, r.n);
      },
      py::arg("values"), "Mean and standard error; returns (mean, se, n).");

  m.def(
      "permutation_test",
      [](const std::vector<double>& a, const std::vector<double>& b,
         uint64_t n_perm, uint64_t seed) {
        const awe::PermutationResult r = awe::permutation_test(a, b, n_perm, seed);
        py::dict d;
        d["p"] = r.p;
        d["degenerate"] = r.degenerate;
        d["observed"] = r.observed;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("n_perm") = 10000,
      py::arg("seed") = 0,
      "Two-sided permutation test on the absolute mean difference.");

  m.def(
      "write_awee",
      [](const std::string& path, const Eigen::MatrixXf& rows,
         const std::vector<std::string>& ids) {
        awe::write_awee(path, rows, ids);
      },
      py::arg("path"), py::arg("rows"), py::arg("ids"));

  m.def("read_awee", &awe::read_awee, py::arg("path"),
        "Returns (rows, ids) from an embedding file and its id sidecar.");

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& out_dir, int jobs,
         const std::string& config_dir) {
        const awe::ExperimentConfig cfg = awe::parse_experiment_config(
            parse_json_arg(config_json, "experiment config"), config_dir);
        awe::ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = awe::run_experiment(cfg, out_dir, jobs);
        }
        return outcome_dict(outcome);
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("jobs") = 1,
      py::arg("config_dir") = ".",
      "Full ratio-by-seed sweep with per-cell resume; writes report files.");

  m.def(
      "assemble_report",
      [](const std::string& config_json, const std::string& out_dir,
         const std::string& config_dir) {
        const awe::ExperimentConfig cfg = awe::parse_experiment_config(
            parse_json_arg(config_json, "experiment config"), config_dir);
        return outcome_dict(awe::assemble_report(cfg, out_dir));
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("config_dir") = ".",
      "Re-assembles report files from completed cells without training.");
}
