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

#include "awe/probes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "awe/common.hpp"
#include "awe/rng.hpp"

namespace awe {

namespace {

constexpr uint64_t kMaxIterations = 10000;
constexpr double kGradTol = 1e-6;

double stable_sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

}  // namespace

ProbeResult train_language_probe(const LabeledEmbeddingSet& s,
                                 double l2_lambda) {
  require(s.embeddings.size() == s.labels.size(),
          "embeddings and labels must have equal length");
  require(!s.embeddings.empty(), "probe needs a non-empty embedding set");
  require(l2_lambda >= 0.0, "l2 penalty must be non-negative");

  std::map<std::string, std::vector<size_t>> by_label;
  for (size_t i = 0; i < s.labels.size(); ++i)
    by_label[s.labels[i]].push_back(i);
  require(by_label.size() == 2,
          "probe needs exactly 2 distinct labels, got " +
              std::to_string(by_label.size()));
  const Eigen::Index dim = s.embeddings[0].size();
  require(dim > 0, "probe embeddings are empty vectors");
  for (const Embedding& e : s.embeddings) {
    require(e.size() == dim, "probe embeddings have mixed dimensions");
    require(e.allFinite(), "probe embeddings contain non-finite values");
  }

  // Stratified split; each label is shuffled on its own seed stream.
  std::vector<size_t> train, test;
  for (auto& [label, idx] : by_label) {
    require(idx.size() >= 10, "label '" + label + "' has " +
                                  std::to_string(idx.size()) +
                                  " samples; need at least 10");
    Rng rng(mix_seed(s.split_seed, "probe.split." + label));
    rng.shuffle(idx);
    const auto n_train =
        static_cast<size_t>(std::llround(0.8 * static_cast<double>(idx.size())));
    train.insert(train.end(), idx.begin(), idx.begin() + n_train);
    test.insert(test.end(), idx.begin() + n_train, idx.end());
  }

  ProbeResult r;
  r.label_neg = by_label.begin()->first;
  r.label_pos = by_label.rbegin()->first;
  r.n_train = train.size();
  r.n_test = test.size();

  const auto n = static_cast<Eigen::Index>(train.size());
  Eigen::MatrixXd x(n, dim);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = s.embeddings[train[i]].cast<double>().transpose();
    y[i] = (s.labels[train[i]] == r.label_pos) ? 1.0 : 0.0;
  }

  // Fixed step 1/L from the logistic curvature bound; with the bias column
  // the squared data norm gains one per row.
  const double nd = static_cast<double>(n);
  const double lip =
      (x.squaredNorm() + nd) / (4.0 * nd) + l2_lambda;
  const double step = 1.0 / std::max(lip, 1e-12);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double b = 0.0;
  Eigen::VectorXd p(n);
  uint64_t it = 0;
  double gnorm = 0.0;
  for (;; ++it) {
    for (Eigen::Index i = 0; i < n; ++i)
      p[i] = stable_sigmoid(x.row(i).dot(w) + b);
    const Eigen::VectorXd resid = p - y;
    const Eigen::VectorXd gw = x.transpose() * resid / nd + l2_lambda * w;
    const double gb = resid.sum() / nd;
    gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (gnorm < kGradTol || it >= kMaxIterations) break;
    w -= step * gw;
    b -= step * gb;
  }
  r.weights = w;
  r.bias = b;
  r.iterations = it;
  r.final_grad_norm = gnorm;

  double correct = 0.0;
  for (size_t idx : test) {
    const double score = s.embeddings[idx].cast<double>().dot(w) + b;
    const std::string& want = s.labels[idx];
    const std::string& got = (score >= 0.0) ? r.label_pos : r.label_neg;
    if (want == got) correct += 1.0;
  }
  r.accuracy = 100.0 * correct / static_cast<double>(test.size());
  return r;
}

MeanSe mean_se(const std::vector<double>& values) {
  require(!values.empty(), "mean_se of an empty group");
  MeanSe m;
  m.n = values.size();
  const double nd = static_cast<double>(values.size());
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / nd;
  if (values.size() == 1) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.se = std::sqrt(ss / (nd - 1.0)) / std::sqrt(nd);
  return m;
}

PermutationResult permutation_test(const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   uint64_t n_perm, uint64_t seed) {
  require(!a.empty() && !b.empty(), "permutation test needs two non-empty groups");
  require(n_perm >= 1000, "permutation test needs at least 1000 permutations");

  auto mean = [](const double* v, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += v[i];
    return s / static_cast<double>(n);
  };

  PermutationResult r;
  r.observed = std::fabs(mean(a.data(), a.size()) - mean(b.data(), b.size()));

  std::vector<double> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  const bool all_same =
      std::all_of(pool.begin(), pool.end(), [&](double v) { return v == pool[0]; });
  if (all_same) {
    r.degenerate = true;
    r.p = 1.0;
    return r;
  }

  double scale = 0.0;
  for (double v : pool) scale = std::max(scale, std::fabs(v));
  // Slack so that splits tied with the observed statistic count as >= even
  // when their sums round differently.
  const double cutoff = r.observed - 1e-12 * std::max(1.0, scale);

  Rng rng(mix_seed(seed, "permutation"));
  uint64_t hits = 0;
  for (uint64_t k = 0; k < n_perm; ++k) {
    rng.shuffle(pool);
    const double stat =
        std::fabs(mean(pool.data(), a.size()) -
                  mean(pool.data() + a.size(), b.size()));
    if (stat >= cutoff) ++hits;
  }
  r.p = static_cast<double>(1 + hits) / static_cast<double>(n_perm + 1);
  return r;
}

std::string probe_result_json(const ProbeResult& r, bool include_weights) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["label_neg"] = r.label_neg;
  j["label_pos"] = r.label_pos;
  j["iterations"] = r.iterations;
  j["final_grad_norm"] = r.final_grad_norm;
  if (include_weights) {
    j["bias"] = r.bias;
    j["weights"] = std::vector<double>(r.weights.data(),
                                       r.weights.data() + r.weights.size());
  }
  return j.dump();
}

}  // namespace awe
