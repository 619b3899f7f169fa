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

#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "awe/probes.hpp"
#include "awe/rng.hpp"

using awe::Embedding;
using awe::LabeledEmbeddingSet;
using awe::MeanSe;
using awe::PermutationResult;
using awe::ProbeResult;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const awe::Error& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

Embedding noisy_point(const Eigen::VectorXd& center, double noise,
                      awe::Rng& rng) {
  Embedding v(center.size());
  for (Eigen::Index i = 0; i < center.size(); ++i)
    v[i] = static_cast<float>(center[i] + noise * rng.normal());
  return v;
}

// Two well-separated clusters, `per_class` points each.
LabeledEmbeddingSet cluster_set(int per_class, int dim, double gap,
                                double noise, uint64_t seed) {
  awe::Rng rng(seed);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < dim; ++i) dir[i] = rng.normal();
  dir.normalize();
  LabeledEmbeddingSet s;
  s.split_seed = seed + 1;
  for (int k = 0; k < per_class; ++k) {
    s.embeddings.push_back(noisy_point(gap * dir, noise, rng));
    s.labels.push_back("lgA");
    s.embeddings.push_back(noisy_point(-gap * dir, noise, rng));
    s.labels.push_back("lgB");
  }
  return s;
}

// Margin oracle: a perceptron converges only on separable data.
bool perceptron_separates(const LabeledEmbeddingSet& s, int max_epochs) {
  const Eigen::Index dim = s.embeddings[0].size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim + 1);
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    int mistakes = 0;
    for (size_t i = 0; i < s.embeddings.size(); ++i) {
      Eigen::VectorXd x(dim + 1);
      x.head(dim) = s.embeddings[i].cast<double>();
      x[dim] = 1.0;
      const double y = (s.labels[i] == "lgA") ? 1.0 : -1.0;
      if (y * w.dot(x) <= 0.0) {
        w += y * x;
        ++mistakes;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("probes") {

TEST_CASE("mean and standard error on tiny hand cases") {
  MeanSe a = awe::mean_se({2.0, 4.0});
  CHECK(a.mean == 3.0);
  CHECK(a.se == 1.0);
  CHECK(a.n == 2);
  MeanSe b = awe::mean_se({5.0});
  CHECK(b.mean == 5.0);
  CHECK(b.se == 0.0);
  CHECK(contains(error_of([] { awe::mean_se({}); }), "empty"));
}

TEST_CASE("mean and standard error match a direct recomputation") {
  awe::Rng rng(40);
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) v.push_back(rng.uniform(-3.0, 7.0));
  MeanSe m = awe::mean_se(v);

  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / 20.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / 19.0) / std::sqrt(20.0);
  CHECK(std::fabs(m.mean - mean) <= 1e-12);
  CHECK(std::fabs(m.se - se) <= 1e-12);
}

TEST_CASE("identical groups score a large p-value") {
  std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
  PermutationResult r = awe::permutation_test(a, a, 2000, 50);
  CHECK(r.p > 0.5);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("maximally separated groups score p at or below 0.01") {
  std::vector<double> a(5, 0.0), b(5, 9.0);
  PermutationResult r = awe::permutation_test(a, b, 10000, 51);
  CHECK(r.p <= 0.01);
  CHECK(r.observed == 9.0);
}

TEST_CASE("three versus three matches exhaustive enumeration") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {6.0, 7.0, 9.0};
  const std::vector<double> pool = {1.0, 2.0, 3.0, 6.0, 7.0, 9.0};
  const double observed =
      std::fabs((a[0] + a[1] + a[2]) / 3.0 - (b[0] + b[1] + b[2]) / 3.0);

  int hits = 0, splits = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int k = j + 1; k < 6; ++k) {
        double sa = pool[i] + pool[j] + pool[k];
        double sb = 0.0;
        for (int t = 0; t < 6; ++t)
          if (t != i && t != j && t != k) sb += pool[t];
        if (std::fabs(sa / 3.0 - sb / 3.0) >= observed) ++hits;
        ++splits;
      }
  REQUIRE(splits == 20);
  const double exact = static_cast<double>(hits) / 20.0;

  PermutationResult r = awe::permutation_test(a, b, 10000, 52);
  CHECK(std::fabs(r.p - exact) <= 0.02);
}

TEST_CASE("degenerate input is flagged with p equal to one") {
  std::vector<double> a = {3.0, 3.0};
  std::vector<double> b = {3.0, 3.0, 3.0};
  PermutationResult r = awe::permutation_test(a, b, 1000, 53);
  CHECK(r.degenerate);
  CHECK(r.p == 1.0);
}

TEST_CASE("permutation test validates input and repeats exactly") {
  std::vector<double> a = {1.0, 2.0}, b = {3.0, 4.0};
  CHECK(contains(error_of([&] { awe::permutation_test(a, b, 999, 1); }),
                 "at least 1000"));
  CHECK(contains(error_of([&] { awe::permutation_test({}, b, 1000, 1); }),
                 "non-empty"));
  PermutationResult r1 = awe::permutation_test(a, b, 1000, 54);
  PermutationResult r2 = awe::permutation_test(a, b, 1000, 54);
  CHECK(r1.p == r2.p);
}

TEST_CASE("null p-values are roughly uniform") {
  awe::Rng world(55);
  int below = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 6; ++i) a.push_back(world.normal());
    for (int i = 0; i < 6; ++i) b.push_back(world.normal());
    PermutationResult r =
        awe::permutation_test(a, b, 1000, 900 + static_cast<uint64_t>(rep));
    if (r.p < 0.05) ++below;
  }
  const double rate = static_cast<double>(below) / reps;
  CHECK(rate >= 0.01);
  CHECK(rate <= 0.10);
}

TEST_CASE("separable clusters probe at 99 percent or better") {
  LabeledEmbeddingSet s = cluster_set(50, 6, 3.0, 0.3, 60);
  REQUIRE(perceptron_separates(s, 1000));
  ProbeResult r = awe::train_language_probe(s);
  CHECK(r.accuracy >= 99.0);
  CHECK(r.n_train == 80);
  CHECK(r.n_test == 20);
}

TEST_CASE("shuffled labels probe at chance") {
  awe::Rng rng(61);
  LabeledEmbeddingSet s;
  s.split_seed = 62;
  for (int i = 0; i < 10000; ++i) {
    Embedding v(4);
    for (int k = 0; k < 4; ++k) v[k] = static_cast<float>(rng.normal());
    s.embeddings.push_back(v);
    s.labels.push_back(i % 2 == 0 ? "lgA" : "lgB");
  }
  ProbeResult r = awe::train_language_probe(s);
  CHECK(r.accuracy > 47.0);
  CHECK(r.accuracy < 53.0);
}

TEST_CASE("probe rejects bad label sets") {
  LabeledEmbeddingSet s = cluster_set(20, 4, 3.0, 0.3, 63);
  LabeledEmbeddingSet one = s;
  for (auto& l : one.labels) l = "lgA";
  CHECK(contains(error_of([&] { awe::train_language_probe(one); }),
                 "exactly 2 distinct labels"));

  LabeledEmbeddingSet three = s;
  three.labels[0] = "lgC";
  CHECK(contains(error_of([&] { awe::train_language_probe(three); }),
                 "exactly 2 distinct labels"));

  LabeledEmbeddingSet few = cluster_set(9, 4, 3.0, 0.3, 64);
  CHECK(contains(error_of([&] { awe::train_language_probe(few); }),
                 "at least 10"));

  LabeledEmbeddingSet mixed = s;
  mixed.embeddings[3] = Embedding::Ones(7);
  CHECK(contains(error_of([&] { awe::train_language_probe(mixed); }),
                 "mixed dimensions"));

  LabeledEmbeddingSet uneven = s;
  uneven.labels.pop_back();
  CHECK(contains(error_of([&] { awe::train_language_probe(uneven); }),
                 "equal length"));
}

TEST_CASE("split sizes follow the stratified 80/20 rule per label") {
  // 37 lgA + 23 lgB: round(0.8*37)=30 and round(0.8*23)=18 train samples.
  awe::Rng rng(65);
  LabeledEmbeddingSet s;
  s.split_seed = 66;
  for (int i = 0; i < 37; ++i) {
    Embedding v(3);
    for (int k = 0; k < 3; ++k) v[k] = static_cast<float>(rng.normal() + 2.0);
    s.embeddings.push_back(v);
    s.labels.push_back("lgA");
  }
  for (int i = 0; i < 23; ++i) {
    Embedding v(3);
    for (int k = 0; k < 3; ++k) v[k] = static_cast<float>(rng.normal() - 2.0);
    s.embeddings.push_back(v);
    s.labels.push_back("lgB");
  }
  ProbeResult r = awe::train_language_probe(s);
  CHECK(r.n_train == 48);
  CHECK(r.n_test == 12);
}

TEST_CASE("probe is deterministic under the split seed") {
  LabeledEmbeddingSet s = cluster_set(30, 5, 1.0, 1.0, 67);
  ProbeResult r1 = awe::train_language_probe(s);
  ProbeResult r2 = awe::train_language_probe(s);
  CHECK(r1.accuracy == r2.accuracy);
  CHECK(r1.bias == r2.bias);
  CHECK(r1.weights == r2.weights);

  LabeledEmbeddingSet other = s;
  other.split_seed = 99;
  ProbeResult r3 = awe::train_language_probe(other);
  CHECK(r3.n_train == r1.n_train);  // sizes fixed even if membership moves
}

TEST_CASE("accuracy is rotation invariant without regularization") {
  LabeledEmbeddingSet s = cluster_set(25, 5, 1.2, 1.0, 68);
  ProbeResult base = awe::train_language_probe(s, 0.0);

  awe::Rng rng(69);
  Eigen::MatrixXd m(5, 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) m(r, c) = rng.normal();
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();

  LabeledEmbeddingSet rotated = s;
  for (auto& e : rotated.embeddings)
    e = (q * e.cast<double>()).cast<float>();
  ProbeResult rot = awe::train_language_probe(rotated, 0.0);
  CHECK(std::fabs(rot.accuracy - base.accuracy) <= 1e-6);
}

TEST_CASE("probe results serialize with optional weights") {
  LabeledEmbeddingSet s = cluster_set(10, 3, 3.0, 0.2, 70);
  ProbeResult r = awe::train_language_probe(s);
  auto j = nlohmann::json::parse(awe::probe_result_json(r));
  CHECK(j.at("accuracy").get<double>() == r.accuracy);
  CHECK(j.at("n_train").get<uint64_t>() == r.n_train);
  CHECK(j.at("label_pos").get<std::string>() == "lgB");
  CHECK_FALSE(j.contains("weights"));
  auto jw = nlohmann::json::parse(awe::probe_result_json(r, true));
  CHECK(jw.at("weights").size() == 3);
}

}  // TEST_SUITE
