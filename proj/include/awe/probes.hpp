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

#ifndef AWE_PROBES_HPP_
#define AWE_PROBES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "awe/types.hpp"

namespace awe {

struct LabeledEmbeddingSet {
  std::vector<Embedding> embeddings;
  std::vector<std::string> labels;  // parallel to embeddings, 2 distinct
  uint64_t split_seed = 0;
};

struct ProbeResult {
  double accuracy = 0.0;  // percent on the held-out test split
  uint64_t n_train = 0;
  uint64_t n_test = 0;
  std::string label_neg;  // class scored below 0
  std::string label_pos;  // class scored at or above 0
  Eigen::VectorXd weights;
  double bias = 0.0;
  uint64_t iterations = 0;
  double final_grad_norm = 0.0;
};

// Binary logistic regression on a stratified 80/20 split. Full-batch
// gradient descent with a fixed step from the curvature bound, stopping at
// gradient norm 1e-6 or 1e4 iterations. The bias is not penalized.
ProbeResult train_language_probe(const LabeledEmbeddingSet& s,
                                 double l2_lambda = 1e-4);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sd over sqrt(n), sample sd with n-1
  uint64_t n = 0;
};

MeanSe mean_se(const std::vector<double>& values);

struct PermutationResult {
  double p = 1.0;
  bool degenerate = false;  // all values identical across both groups
  double observed = 0.0;    // |mean(a) - mean(b)|
};

// Two-sided permutation test for a difference in group means with add-one
// smoothing: p = (1 + #{perm >= observed}) / (n_perm + 1).
PermutationResult permutation_test(const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   uint64_t n_perm, uint64_t seed);

std::string probe_result_json(const ProbeResult& r,
                              bool include_weights = false);

}  // namespace awe

#endif  // AWE_PROBES_HPP_
