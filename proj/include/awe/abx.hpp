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

#ifndef AWE_ABX_HPP_
#define AWE_ABX_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/types.hpp"

namespace awe {

// Embeddable stretch of speech: a whole word token or one phone sliced out
// of it. Frames [begin_frame, end_frame) of the backing feature cell.
struct Segment {
  std::string id;
  std::string type_label;  // word type or phone symbol
  std::string speaker_id;
  double duration_ms = 0.0;
  std::shared_ptr<const FeatureCell> cell;
  uint32_t begin_frame = 0;
  uint32_t end_frame = 0;

  FeatureMatrix slice() const;
};

Segment word_segment(const WordToken& tok);
Segment phone_segment(const WordToken& tok, size_t phone_index);

// Indices into AbxTask::segments. A and X share a type label, B differs.
struct AbxTriplet {
  uint32_t a = 0;
  uint32_t b = 0;
  uint32_t x = 0;
  std::string contrast_meta;
};

struct AbxTask {
  std::string name;
  std::vector<Segment> segments;
  std::vector<AbxTriplet> triplets;
  std::string notice;  // set when a sampler falls short of the request
};

enum class TrialOutcome { kCorrect, kIncorrect, kTie };

struct AbxResult {
  std::string task;
  uint64_t n_trials = 0;
  uint64_t n_ties = 0;
  double n_correct = 0.0;  // ties count 0.5
  double error_rate = 0.0;  // percent, 100*(1 - n_correct/n_trials)
};

// Angle between u and v as a fraction of pi, in [0, 1]. Identical direction
// gives 0, orthogonal 0.5, opposite 1. Magnitudes are ignored. Computed as
// 2*atan2(|u'-v'|, |u'+v'|)/pi over normalized copies, which equals
// arccos(cos_sim)/pi but is exact at the endpoints.
double angular_cosine_distance(const Embedding& u, const Embedding& v);

TrialOutcome abx_trial(const Embedding& a, const Embedding& b,
                       const Embedding& x);

using Embedder = std::function<Embedding(const FeatureMatrix&)>;

// Embeds every segment once, then adjudicates all triplets.
AbxResult abx_error_rate(const AbxTask& task, const Embedder& embedder);

// Unit-cost Levenshtein distance over phone symbols.
int phone_edit_distance(const std::vector<std::string>& p,
                        const std::vector<std::string>& q);

struct SamplerOptions {
  bool distinct_speakers = false;  // A, B, X from three different speakers
};

// Phone discrimination: A and X are instances of one phone of the contrast,
// B of the other. Roles alternate between the two phones so the task is
// balanced. Requires phone-level alignments on the corpus tokens.
AbxTask sample_phone_triplets(const Corpus& corpus, const std::string& phone1,
                              const std::string& phone2, uint64_t n,
                              uint64_t seed, const SamplerOptions& opts = {});

// Word discrimination over one minimal pair; roles alternate as above.
AbxTask sample_minimal_pair_triplets(const Corpus& corpus,
                                     const std::string& word1,
                                     const std::string& word2, uint64_t n,
                                     uint64_t seed,
                                     const SamplerOptions& opts = {});

// Word discrimination bucketed by phone edit distance: B and X differ in
// exactly `distance` phones, every word has 4 to 10 phones, all pairwise
// duration ratios are at most 1.1, and B and X have different lemmas when
// lemmas are annotated. Returns up to n_max triplets; falls short with a
// notice once the rejection budget is spent.
AbxTask sample_edit_distance_triplets(const Corpus& corpus, int distance,
                                      uint64_t n_max, uint64_t seed,
                                      const SamplerOptions& opts = {});

// One JSON object per line: {"a", "b", "x", "contrast_meta"} with segment
// ids for a/b/x.
void write_triplets(const std::string& path, const AbxTask& task);

std::string abx_result_json(const AbxResult& r);
std::string abx_csv_header();
std::string abx_csv_row(const AbxResult& r);

}  // namespace awe

#endif  // AWE_ABX_HPP_
