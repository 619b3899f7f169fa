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

#ifndef AWE_CORPUS_HPP_
#define AWE_CORPUS_HPP_

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "awe/types.hpp"

namespace awe {

enum class Gender { kFemale, kMale, kOther };

Gender parse_gender(const std::string& s);
std::string gender_str(Gender g);

// Frame range [begin, end) of one phone inside a token's feature matrix.
struct PhoneSpan {
  uint32_t begin_frame = 0;
  uint32_t end_frame = 0;
};

// Holds a token's features, either eagerly or behind a one-shot loader.
// Immutable from the outside; safe to share across threads.
class FeatureCell {
 public:
  explicit FeatureCell(FeatureMatrix m)
      : loaded_(true), feats_(std::move(m)) {}
  explicit FeatureCell(std::function<FeatureMatrix()> loader)
      : loaded_(false), loader_(std::move(loader)) {}

  const FeatureMatrix& get() const {
    std::call_once(once_, [this] {
      if (!loaded_) {
        feats_ = loader_();
        loader_ = nullptr;
        loaded_ = true;
      }
    });
    return feats_;
  }

 private:
  mutable std::once_flag once_;
  mutable bool loaded_;
  mutable FeatureMatrix feats_;
  mutable std::function<FeatureMatrix()> loader_;
};

struct WordToken {
  std::string token_id;
  std::string word_type;
  std::vector<std::string> phones;
  std::optional<std::string> lemma;
  std::string speaker_id;
  Gender speaker_gender = Gender::kOther;
  std::string language;
  uint32_t frames = 0;       // feature rows
  double duration_ms = 0.0;  // always frames*10 + 15
  std::optional<std::vector<PhoneSpan>> phone_spans;
  std::shared_ptr<const FeatureCell> cell;

  const FeatureMatrix& features() const {
    require(cell != nullptr, "token " + token_id + " has no features");
    return cell->get();
  }
};

struct Corpus {
  std::string language;
  std::vector<WordToken> tokens;

  double total_duration_ms() const;
  std::string total_duration_hhmm() const;
  std::set<std::string> speaker_set() const;
};

// Pair of indices into a token list; input is encoded, target reconstructed.
struct TrainingPair {
  uint32_t input = 0;
  uint32_t target = 0;
};

struct TrainingSet {
  std::vector<WordToken> tokens;      // pretraining pool; pairs index into it
  std::vector<TrainingPair> pairs;
  int share_a = 100;                  // percent from the first language
  int share_b = 0;
};

struct PairOptions {
  bool cross_speaker_only = false;
};

// Manifest: UTF-8 JSON-lines, one object per token:
//   {token_id, word_type, phones: [string], lemma?, speaker_id,
//    speaker_gender ("F"|"M"|"other"), language,
//    audio_path OR feature_path, start_ms, end_ms, phone_end_frames?}
// Paths are resolved relative to the manifest's directory. phone_end_frames,
// when present, lists each phone's exclusive end frame in increasing order.
Corpus load_manifest(const std::string& path, bool eager_features = false);

// Writes <feature_dir>/<token>.awef per token plus a manifest that points
// at them; the result round-trips through load_manifest.
void write_manifest(const Corpus& c, const std::string& manifest_path,
                    const std::string& feature_dir);

// Speaker-matched subsets: equal speaker counts per gender, rank-paired by
// total duration, each pair trimmed to its minimum duration by dropping
// whole tokens from the end of a deterministically shuffled order.
std::pair<Corpus, Corpus> match_subsets(const Corpus& a, const Corpus& b);

// Tokens of the most frequent word types, whole types in rank order until
// the budget is met, the last type truncated in token_id order.
std::vector<WordToken> select_most_frequent(const Corpus& c,
                                            int64_t token_budget);

// m ordered same-type distinct-token pairs, uniform with replacement over
// the pool of all such pairs.
std::vector<TrainingPair> generate_pairs(const std::vector<WordToken>& tokens,
                                         int64_t m, uint64_t seed,
                                         const PairOptions& opts = {});

// Ratio-mixed training set. Token and pair totals always equal the budgets,
// so bilingual and monolingual runs see the same amount of data.
TrainingSet mix_bilingual(const Corpus& a, const Corpus& b,
                          std::pair<int, int> ratio, int64_t token_budget,
                          int64_t pair_budget, uint64_t seed,
                          const PairOptions& opts = {});

// Synthetic corpus generation: each token is a concatenation of per-phone
// segments (prototype + speaker offset + noise), with full metadata.
struct SynthPhone {
  std::string symbol;
  Eigen::VectorXf mean;  // 13-dim
};

struct SynthWord {
  std::string word_type;
  std::vector<std::string> phones;
  std::optional<std::string> lemma;  // defaults to word_type
};

struct SynthSpeaker {
  std::string id;
  Gender gender = Gender::kOther;
  Eigen::VectorXf offset;  // 13-dim additive
};

struct SynthSpec {
  std::string language;
  std::vector<SynthPhone> phones;
  std::vector<SynthWord> words;
  std::vector<SynthSpeaker> speakers;
  int tokens_per_type = 1;  // per (word type, speaker)
  double noise_scale = 0.1;
  int min_frames_per_phone = 3;
  int max_frames_per_phone = 8;
};

SynthSpec parse_synth_spec(const nlohmann::json& j);
Corpus synth_corpus(const SynthSpec& spec, uint64_t seed);

}  // namespace awe

#endif  // AWE_CORPUS_HPP_
