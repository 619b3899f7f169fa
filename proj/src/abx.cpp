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

#include "awe/abx.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "awe/rng.hpp"

namespace awe {

namespace {

using nlohmann::json;

// Rejected candidate draws allowed before a sampler declares shortage.
constexpr uint64_t kRejectionCap = 10'000'000;

bool speakers_distinct(const Segment& a, const Segment& b, const Segment& x) {
  return a.speaker_id != b.speaker_id && a.speaker_id != x.speaker_id &&
         b.speaker_id != x.speaker_id;
}

}  // namespace

FeatureMatrix Segment::slice() const {
  require(cell != nullptr, "segment " + id + " has no features");
  const FeatureMatrix& full = cell->get();
  require(end_frame > begin_frame &&
              end_frame <= static_cast<uint32_t>(full.rows()),
          "segment " + id + " frame range out of bounds");
  return full.middleRows(begin_frame, end_frame - begin_frame);
}

Segment word_segment(const WordToken& tok) {
  Segment s;
  s.id = tok.token_id;
  s.type_label = tok.word_type;
  s.speaker_id = tok.speaker_id;
  s.duration_ms = tok.duration_ms;
  s.cell = tok.cell;
  s.begin_frame = 0;
  s.end_frame = tok.frames;
  return s;
}

Segment phone_segment(const WordToken& tok, size_t phone_index) {
  require(tok.phone_spans.has_value(),
          "token " + tok.token_id + " has no phone alignments");
  require(phone_index < tok.phones.size(),
          "token " + tok.token_id + ": phone index out of range");
  const PhoneSpan& span = (*tok.phone_spans)[phone_index];
  Segment s;
  s.id = tok.token_id + "#" + std::to_string(phone_index);
  s.type_label = tok.phones[phone_index];
  s.speaker_id = tok.speaker_id;
  s.duration_ms = frames_to_ms(span.end_frame - span.begin_frame);
  s.cell = tok.cell;
  s.begin_frame = span.begin_frame;
  s.end_frame = span.end_frame;
  return s;
}

double angular_cosine_distance(const Embedding& u, const Embedding& v) {
  require(u.size() == v.size(),
          "angular distance needs equal dimensions, got " +
              std::to_string(u.size()) + " and " + std::to_string(v.size()));
  require(u.size() > 0, "angular distance of empty vectors");
  Eigen::VectorXd ud = u.cast<double>();
  Eigen::VectorXd vd = v.cast<double>();
  const double un = ud.norm();
  const double vn = vd.norm();
  require(un > 0.0 && vn > 0.0, "angular distance of a zero vector");
  ud /= un;
  vd /= vn;
  const double half = std::atan2((ud - vd).norm(), (ud + vd).norm());
  return 2.0 * half / M_PI;
}

TrialOutcome abx_trial(const Embedding& a, const Embedding& b,
                       const Embedding& x) {
  const double da = angular_cosine_distance(a, x);
  const double db = angular_cosine_distance(b, x);
  if (da < db) return TrialOutcome::kCorrect;
  if (da > db) return TrialOutcome::kIncorrect;
  return TrialOutcome::kTie;
}

AbxResult abx_error_rate(const AbxTask& task, const Embedder& embedder) {
  require(!task.triplets.empty(), "task " + task.name + " has no triplets");
  std::vector<Embedding> emb(task.segments.size());
  for (size_t i = 0; i < task.segments.size(); ++i)
    emb[i] = embedder(task.segments[i].slice());

  AbxResult r;
  r.task = task.name;
  r.n_trials = task.triplets.size();
  // Increments are multiples of 0.5, so the sum is exact in any order.
  for (const AbxTriplet& t : task.triplets) {
    require(t.a < emb.size() && t.b < emb.size() && t.x < emb.size(),
            "task " + task.name + " has a triplet index out of range");
    switch (abx_trial(emb[t.a], emb[t.b], emb[t.x])) {
      case TrialOutcome::kCorrect:
        r.n_correct += 1.0;
        break;
      case TrialOutcome::kTie:
        r.n_correct += 0.5;
        ++r.n_ties;
        break;
      case TrialOutcome::kIncorrect:
        break;
    }
  }
  r.error_rate = 100.0 * (1.0 - r.n_correct / static_cast<double>(r.n_trials));
  return r;
}

int phone_edit_distance(const std::vector<std::string>& p,
                        const std::vector<std::string>& q) {
  const size_t n = p.size(), m = q.size();
  std::vector<int> row(m + 1);
  for (size_t j = 0; j <= m; ++j) row[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int sub = diag + (p[i - 1] == q[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[m];
}

namespace {

// Shared body of the two fixed-count samplers. Pool 1 and pool 2 hold the
// segments of the two contrasted types; roles alternate between them.
AbxTask sample_two_pools(AbxTask task, const std::vector<uint32_t>& pool1,
                         const std::vector<uint32_t>& pool2,
                         const std::string& label1, const std::string& label2,
                         const std::string& meta_kind, uint64_t n,
                         uint64_t seed, const SamplerOptions& opts) {
  Rng rng(mix_seed(seed, "abx." + meta_kind));
  uint64_t rejections = 0;
  for (uint64_t t = 0; t < n; ++t) {
    const bool first_is_target = (t % 2 == 0);
    const std::vector<uint32_t>& tp = first_is_target ? pool1 : pool2;
    const std::vector<uint32_t>& op = first_is_target ? pool2 : pool1;
    for (;;) {
      require(rejections < kRejectionCap,
              "task " + task.name + ": could not assemble " +
                  std::to_string(n) + " triplets within the rejection budget");
      const uint32_t a = tp[rng.below(tp.size())];
      const uint32_t x = tp[rng.below(tp.size())];
      const uint32_t b = op[rng.below(op.size())];
      if (a == x || (opts.distinct_speakers &&
                     !speakers_distinct(task.segments[a], task.segments[b],
                                        task.segments[x]))) {
        ++rejections;
        continue;
      }
      AbxTriplet tr;
      tr.a = a;
      tr.b = b;
      tr.x = x;
      tr.contrast_meta = meta_kind + ":" +
                         (first_is_target ? label1 : label2) + "|" +
                         (first_is_target ? label2 : label1);
      task.triplets.push_back(std::move(tr));
      break;
    }
  }
  return task;
}

}  // namespace

AbxTask sample_phone_triplets(const Corpus& corpus, const std::string& phone1,
                              const std::string& phone2, uint64_t n,
                              uint64_t seed, const SamplerOptions& opts) {
  require(phone1 != phone2, "degenerate contrast: '" + phone1 + "' twice");
  require(n >= 1, "need at least one triplet");

  AbxTask task;
  task.name = "phone_" + phone1 + "_" + phone2;
  std::vector<uint32_t> pool1, pool2;
  for (const WordToken& tok : corpus.tokens) {
    if (!tok.phone_spans.has_value()) continue;
    for (size_t k = 0; k < tok.phones.size(); ++k) {
      if (tok.phones[k] != phone1 && tok.phones[k] != phone2) continue;
      auto idx = static_cast<uint32_t>(task.segments.size());
      task.segments.push_back(phone_segment(tok, k));
      (tok.phones[k] == phone1 ? pool1 : pool2).push_back(idx);
    }
  }
  auto check_pool = [&](const std::vector<uint32_t>& pool,
                        const std::string& phone, bool needs_pair) {
    require(!pool.empty(), "phone '" + phone + "' not present with alignments");
    require(!needs_pair || pool.size() >= 2,
            "phone '" + phone + "' has " + std::to_string(pool.size()) +
                " instance(s); the A/X role needs at least 2");
  };
  check_pool(pool1, phone1, n >= 1);
  check_pool(pool2, phone2, n >= 2);
  return sample_two_pools(std::move(task), pool1, pool2, phone1, phone2,
                          "phone", n, seed, opts);
}

AbxTask sample_minimal_pair_triplets(const Corpus& corpus,
                                     const std::string& word1,
                                     const std::string& word2, uint64_t n,
                                     uint64_t seed,
                                     const SamplerOptions& opts) {
  require(word1 != word2, "degenerate pair: '" + word1 + "' twice");
  require(n >= 1, "need at least one triplet");

  AbxTask task;
  task.name = "words_" + word1 + "_" + word2;
  std::vector<uint32_t> pool1, pool2;
  for (const WordToken& tok : corpus.tokens) {
    if (tok.word_type != word1 && tok.word_type != word2) continue;
    auto idx = static_cast<uint32_t>(task.segments.size());
    task.segments.push_back(word_segment(tok));
    (tok.word_type == word1 ? pool1 : pool2).push_back(idx);
  }
  auto check_pool = [&](const std::vector<uint32_t>& pool,
                        const std::string& word, bool needs_pair) {
    require(!pool.empty(), "word type '" + word + "' not present");
    require(!needs_pair || pool.size() >= 2,
            "word type '" + word + "' has " + std::to_string(pool.size()) +
                " token(s); the A/X role needs at least 2");
  };
  check_pool(pool1, word1, n >= 1);
  check_pool(pool2, word2, n >= 2);
  return sample_two_pools(std::move(task), pool1, pool2, word1, word2,
                          "minimal_pair", n, seed, opts);
}

AbxTask sample_edit_distance_triplets(const Corpus& corpus, int distance,
                                      uint64_t n_max, uint64_t seed,
                                      const SamplerOptions& opts) {
  require(distance >= 1, "edit distance must be at least 1");
  require(n_max >= 1, "need at least one triplet");

  AbxTask task;
  task.name = "edit_distance_" + std::to_string(distance);

  // Eligible words carry 4 to 10 phones. toks[i] backs segments[i].
  std::vector<uint32_t> eligible;
  std::map<std::string, std::vector<uint32_t>> by_type;
  std::vector<const WordToken*> toks;
  for (const WordToken& tok : corpus.tokens) {
    if (tok.phones.size() < 4 || tok.phones.size() > 10) continue;
    auto idx = static_cast<uint32_t>(task.segments.size());
    task.segments.push_back(word_segment(tok));
    toks.push_back(&tok);
    eligible.push_back(idx);
    by_type[tok.word_type].push_back(idx);
  }
  require(!eligible.empty(),
          "no eligible triplets for " + task.name +
              ": no words with 4-10 phones");

  Rng rng(mix_seed(seed, "abx.edit_distance", static_cast<uint64_t>(distance)));
  uint64_t rejections = 0;
  bool lemma_gap = false;
  // Distinct triplets only; a redrawn one counts as a rejection.
  std::set<std::array<uint32_t, 3>> seen;
  const std::string meta = "edit_distance:" + std::to_string(distance);
  while (task.triplets.size() < n_max && rejections < kRejectionCap) {
    const uint32_t x = eligible[rng.below(eligible.size())];
    const std::vector<uint32_t>& same = by_type[task.segments[x].type_label];
    if (same.size() < 2) {
      ++rejections;
      continue;
    }
    const uint32_t a = same[rng.below(same.size())];
    const uint32_t b = eligible[rng.below(eligible.size())];
    const Segment &sa = task.segments[a], &sb = task.segments[b],
                  &sx = task.segments[x];
    bool ok = a != x && sb.type_label != sx.type_label;
    if (ok) {
      const double lo = std::min({sa.duration_ms, sb.duration_ms,
                                  sx.duration_ms});
      const double hi = std::max({sa.duration_ms, sb.duration_ms,
                                  sx.duration_ms});
      ok = hi <= 1.1 * lo;
    }
    if (ok) ok = phone_edit_distance(toks[b]->phones, toks[x]->phones) ==
                 distance;
    if (ok) {
      if (toks[b]->lemma.has_value() && toks[x]->lemma.has_value()) {
        ok = *toks[b]->lemma != *toks[x]->lemma;
      } else {
        lemma_gap = true;
      }
    }
    if (ok && opts.distinct_speakers) ok = speakers_distinct(sa, sb, sx);
    if (ok) ok = seen.insert({a, b, x}).second;
    if (!ok) {
      ++rejections;
      continue;
    }
    AbxTriplet tr;
    tr.a = a;
    tr.b = b;
    tr.x = x;
    tr.contrast_meta = meta;
    task.triplets.push_back(std::move(tr));
  }

  require(!task.triplets.empty(), "no eligible triplets for " + task.name);
  if (task.triplets.size() < n_max) {
    task.notice = "requested " + std::to_string(n_max) + " triplets, found " +
                  std::to_string(task.triplets.size());
  }
  if (lemma_gap) {
    if (!task.notice.empty()) task.notice += "; ";
    task.notice +=
        "lemma annotations incomplete, morphological exclusion skipped for "
        "unannotated pairs";
  }
  return task;
}

void write_triplets(const std::string& path, const AbxTask& task) {
  std::ofstream os(path);
  require(os.good(), "cannot open " + path + " for writing");
  for (const AbxTriplet& t : task.triplets) {
    json j;
    j["a"] = task.segments[t.a].id;
    j["b"] = task.segments[t.b].id;
    j["x"] = task.segments[t.x].id;
    j["contrast_meta"] = t.contrast_meta;
    os << j.dump() << "\n";
  }
  require(os.good(), "failed writing " + path);
}

std::string abx_result_json(const AbxResult& r) {
  json j;
  j["task"] = r.task;
  j["n_trials"] = r.n_trials;
  j["n_ties"] = r.n_ties;
  j["error_rate"] = r.error_rate;
  return j.dump();
}

std::string abx_csv_header() { return "task,n_trials,n_ties,error_rate"; }

std::string abx_csv_row(const AbxResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%llu,%llu,%.6f",
                static_cast<unsigned long long>(r.n_trials),
                static_cast<unsigned long long>(r.n_ties), r.error_rate);
  return r.task + "," + buf;
}

}  // namespace awe
