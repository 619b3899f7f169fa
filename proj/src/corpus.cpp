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

#include "awe/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_set>

#include "awe/frontend.hpp"
#include "awe/io.hpp"
#include "awe/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace awe {

Gender parse_gender(const std::string& s) {
  if (s == "F") return Gender::kFemale;
  if (s == "M") return Gender::kMale;
  if (s == "other") return Gender::kOther;
  fail("invalid speaker_gender '" + s + "' (expected F, M or other)");
}

std::string gender_str(Gender g) {
  switch (g) {
    case Gender::kFemale: return "F";
    case Gender::kMale: return "M";
    default: return "other";
  }
}

double Corpus::total_duration_ms() const {
  double total = 0.0;
  for (const auto& t : tokens) total += t.duration_ms;
  return total;
}

std::string Corpus::total_duration_hhmm() const {
  auto minutes = static_cast<long>(total_duration_ms() / 60000.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld:%02ld", minutes / 60, minutes % 60);
  return buf;
}

std::set<std::string> Corpus::speaker_set() const {
  std::set<std::string> s;
  for (const auto& t : tokens) s.insert(t.speaker_id);
  return s;
}

namespace {

std::string row_ctx(size_t row, const std::string& token_id) {
  std::string ctx = "manifest row " + std::to_string(row);
  if (!token_id.empty()) ctx += " (token " + token_id + ")";
  return ctx;
}

FeatureMatrix load_audio_features(const std::string& path, double start_ms,
                                  double end_ms) {
  Waveform w = read_wav(path);
  auto begin = static_cast<size_t>(start_ms * w.sample_rate / 1000.0);
  auto end = static_cast<size_t>(end_ms * w.sample_rate / 1000.0);
  require(end <= w.samples.size(),
          path + ": alignment [" + std::to_string(start_ms) + ", " +
              std::to_string(end_ms) + ") ms exceeds the audio");
  Waveform slice;
  slice.sample_rate = w.sample_rate;
  slice.samples.assign(w.samples.begin() + begin, w.samples.begin() + end);
  return compute_mfcc(slice);
}

}  // namespace

Corpus load_manifest(const std::string& path, bool eager_features) {
  std::ifstream is(path);
  require(bool(is), "cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();

  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(row_ctx(row, "") + ": invalid JSON: " + e.what());
    }

    WordToken tok;
    try {
      tok.token_id = j.at("token_id").get<std::string>();
      tok.word_type = j.at("word_type").get<std::string>();
      tok.phones = j.at("phones").get<std::vector<std::string>>();
      if (j.contains("lemma")) tok.lemma = j.at("lemma").get<std::string>();
      tok.speaker_id = j.at("speaker_id").get<std::string>();
      tok.speaker_gender =
          parse_gender(j.at("speaker_gender").get<std::string>());
      tok.language = j.at("language").get<std::string>();
    } catch (const json::exception& e) {
      fail(row_ctx(row, tok.token_id) + ": " + e.what());
    }

    require(!tok.token_id.empty(), row_ctx(row, "") + ": empty token_id");
    require(seen_ids.insert(tok.token_id).second,
            row_ctx(row, tok.token_id) + ": duplicate token_id");
    require(!tok.phones.empty(),
            row_ctx(row, tok.token_id) + ": empty phone sequence");
    for (const auto& p : tok.phones)
      require(!p.empty(), row_ctx(row, tok.token_id) + ": blank phone symbol");

    if (corpus.tokens.empty()) {
      corpus.language = tok.language;
    } else {
      require(tok.language == corpus.language,
              row_ctx(row, tok.token_id) + ": language '" + tok.language +
                  "' differs from corpus language '" + corpus.language + "'");
    }

    const bool has_audio = j.contains("audio_path");
    const bool has_feats = j.contains("feature_path");
    require(has_audio != has_feats,
            row_ctx(row, tok.token_id) +
                ": need exactly one of audio_path or feature_path");
    double start_ms = 0, end_ms = 0;
    try {
      start_ms = j.at("start_ms").get<double>();
      end_ms = j.at("end_ms").get<double>();
    } catch (const json::exception& e) {
      fail(row_ctx(row, tok.token_id) + ": " + e.what());
    }
    require(end_ms > start_ms,
            row_ctx(row, tok.token_id) + ": alignment end_ms <= start_ms");

    if (has_audio) {
      std::string apath =
          (base / j.at("audio_path").get<std::string>()).string();
      WavInfo info;
      try {
        info = read_wav_header(apath);
      } catch (const Error& e) {
        fail(row_ctx(row, tok.token_id) + ": " + e.what());
      }
      auto begin = static_cast<size_t>(start_ms * info.sample_rate / 1000.0);
      auto end = static_cast<size_t>(end_ms * info.sample_rate / 1000.0);
      require(end <= info.num_samples,
              row_ctx(row, tok.token_id) + ": alignment exceeds audio length");
      Eigen::Index nf;
      try {
        nf = num_frames(end - begin, info.sample_rate);
      } catch (const Error& e) {
        fail(row_ctx(row, tok.token_id) + ": " + e.what());
      }
      tok.frames = static_cast<uint32_t>(nf);
      tok.cell = std::make_shared<FeatureCell>(
          [apath, start_ms, end_ms] {
            return load_audio_features(apath, start_ms, end_ms);
          });
    } else {
      std::string fpath =
          (base / j.at("feature_path").get<std::string>()).string();
      AwefInfo info;
      try {
        info = read_awef_header(fpath);
      } catch (const Error& e) {
        fail(row_ctx(row, tok.token_id) + ": " + e.what());
      }
      require(info.dim == kMfccDim,
              row_ctx(row, tok.token_id) + ": feature dim " +
                  std::to_string(info.dim) + ", expected 13");
      require(info.frames >= 1,
              row_ctx(row, tok.token_id) + ": empty feature file");
      tok.frames = info.frames;
      tok.cell = std::make_shared<FeatureCell>(
          [fpath] { return read_awef(fpath); });
    }
    tok.duration_ms = frames_to_ms(tok.frames);

    if (j.contains("phone_end_frames")) {
      std::vector<uint32_t> ends;
      try {
        ends = j.at("phone_end_frames").get<std::vector<uint32_t>>();
      } catch (const json::exception& e) {
        fail(row_ctx(row, tok.token_id) + ": " + e.what());
      }
      require(ends.size() == tok.phones.size(),
              row_ctx(row, tok.token_id) +
                  ": phone_end_frames length differs from phones");
      std::vector<PhoneSpan> spans;
      uint32_t prev = 0;
      for (uint32_t e : ends) {
        require(e > prev, row_ctx(row, tok.token_id) +
                              ": phone_end_frames not strictly increasing");
        spans.push_back({prev, e});
        prev = e;
      }
      require(prev == tok.frames,
              row_ctx(row, tok.token_id) +
                  ": phone_end_frames do not cover the token's frames");
      tok.phone_spans = std::move(spans);
    }

    if (eager_features) {
      const FeatureMatrix& m = tok.features();
      require(static_cast<uint32_t>(m.rows()) == tok.frames,
              row_ctx(row, tok.token_id) + ": feature rows changed on load");
    }
    corpus.tokens.push_back(std::move(tok));
  }
  return corpus;
}

void write_manifest(const Corpus& c, const std::string& manifest_path,
                    const std::string& feature_dir) {
  fs::create_directories(feature_dir);
  fs::path base = fs::path(manifest_path).parent_path();
  if (base.empty()) base = ".";
  std::ofstream os(manifest_path);
  require(bool(os), "cannot write manifest: " + manifest_path);

  for (const auto& tok : c.tokens) {
    std::string fname = tok.token_id;
    for (char& ch : fname)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' &&
          ch != '_' && ch != '.')
        ch = '_';
    fs::path fpath = fs::path(feature_dir) / (fname + ".awef");
    write_awef(fpath.string(), tok.features());

    json j;
    j["token_id"] = tok.token_id;
    j["word_type"] = tok.word_type;
    j["phones"] = tok.phones;
    if (tok.lemma) j["lemma"] = *tok.lemma;
    j["speaker_id"] = tok.speaker_id;
    j["speaker_gender"] = gender_str(tok.speaker_gender);
    j["language"] = tok.language;
    j["feature_path"] = fs::relative(fpath, base).string();
    j["start_ms"] = 0.0;
    j["end_ms"] = tok.duration_ms;
    if (tok.phone_spans) {
      std::vector<uint32_t> ends;
      for (const auto& s : *tok.phone_spans) ends.push_back(s.end_frame);
      j["phone_end_frames"] = ends;
    }
    os << j.dump() << "\n";
  }
  require(bool(os), "failed writing manifest: " + manifest_path);
}

namespace {

struct SpeakerInfo {
  std::string id;
  Gender gender = Gender::kOther;
  double duration_ms = 0.0;
  std::vector<uint32_t> token_idx;
};

std::vector<SpeakerInfo> speaker_stats(const Corpus& c) {
  std::map<std::string, SpeakerInfo> by_id;
  for (uint32_t i = 0; i < c.tokens.size(); ++i) {
    const auto& t = c.tokens[i];
    auto& info = by_id[t.speaker_id];
    if (info.token_idx.empty()) {
      info.id = t.speaker_id;
      info.gender = t.speaker_gender;
    } else {
      require(info.gender == t.speaker_gender,
              "speaker " + t.speaker_id + " has inconsistent gender labels");
    }
    info.duration_ms += t.duration_ms;
    info.token_idx.push_back(i);
  }
  std::vector<SpeakerInfo> out;
  for (auto& [id, info] : by_id) out.push_back(std::move(info));
  return out;
}

// Longest speakers first; id breaks ties, so the order is total.
bool by_duration_desc(const SpeakerInfo& a, const SpeakerInfo& b) {
  if (a.duration_ms != b.duration_ms) return a.duration_ms > b.duration_ms;
  return a.id < b.id;
}

// Kept token indices for one speaker after trimming to target_ms. A matched
// speaker always keeps at least one token, so speaker counts stay equal.
std::vector<uint32_t> trim_speaker(const Corpus& c, const SpeakerInfo& spk,
                                   double target_ms) {
  std::vector<uint32_t> order = spk.token_idx;
  Rng rng(mix_seed(0x6d617463ULL, spk.id));  // fixed stream per speaker
  rng.shuffle(order);
  double dur = spk.duration_ms;
  size_t keep = order.size();
  while (keep > 1 && dur > target_ms) {
    --keep;
    dur -= c.tokens[order[keep]].duration_ms;
  }
  order.resize(keep);
  std::sort(order.begin(), order.end());  // restore corpus order
  return order;
}

}  // namespace

std::pair<Corpus, Corpus> match_subsets(const Corpus& a, const Corpus& b) {
  require(!a.tokens.empty() && !b.tokens.empty(),
          "match_subsets: empty corpus");
  auto spk_a = speaker_stats(a);
  auto spk_b = speaker_stats(b);

  std::vector<uint32_t> keep_a, keep_b;
  for (Gender g : {Gender::kFemale, Gender::kMale, Gender::kOther}) {
    std::vector<SpeakerInfo> ga, gb;
    for (const auto& s : spk_a)
      if (s.gender == g) ga.push_back(s);
    for (const auto& s : spk_b)
      if (s.gender == g) gb.push_back(s);
    if (ga.empty() && gb.empty()) continue;
    require(!ga.empty() && !gb.empty(),
            "match_subsets: cannot match gender '" + gender_str(g) +
                "': present in only one corpus");
    std::sort(ga.begin(), ga.end(), by_duration_desc);
    std::sort(gb.begin(), gb.end(), by_duration_desc);
    size_t k = std::min(ga.size(), gb.size());
    for (size_t i = 0; i < k; ++i) {
      double target = std::min(ga[i].duration_ms, gb[i].duration_ms);
      auto ka = trim_speaker(a, ga[i], target);
      auto kb = trim_speaker(b, gb[i], target);
      keep_a.insert(keep_a.end(), ka.begin(), ka.end());
      keep_b.insert(keep_b.end(), kb.begin(), kb.end());
    }
  }
  std::sort(keep_a.begin(), keep_a.end());
  std::sort(keep_b.begin(), keep_b.end());

  Corpus out_a, out_b;
  out_a.language = a.language;
  out_b.language = b.language;
  for (uint32_t i : keep_a) out_a.tokens.push_back(a.tokens[i]);
  for (uint32_t i : keep_b) out_b.tokens.push_back(b.tokens[i]);
  return {std::move(out_a), std::move(out_b)};
}

std::vector<WordToken> select_most_frequent(const Corpus& c,
                                            int64_t token_budget) {
  require(token_budget >= 0, "token budget must be nonnegative");
  if (token_budget == 0) return {};
  require(static_cast<int64_t>(c.tokens.size()) >= token_budget,
          "language '" + c.language + "' cannot supply " +
              std::to_string(token_budget) + " tokens (has " +
              std::to_string(c.tokens.size()) + ")");

  std::map<std::string, std::vector<uint32_t>> by_type;
  for (uint32_t i = 0; i < c.tokens.size(); ++i)
    by_type[c.tokens[i].word_type].push_back(i);

  std::vector<std::pair<std::string, std::vector<uint32_t>>> ranked(
      by_type.begin(), by_type.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second.size() != y.second.size())
      return x.second.size() > y.second.size();
    return x.first < y.first;
  });

  std::vector<WordToken> out;
  out.reserve(token_budget);
  for (auto& [type, idx] : ranked) {
    std::sort(idx.begin(), idx.end(), [&](uint32_t x, uint32_t y) {
      return c.tokens[x].token_id < c.tokens[y].token_id;
    });
    for (uint32_t i : idx) {
      if (static_cast<int64_t>(out.size()) == token_budget) return out;
      out.push_back(c.tokens[i]);
    }
    if (static_cast<int64_t>(out.size()) == token_budget) return out;
  }
  return out;
}

std::vector<TrainingPair> generate_pairs(const std::vector<WordToken>& tokens,
                                         int64_t m, uint64_t seed,
                                         const PairOptions& opts) {
  require(m >= 0, "pair count must be nonnegative");
  std::map<std::string, std::vector<uint32_t>> by_type;
  for (uint32_t i = 0; i < tokens.size(); ++i)
    by_type[tokens[i].word_type].push_back(i);

  // Pool sizes of ordered same-type distinct-token pairs per type.
  std::vector<const std::vector<uint32_t>*> groups;
  std::vector<uint64_t> weight_prefix;
  uint64_t total = 0;
  for (const auto& [type, idx] : by_type) {
    uint64_t n = idx.size();
    uint64_t w = n * (n - 1);
    if (opts.cross_speaker_only && w > 0) {
      std::map<std::string, uint64_t> per_spk;
      for (uint32_t i : idx) per_spk[tokens[i].speaker_id]++;
      for (const auto& [spk, k] : per_spk) w -= k * (k - 1);
    }
    if (w == 0) continue;
    groups.push_back(&idx);
    total += w;
    weight_prefix.push_back(total);
  }
  require(total > 0 || m == 0,
          opts.cross_speaker_only
              ? "no word type has two tokens from distinct speakers"
              : "no word type has two tokens; cannot generate pairs");

  std::vector<TrainingPair> out;
  out.reserve(m);
  Rng rng(seed);
  for (int64_t k = 0; k < m; ++k) {
    uint64_t r = rng.below(total);
    size_t g = std::upper_bound(weight_prefix.begin(), weight_prefix.end(), r) -
               weight_prefix.begin();
    const auto& idx = *groups[g];
    uint64_t n = idx.size();
    while (true) {
      uint64_t q = rng.below(n * (n - 1));
      uint64_t i = q / (n - 1);
      uint64_t rem = q % (n - 1);
      uint64_t j = rem + (rem >= i ? 1 : 0);
      if (opts.cross_speaker_only &&
          tokens[idx[i]].speaker_id == tokens[idx[j]].speaker_id)
        continue;
      out.push_back({idx[i], idx[j]});
      break;
    }
  }
  return out;
}

namespace {

int64_t ratio_share(int64_t budget, int percent) {
  return (budget * percent + 50) / 100;  // round half up
}

}  // namespace

TrainingSet mix_bilingual(const Corpus& a, const Corpus& b,
                          std::pair<int, int> ratio, int64_t token_budget,
                          int64_t pair_budget, uint64_t seed,
                          const PairOptions& opts) {
  auto [pa, pb] = ratio;
  require(pa >= 0 && pb >= 0 && pa + pb == 100,
          "ratio must be two nonnegative percentages summing to 100");
  require(token_budget >= 0 && pair_budget >= 0, "budgets must be nonnegative");

  const int64_t tokens_a = ratio_share(token_budget, pa);
  const int64_t tokens_b = token_budget - tokens_a;
  const int64_t pairs_a = ratio_share(pair_budget, pa);
  const int64_t pairs_b = pair_budget - pairs_a;

  TrainingSet ts;
  ts.share_a = pa;
  ts.share_b = pb;

  std::vector<WordToken> sel_a = select_most_frequent(a, tokens_a);
  std::vector<WordToken> sel_b = select_most_frequent(b, tokens_b);

  std::vector<TrainingPair> pr_a =
      generate_pairs(sel_a, pairs_a, mix_seed(seed, "pairs.a"), opts);
  std::vector<TrainingPair> pr_b =
      generate_pairs(sel_b, pairs_b, mix_seed(seed, "pairs.b"), opts);

  ts.tokens = std::move(sel_a);
  const auto offset = static_cast<uint32_t>(ts.tokens.size());
  ts.tokens.insert(ts.tokens.end(), sel_b.begin(), sel_b.end());
  ts.pairs = std::move(pr_a);
  for (const auto& p : pr_b)
    ts.pairs.push_back({p.input + offset, p.target + offset});
  return ts;
}

SynthSpec parse_synth_spec(const json& j) {
  SynthSpec spec;
  try {
    spec.language = j.at("language").get<std::string>();
    for (const auto& p : j.at("phones")) {
      SynthPhone sp;
      sp.symbol = p.at("symbol").get<std::string>();
      auto mean = p.at("mean").get<std::vector<float>>();
      require(mean.size() == kMfccDim,
              "synth phone '" + sp.symbol + "': mean must have 13 components");
      sp.mean = Eigen::Map<Eigen::VectorXf>(mean.data(), mean.size());
      spec.phones.push_back(std::move(sp));
    }
    for (const auto& w : j.at("words")) {
      SynthWord sw;
      sw.word_type = w.at("word_type").get<std::string>();
      sw.phones = w.at("phones").get<std::vector<std::string>>();
      if (w.contains("lemma")) sw.lemma = w.at("lemma").get<std::string>();
      spec.words.push_back(std::move(sw));
    }
    for (const auto& s : j.at("speakers")) {
      SynthSpeaker sp;
      sp.id = s.at("id").get<std::string>();
      sp.gender = parse_gender(s.at("gender").get<std::string>());
      auto off = s.at("offset").get<std::vector<float>>();
      require(off.size() == kMfccDim,
              "synth speaker '" + sp.id + "': offset must have 13 components");
      sp.offset = Eigen::Map<Eigen::VectorXf>(off.data(), off.size());
      spec.speakers.push_back(std::move(sp));
    }
    spec.tokens_per_type = j.value("tokens_per_type", spec.tokens_per_type);
    spec.noise_scale = j.value("noise_scale", spec.noise_scale);
    if (j.contains("frames_per_phone")) {
      auto range = j.at("frames_per_phone").get<std::vector<int>>();
      require(range.size() == 2, "frames_per_phone must be [min, max]");
      spec.min_frames_per_phone = range[0];
      spec.max_frames_per_phone = range[1];
    }
  } catch (const json::exception& e) {
    fail(std::string("invalid synth spec: ") + e.what());
  }
  return spec;
}

Corpus synth_corpus(const SynthSpec& spec, uint64_t seed) {
  require(!spec.words.empty(), "synth spec has an empty word inventory");
  require(!spec.phones.empty(), "synth spec has no phone prototypes");
  require(!spec.speakers.empty(), "synth spec has no speakers");
  require(spec.tokens_per_type >= 1, "tokens_per_type must be >= 1");
  require(spec.noise_scale >= 0, "noise_scale must be nonnegative");
  require(spec.min_frames_per_phone >= 1 &&
              spec.min_frames_per_phone <= spec.max_frames_per_phone,
          "frames_per_phone range invalid");

  std::map<std::string, const SynthPhone*> proto;
  for (const auto& p : spec.phones) proto[p.symbol] = &p;
  for (const auto& w : spec.words)
    for (const auto& ph : w.phones)
      require(proto.count(ph) == 1, "word '" + w.word_type +
                                        "' uses unknown phone '" + ph + "'");

  Corpus corpus;
  corpus.language = spec.language;
  Rng rng(seed);
  const int span = spec.max_frames_per_phone - spec.min_frames_per_phone + 1;

  for (const auto& word : spec.words) {
    for (const auto& spk : spec.speakers) {
      for (int k = 0; k < spec.tokens_per_type; ++k) {
        std::vector<int> lens(word.phones.size());
        uint32_t total = 0;
        for (size_t p = 0; p < word.phones.size(); ++p) {
          lens[p] = spec.min_frames_per_phone +
                    static_cast<int>(rng.below(span));
          total += lens[p];
        }
        FeatureMatrix feats(total, kMfccDim);
        std::vector<PhoneSpan> spans;
        uint32_t at = 0;
        for (size_t p = 0; p < word.phones.size(); ++p) {
          const Eigen::VectorXf& mean = proto.at(word.phones[p])->mean;
          for (int f = 0; f < lens[p]; ++f) {
            for (int d = 0; d < kMfccDim; ++d) {
              float v = mean[d] + spk.offset[d];
              if (spec.noise_scale > 0)
                v += static_cast<float>(spec.noise_scale * rng.normal());
              feats(at + f, d) = v;
            }
          }
          spans.push_back({at, at + static_cast<uint32_t>(lens[p])});
          at += lens[p];
        }

        WordToken tok;
        tok.token_id = spec.language + "-" + word.word_type + "-" + spk.id +
                       "-" + std::to_string(k);
        tok.word_type = word.word_type;
        tok.phones = word.phones;
        tok.lemma = word.lemma ? *word.lemma : word.word_type;
        tok.speaker_id = spk.id;
        tok.speaker_gender = spk.gender;
        tok.language = spec.language;
        tok.frames = total;
        tok.duration_ms = frames_to_ms(total);
        tok.phone_spans = std::move(spans);
        tok.cell = std::make_shared<FeatureCell>(std::move(feats));
        corpus.tokens.push_back(std::move(tok));
      }
    }
  }
  return corpus;
}

}  // namespace awe
