// Copyright 2026 The Quark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "quark/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "quark/error.hpp"
#include "quark/random.hpp"
#include "quark/utf8.hpp"

namespace quark {

namespace {

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double s) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = total;
    }
    for (double& c : cdf_) c /= total;
  }

  std::size_t operator()(Rng& rng) const {
    const double u = uniform01(rng);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

std::string zero_pad(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

Corpus synth_corpus(const SyntheticCorpusConfig& cfg) {
  if (cfg.docs == 0 || cfg.alphabet == 0 || cfg.vocabulary == 0 || cfg.family_size == 0) {
    throw ValidationError("synthetic corpus sizes must be positive");
  }
  if (cfg.min_chars == 0 || cfg.min_chars > cfg.max_chars || cfg.truncate_chars == 0) {
    throw ValidationError("synthetic corpus length bounds are inconsistent");
  }
  Rng rng(derive_seed(cfg.seed, "synth-corpus"));
  const ZipfSampler chars(cfg.alphabet, cfg.char_zipf);
  const ZipfSampler words(cfg.vocabulary, cfg.word_zipf);

  std::vector<std::u32string> vocab(cfg.vocabulary);
  for (auto& w : vocab) {
    const double u = uniform01(rng);
    const std::size_t len = u < 0.3 ? 1 : (u < 0.8 ? 2 : 3);
    for (std::size_t i = 0; i < len; ++i) {
      w.push_back(static_cast<char32_t>(0x4E00 + chars(rng)));
    }
  }

  std::set<std::u32string> seen;
  std::vector<std::u32string> lines;
  // Bounded so a tiny vocabulary cannot loop forever.
  const std::size_t max_attempts = cfg.docs * 100;
  for (std::size_t attempt = 0; lines.size() < cfg.docs && attempt < max_attempts; ++attempt) {
    const std::size_t target =
        cfg.min_chars + uniform_index(rng, cfg.max_chars - cfg.min_chars + 1);
    std::vector<std::size_t> base;
    std::size_t len = 0;
    while (len < target) {
      base.push_back(words(rng));
      len += vocab[base.back()].size();
    }
    for (std::size_t f = 0; f < cfg.family_size && lines.size() < cfg.docs; ++f) {
      std::u32string line;
      for (std::size_t w : base) {
        if (f > 0 && uniform01(rng) < cfg.variant_rate) w = words(rng);
        line += vocab[w];
      }
      if (line.size() > cfg.truncate_chars) line.resize(cfg.truncate_chars);
      if (seen.insert(line).second) lines.push_back(std::move(line));
    }
  }
  if (lines.size() < cfg.docs) {
    throw ValidationError("synthetic corpus: only " + std::to_string(lines.size()) +
                          " distinct lines could be generated");
  }
  shuffle(lines, rng);
  const std::size_t width = std::to_string(cfg.docs - 1).size();
  std::vector<Document> docs;
  docs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    docs.push_back({"d" + zero_pad(i, std::max<std::size_t>(width, 5)), utf8::encode(lines[i]),
                    std::nullopt});
  }
  return Corpus(std::move(docs));
}

Benchmark simulate(const Corpus& corpus, const SimulationConfig& cfg) {
  if (cfg.queries == 0) throw ValidationError("simulate needs at least one query");
  if (cfg.min_chars > cfg.max_chars) throw ValidationError("simulate: min length above max");
  cfg.level.validate();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t len = utf8::length(corpus[i].text);
    if (len >= cfg.min_chars && len <= cfg.max_chars) eligible.push_back(i);
  }
  if (eligible.size() < cfg.queries) {
    throw ValidationError("simulate: " + std::to_string(cfg.queries) + " queries requested but only " +
                          std::to_string(eligible.size()) + " documents pass the length filter");
  }
  Rng rng(derive_seed(cfg.seed, "simulate-sample"));
  // Partial Fisher-Yates: the first `queries` slots are the sample.
  for (std::size_t i = 0; i < cfg.queries; ++i) {
    std::swap(eligible[i], eligible[i + uniform_index(rng, eligible.size() - i)]);
  }
  Benchmark out;
  const std::size_t width = std::to_string(cfg.queries - 1).size();
  for (std::size_t i = 0; i < cfg.queries; ++i) {
    const Document& gold = corpus[eligible[i]];
    QueryRecord q;
    q.qid = cfg.qid_prefix + zero_pad(i, width);
    q.text = corrupt_query(gold.text, cfg.level, derive_seed(cfg.seed, "simulate-corrupt", i));
    q.gold = {gold.doc_id};
    out.qrels.set(q.qid, gold.doc_id, 1);
    out.queries.push_back(std::move(q));
  }
  out.report = faithfulness_report(out.queries, corpus);
  return out;
}

}  // namespace quark
