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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "quark/corruptor.hpp"
#include "quark/faithfulness.hpp"
#include "quark/types.hpp"

namespace quark {

// Generator for short CJK lines built from a Zipfian vocabulary. Lines come in
// families that share most words, so lexical near-duplicates compete with
// each other the way lyric lines from related songs do.
struct SyntheticCorpusConfig {
  std::size_t docs = 2000;
  std::size_t alphabet = 1000;  // code points from U+4E00
  std::size_t vocabulary = 1500;
  std::size_t family_size = 8;
  std::size_t min_chars = 8;  // target line length before truncation
  std::size_t max_chars = 16;
  std::size_t truncate_chars = 30;
  double variant_rate = 0.35;  // per-word replacement rate inside a family
  double char_zipf = 0.8;
  double word_zipf = 1.0;
  std::uint64_t seed = 7;
};

// Distinct documents with ids "d00000", "d00001", ... in shuffled order.
Corpus synth_corpus(const SyntheticCorpusConfig& cfg);

struct SimulationConfig {
  std::size_t queries = 200;
  NoiseLevel level;
  std::uint64_t seed = 0;
  std::size_t min_chars = 8;  // gold length filter, inclusive
  std::size_t max_chars = 50;
  std::string qid_prefix = "q";
};

struct Benchmark {
  std::vector<QueryRecord> queries;
  Qrels qrels;
  FaithfulnessReport report;
};

// Samples golds among documents whose text length passes the filter and
// corrupts each into a query. Throws ValidationError when fewer than
// cfg.queries documents are eligible.
Benchmark simulate(const Corpus& corpus, const SimulationConfig& cfg);

}  // namespace quark
