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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quark/tokenizer.hpp"
#include "quark/types.hpp"

namespace quark {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t doc = 0;  // position in the corpus
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

// Okapi BM25 over an in-memory inverted index. Immutable after build, so
// concurrent scoring is safe.
//
//   idf(t)     = ln(1 + (N - df + 0.5) / (df + 0.5))
//   score(q,d) = sum over query tokens t of
//                idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
//
// Repeated query tokens contribute once per occurrence.
class LexicalIndex {
 public:
  // Throws ValidationError when k1 <= 0 or b is outside [0, 1].
  static LexicalIndex build(const Corpus& corpus, const Tokenizer& tokenizer,
                            Bm25Params params = {});

  // Without candidates: every document with a positive score. With
  // candidates: exactly those documents, zero scores included. Unknown
  // candidate ids throw ValidationError. An empty query yields an empty run.
  RunList score(std::string qid, std::string_view query_text) const;
  RunList score(std::string qid, std::string_view query_text,
                std::span<const std::string> candidates) const;

  double idf(std::string_view term) const;
  std::size_t df(std::string_view term) const;
  std::size_t doc_count() const noexcept { return doc_ids_.size(); }
  double avg_doc_len() const noexcept { return avg_doc_len_; }
  std::span<const std::uint32_t> doc_lengths() const noexcept { return doc_lengths_; }
  const std::string& doc_id(std::size_t pos) const { return doc_ids_[pos]; }
  std::span<const Posting> postings(std::string_view term) const;
  const Tokenizer& tokenizer() const noexcept { return tokenizer_; }
  const Bm25Params& params() const noexcept { return params_; }
  std::size_t vocabulary_size() const noexcept { return postings_.size(); }

  void save(const std::filesystem::path& path) const;
  static LexicalIndex load(const std::filesystem::path& path);

 private:
  double term_weight(std::uint32_t tf, std::uint32_t doc_len) const;

  Tokenizer tokenizer_;
  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> doc_pos_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_len_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace quark
