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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace quark {

struct Document {
  std::string doc_id;
  std::string text;
  std::optional<std::string> title;

  // Title and body joined by a space; what the retrievers index.
  std::string full_text() const;
};

// Ordered, id-addressable document collection. Immutable once built.
class Corpus {
 public:
  // Throws ValidationError when empty or a document is unusable and
  // IntegrityError on a repeated doc_id.
  explicit Corpus(std::vector<Document> docs);

  std::size_t size() const noexcept { return docs_.size(); }
  const Document& operator[](std::size_t pos) const { return docs_[pos]; }
  std::span<const Document> docs() const noexcept { return docs_; }

  std::optional<std::size_t> position(std::string_view doc_id) const;
  bool contains(std::string_view doc_id) const { return position(doc_id).has_value(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct QueryRecord {
  std::string qid;
  std::string text;
  std::vector<std::string> hypotheses;
  // Known target documents. Empty when the query has no simulated gold.
  std::vector<std::string> gold;
};

// Whitespace-normalizes each hypothesis, drops empties and exact repeats,
// keeping first occurrences in order.
std::vector<std::string> dedup_hypotheses(const std::vector<std::string>& raw);

// Throws IntegrityError on a repeated qid, or on a gold id missing from
// `corpus` when one is given.
void validate_queries(std::span<const QueryRecord> queries, const Corpus* corpus = nullptr);

// Graded judgments; an absent (qid, doc_id) pair has grade 0.
class Qrels {
 public:
  using Judgments = std::map<std::string, int, std::less<>>;

  // Throws ValidationError when grade < 0. Repeated pairs keep the last grade.
  void set(const std::string& qid, const std::string& doc_id, int grade);

  int grade(std::string_view qid, std::string_view doc_id) const;
  const Judgments* judgments(std::string_view qid) const;
  // Documents with grade > 0.
  std::size_t relevant_count(std::string_view qid) const;
  bool has_query(std::string_view qid) const { return judgments(qid) != nullptr; }

  const std::map<std::string, Judgments, std::less<>>& all() const noexcept { return data_; }
  std::size_t query_count() const noexcept { return data_.size(); }

  bool operator==(const Qrels&) const = default;

 private:
  std::map<std::string, Judgments, std::less<>> data_;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

// Strict ranking order: higher score first, ties by ascending doc_id.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

// Per-query ranking. Entries are always sorted by ranks_before, doc ids are
// unique and scores finite.
class RunList {
 public:
  RunList() = default;
  explicit RunList(std::string qid) : qid_(std::move(qid)) {}
  // Sorts `entries`; throws ValidationError on duplicates or non-finite scores.
  RunList(std::string qid, std::vector<ScoredDoc> entries);

  const std::string& qid() const noexcept { return qid_; }
  std::span<const ScoredDoc> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const ScoredDoc& operator[](std::size_t i) const { return entries_[i]; }

  void insert(std::string doc_id, double score);
  void truncate(std::size_t depth);
  RunList truncated(std::size_t depth) const;

  // Linear scan; build a map when looking up many ids.
  std::optional<double> score_of(std::string_view doc_id) const;

  bool operator==(const RunList&) const = default;

 private:
  std::string qid_;
  std::vector<ScoredDoc> entries_;
};

}  // namespace quark
