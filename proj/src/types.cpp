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

#include "quark/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "quark/error.hpp"
#include "quark/utf8.hpp"

namespace quark {

std::string Document::full_text() const {
  if (!title || title->empty()) return text;
  if (text.empty()) return *title;
  return *title + " " + text;
}

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  if (docs_.empty()) throw ValidationError("empty corpus");
  by_id_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const Document& d = docs_[i];
    if (d.doc_id.empty()) {
      throw ValidationError("document at position " + std::to_string(i) + " has an empty id");
    }
    if (d.text.empty() && (!d.title || d.title->empty())) {
      throw ValidationError("document '" + d.doc_id + "' has neither text nor title");
    }
    if (!by_id_.emplace(d.doc_id, i).second) {
      throw IntegrityError("duplicate document id '" + d.doc_id + "'");
    }
  }
}

std::optional<std::size_t> Corpus::position(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> dedup_hypotheses(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& h : raw) {
    std::string norm = utf8::normalize_space(h);
    if (norm.empty()) continue;
    if (seen.insert(norm).second) out.push_back(std::move(norm));
  }
  return out;
}

void validate_queries(std::span<const QueryRecord> queries, const Corpus* corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& q : queries) {
    if (!seen.insert(q.qid).second) {
      throw IntegrityError("duplicate query id '" + q.qid + "'");
    }
    if (corpus == nullptr) continue;
    for (const auto& g : q.gold) {
      if (!corpus->contains(g)) {
        throw IntegrityError("query '" + q.qid + "' names unknown gold document '" + g + "'");
      }
    }
  }
}

void Qrels::set(const std::string& qid, const std::string& doc_id, int grade) {
  if (grade < 0) {
    throw ValidationError("negative relevance grade " + std::to_string(grade) + " for (" + qid +
                          ", " + doc_id + ")");
  }
  data_[qid][doc_id] = grade;
}

int Qrels::grade(std::string_view qid, std::string_view doc_id) const {
  const Judgments* j = judgments(qid);
  if (j == nullptr) return 0;
  auto it = j->find(doc_id);
  return it == j->end() ? 0 : it->second;
}

const Qrels::Judgments* Qrels::judgments(std::string_view qid) const {
  auto it = data_.find(qid);
  return it == data_.end() ? nullptr : &it->second;
}

std::size_t Qrels::relevant_count(std::string_view qid) const {
  const Judgments* j = judgments(qid);
  if (j == nullptr) return 0;
  return static_cast<std::size_t>(
      std::count_if(j->begin(), j->end(), [](const auto& kv) { return kv.second > 0; }));
}

RunList::RunList(std::string qid, std::vector<ScoredDoc> entries)
    : qid_(std::move(qid)), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!std::isfinite(e.score)) {
      throw ValidationError("non-finite score for document '" + e.doc_id + "' in query '" + qid_ +
                            "'");
    }
  }
  std::sort(entries_.begin(), entries_.end(), ranks_before);
  // Equal ids are not necessarily adjacent after sorting by score.
  std::unordered_set<std::string_view> ids;
  for (const auto& e : entries_) {
    if (!ids.insert(e.doc_id).second) {
      throw ValidationError("duplicate document '" + e.doc_id + "' in run for query '" + qid_ +
                            "'");
    }
  }
}

void RunList::insert(std::string doc_id, double score) {
  if (!std::isfinite(score)) {
    throw ValidationError("non-finite score for document '" + doc_id + "'");
  }
  if (score_of(doc_id)) {
    throw ValidationError("duplicate document '" + doc_id + "' in run for query '" + qid_ + "'");
  }
  ScoredDoc e{std::move(doc_id), score};
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), e, ranks_before);
  entries_.insert(pos, std::move(e));
}

void RunList::truncate(std::size_t depth) {
  if (entries_.size() > depth) entries_.resize(depth);
}

RunList RunList::truncated(std::size_t depth) const {
  RunList out = *this;
  out.truncate(depth);
  return out;
}

std::optional<double> RunList::score_of(std::string_view doc_id) const {
  for (const auto& e : entries_) {
    if (e.doc_id == doc_id) return e.score;
  }
  return std::nullopt;
}

}  // namespace quark
