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

#include "quark/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "quark/error.hpp"

namespace quark {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'K', 'L', 'E', 'X', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void validate(const Bm25Params& p) {
  if (!(p.k1 > 0.0) || !std::isfinite(p.k1)) {
    throw ValidationError("BM25 k1 must be > 0, got " + std::to_string(p.k1));
  }
  if (!(p.b >= 0.0 && p.b <= 1.0)) {
    throw ValidationError("BM25 b must lie in [0, 1], got " + std::to_string(p.b));
  }
}

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string source) : in_(in), source_(std::move(source)) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw ParseError(source_ + ": truncated index file");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw ParseError(source_ + ": truncated index file");
    return s;
  }

 private:
  std::ifstream& in_;
  std::string source_;
};

}  // namespace

LexicalIndex LexicalIndex::build(const Corpus& corpus, const Tokenizer& tokenizer,
                                 Bm25Params params) {
  validate(params);
  LexicalIndex idx;
  idx.tokenizer_ = tokenizer;
  idx.params_ = params;
  const std::size_t n = corpus.size();
  idx.doc_ids_.reserve(n);
  idx.doc_lengths_.reserve(n);
  double total = 0.0;
  std::unordered_map<std::string, std::uint32_t> tf;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const Document& d = corpus[pos];
    idx.doc_ids_.push_back(d.doc_id);
    idx.doc_pos_.emplace(d.doc_id, pos);
    tf.clear();
    const auto tokens = tokenizer.tokenize(d.full_text());
    for (const auto& t : tokens) ++tf[t];
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total += static_cast<double>(tokens.size());
    for (auto& [term, count] : tf) {
      idx.postings_[term].push_back({static_cast<std::uint32_t>(pos), count});
    }
  }
  idx.avg_doc_len_ = total / static_cast<double>(n);
  if (total == 0.0) {
    spdlog::warn("lexical index: all {} documents are empty after tokenization", n);
  }
  return idx;
}

double LexicalIndex::term_weight(std::uint32_t tf, std::uint32_t doc_len) const {
  const double k1 = params_.k1;
  const double b = params_.b;
  const double rel_len = avg_doc_len_ > 0.0 ? static_cast<double>(doc_len) / avg_doc_len_ : 1.0;
  const double f = static_cast<double>(tf);
  return f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * rel_len));
}

std::size_t LexicalIndex::df(std::string_view term) const { return postings(term).size(); }

double LexicalIndex::idf(std::string_view term) const {
  const double n = static_cast<double>(doc_ids_.size());
  const double d = static_cast<double>(df(term));
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

std::span<const Posting> LexicalIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

RunList LexicalIndex::score(std::string qid, std::string_view query_text) const {
  const auto tokens = tokenizer_.tokenize(query_text);
  std::vector<double> acc(doc_ids_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<char> seen(doc_ids_.size(), 0);
  for (const auto& t : tokens) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    const double w = idf(t);
    for (const Posting& p : it->second) {
      acc[p.doc] += w * term_weight(p.tf, doc_lengths_[p.doc]);
      if (!seen[p.doc]) {
        seen[p.doc] = 1;
        touched.push_back(p.doc);
      }
    }
  }
  std::vector<ScoredDoc> entries;
  entries.reserve(touched.size());
  for (std::uint32_t pos : touched) {
    if (acc[pos] > 0.0) entries.push_back({doc_ids_[pos], acc[pos]});
  }
  return RunList(std::move(qid), std::move(entries));
}

RunList LexicalIndex::score(std::string qid, std::string_view query_text,
                            std::span<const std::string> candidates) const {
  const auto tokens = tokenizer_.tokenize(query_text);
  struct Term {
    const std::vector<Posting>* postings;
    double idf;
  };
  std::vector<Term> terms;
  terms.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = postings_.find(t);
    if (it != postings_.end()) terms.push_back({&it->second, idf(t)});
  }
  std::vector<ScoredDoc> entries;
  entries.reserve(candidates.size());
  for (const auto& id : candidates) {
    auto pit = doc_pos_.find(id);
    if (pit == doc_pos_.end()) {
      throw ValidationError("candidate document '" + id + "' is not in the lexical index");
    }
    const auto pos = static_cast<std::uint32_t>(pit->second);
    double s = 0.0;
    for (const Term& term : terms) {
      auto hit = std::lower_bound(term.postings->begin(), term.postings->end(), pos,
                                  [](const Posting& p, std::uint32_t v) { return p.doc < v; });
      if (hit != term.postings->end() && hit->doc == pos) {
        s += term.idf * term_weight(hit->tf, doc_lengths_[pos]);
      }
    }
    entries.push_back({id, s});
  }
  return RunList(std::move(qid), std::move(entries));
}

void LexicalIndex::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.pod(kFormatVersion);
  w.pod(static_cast<std::uint8_t>(tokenizer_.mode));
  w.pod(static_cast<std::uint8_t>(tokenizer_.lowercase ? 1 : 0));
  w.pod(params_.k1);
  w.pod(params_.b);
  w.pod(static_cast<std::uint64_t>(doc_ids_.size()));
  for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
    w.str(doc_ids_[i]);
    w.pod(doc_lengths_[i]);
  }
  // Sorted so identical indexes serialize to identical bytes.
  std::map<std::string_view, const std::vector<Posting>*> sorted;
  for (const auto& [term, plist] : postings_) sorted.emplace(term, &plist);
  w.pod(static_cast<std::uint64_t>(sorted.size()));
  for (const auto& [term, plist] : sorted) {
    w.str(std::string(term));
    w.pod(static_cast<std::uint32_t>(plist->size()));
    for (const Posting& p : *plist) {
      w.pod(p.doc);
      w.pod(p.tf);
    }
  }
  if (!out) throw Error("short write to '" + path.string() + "'");
}

LexicalIndex LexicalIndex::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + ": not a lexical index file");
  }
  Reader r(in, path.string());
  const auto version = r.pod<std::uint32_t>();
  if (version != kFormatVersion) {
    throw ParseError(path.string() + ": unsupported lexical index version " +
                     std::to_string(version));
  }
  LexicalIndex idx;
  const auto mode = r.pod<std::uint8_t>();
  if (mode > static_cast<std::uint8_t>(TokenizerMode::kMixed)) {
    throw ParseError(path.string() + ": bad tokenizer mode");
  }
  idx.tokenizer_.mode = static_cast<TokenizerMode>(mode);
  idx.tokenizer_.lowercase = r.pod<std::uint8_t>() != 0;
  idx.params_.k1 = r.pod<double>();
  idx.params_.b = r.pod<double>();
  validate(idx.params_);
  const auto n = r.pod<std::uint64_t>();
  double total = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    idx.doc_ids_.push_back(r.str());
    idx.doc_pos_.emplace(idx.doc_ids_.back(), i);
    idx.doc_lengths_.push_back(r.pod<std::uint32_t>());
    total += idx.doc_lengths_.back();
  }
  if (n == 0) throw ParseError(path.string() + ": index has no documents");
  idx.avg_doc_len_ = total / static_cast<double>(n);
  const auto terms = r.pod<std::uint64_t>();
  for (std::uint64_t t = 0; t < terms; ++t) {
    std::string term = r.str();
    const auto count = r.pod<std::uint32_t>();
    std::vector<Posting> plist(count);
    for (auto& p : plist) {
      p.doc = r.pod<std::uint32_t>();
      p.tf = r.pod<std::uint32_t>();
      if (p.doc >= n) throw ParseError(path.string() + ": posting references unknown document");
    }
    idx.postings_.emplace(std::move(term), std::move(plist));
  }
  return idx;
}

}  // namespace quark
