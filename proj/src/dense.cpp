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

#include "quark/dense.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>

#include "quark/error.hpp"
#include "quark/http.hpp"
#include "quark/io.hpp"

namespace quark {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'K', 'V', 'E', 'C', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kUnitTolerance = 1e-6;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::optional<std::size_t> EmbeddingMatrix::find(std::string_view id) const {
  auto it = pos_.find(std::string(id));
  if (it == pos_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingMatrix::append(std::string id, std::span<const double> values) {
  if (dim_ == 0) dim_ = values.size();
  if (values.size() != dim_ || dim_ == 0) {
    throw ValidationError("embedding for '" + id + "' has dimension " +
                          std::to_string(values.size()) + ", expected " + std::to_string(dim_));
  }
  if (!pos_.emplace(id, ids_.size()).second) {
    throw ValidationError("duplicate embedding id '" + id + "'");
  }
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), values.begin(), values.end());
}

void l2_normalize(std::span<double> v, std::string_view id) {
  const double n = norm2(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DataError("embedding for '" + std::string(id) + "' has zero or non-finite norm");
  }
  for (double& x : v) x /= n;
}

std::vector<double> l2_normalized(std::span<const double> v, std::string_view id) {
  std::vector<double> out(v.begin(), v.end());
  l2_normalize(out, id);
  return out;
}

EmbeddingMatrix load_embedding_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("dim=", 0) != 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected a 'dim=<d>' header");
    }
    const char* b = line.data() + 4;
    const char* e = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(b, e, dim);
    if (ec != std::errc() || ptr != e || dim == 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad dimension");
    }
    break;
  }
  if (dim == 0) throw ParseError(path.string() + ": empty embedding file");
  EmbeddingMatrix m(dim);
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string loc = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(loc + ": expected 'id<TAB>values'");
    std::string id = line.substr(0, tab);
    values.clear();
    const char* p = line.data() + tab + 1;
    const char* e = line.data() + line.size();
    while (p < e) {
      while (p < e && (*p == ' ' || *p == '\t')) ++p;
      if (p >= e) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, e, v);
      if (ec != std::errc()) throw ParseError(loc + ": bad vector component");
      values.push_back(v);
      p = next;
    }
    if (values.size() != dim) {
      throw ValidationError(loc + ": row for '" + id + "' has " + std::to_string(values.size()) +
                            " components, header says " + std::to_string(dim));
    }
    l2_normalize(values, id);
    m.append(std::move(id), values);
  }
  return m;
}

void write_embedding_file(const EmbeddingMatrix& m, const fs::path& path) {
  std::string out = "dim=" + std::to_string(m.dim()) + "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += m.id(r);
    out += '\t';
    bool first = true;
    for (double v : m.row(r)) {
      if (!first) out += ' ';
      first = false;
      out += format_score(v);
    }
    out += '\n';
  }
  write_file(path, out);
}

std::vector<std::vector<double>> embed_batch(const EmbeddingServiceConfig& cfg,
                                             std::span<const std::string> texts) {
  nlohmann::json body = {{"model", cfg.model},
                         {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  http::PostOptions opt;
  opt.timeout = cfg.timeout;
  opt.retries = cfg.retries;
  opt.bearer_token = http::token_from_env(cfg.token_env);
  const nlohmann::json reply = http::post_json(cfg.url, body, opt);
  auto data = reply.find("data");
  if (data == reply.end() || !data->is_array()) {
    throw ParseError(cfg.url + ": embedding reply has no 'data' array");
  }
  if (data->size() != texts.size()) {
    throw ValidationError(cfg.url + ": embedding reply holds " + std::to_string(data->size()) +
                          " vectors for " + std::to_string(texts.size()) + " inputs");
  }
  std::vector<std::vector<double>> out(texts.size());
  for (std::size_t i = 0; i < data->size(); ++i) {
    const auto& item = (*data)[i];
    std::size_t slot = i;
    if (auto idx = item.find("index"); idx != item.end() && idx->is_number_integer()) {
      slot = idx->get<std::size_t>();
      if (slot >= out.size()) throw ValidationError(cfg.url + ": embedding index out of range");
    }
    auto emb = item.find("embedding");
    if (emb == item.end() || !emb->is_array()) {
      throw ParseError(cfg.url + ": embedding item lacks an 'embedding' array");
    }
    out[slot] = emb->get<std::vector<double>>();
  }
  return out;
}

EmbeddingMatrix ingest_embeddings(const EmbeddingSource& source, std::span<const std::string> ids,
                                  std::span<const std::string> texts) {
  if (ids.size() != texts.size()) {
    throw ValidationError("ingest_embeddings: " + std::to_string(ids.size()) + " ids but " +
                          std::to_string(texts.size()) + " texts");
  }
  if (ids.empty()) throw ValidationError("ingest_embeddings: nothing to embed");

  if (source.kind == EmbeddingSource::Kind::kFile) {
    const EmbeddingMatrix file = load_embedding_file(source.path);
    if (file.rows() != ids.size()) {
      throw ValidationError(source.path.string() + ": holds " + std::to_string(file.rows()) +
                            " rows for " + std::to_string(ids.size()) + " ids");
    }
    EmbeddingMatrix out(file.dim());
    for (const auto& id : ids) {
      auto row = file.find(id);
      if (!row) throw ValidationError(source.path.string() + ": no embedding for '" + id + "'");
      out.append(id, file.row(*row));
    }
    return out;
  }

  const EmbeddingServiceConfig& cfg = source.service;
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  const std::size_t batches = (texts.size() + batch - 1) / batch;
  std::vector<std::vector<std::vector<double>>> results(batches);
  const std::size_t window = std::max<std::size_t>(1, cfg.max_in_flight);
  for (std::size_t start = 0; start < batches; start += window) {
    std::vector<std::future<std::vector<std::vector<double>>>> inflight;
    const std::size_t stop = std::min(batches, start + window);
    for (std::size_t b = start; b < stop; ++b) {
      const std::size_t lo = b * batch;
      const std::size_t hi = std::min(texts.size(), lo + batch);
      inflight.push_back(std::async(std::launch::async, [&cfg, texts, lo, hi] {
        return embed_batch(cfg, texts.subspan(lo, hi - lo));
      }));
    }
    for (std::size_t b = start; b < stop; ++b) results[b] = inflight[b - start].get();
  }
  EmbeddingMatrix out;
  std::size_t row = 0;
  for (auto& batch_rows : results) {
    for (auto& v : batch_rows) {
      if (out.rows() > 0 && v.size() != out.dim()) {
        throw ValidationError("embedding service returned dimension " + std::to_string(v.size()) +
                              " for '" + ids[row] + "' after dimension " +
                              std::to_string(out.dim()));
      }
      l2_normalize(v, ids[row]);
      out.append(ids[row], v);
      ++row;
    }
  }
  return out;
}

VectorIndex::VectorIndex(EmbeddingMatrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.dim() == 0) throw ValidationError("empty vector index");
  for (std::size_t r = 0; r < rows_.rows(); ++r) {
    const double n = norm2(rows_.row(r));
    if (std::abs(n - 1.0) > kUnitTolerance) {
      throw DataError("row '" + rows_.id(r) + "' is not unit-norm (norm " + std::to_string(n) +
                      ")");
    }
  }
}

void VectorIndex::check_query(std::span<const double> query) const {
  if (query.size() != dim()) {
    throw ValidationError("query vector has dimension " + std::to_string(query.size()) +
                          ", index has " + std::to_string(dim()));
  }
  const double n = norm2(query);
  if (std::abs(n - 1.0) > kUnitTolerance) {
    throw ValidationError("query vector is not unit-norm (norm " + std::to_string(n) + ")");
  }
}

double VectorIndex::dot(std::size_t row, std::span<const double> query) const {
  const auto r = rows_.row(row);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * query[i];
  return s;
}

RunList VectorIndex::score(std::string qid, std::span<const double> query,
                           std::size_t top_m) const {
  check_query(query);
  if (top_m == 0) throw ValidationError("top_m must be >= 1");
  std::vector<ScoredDoc> all;
  all.reserve(size());
  for (std::size_t r = 0; r < size(); ++r) all.push_back({rows_.id(r), dot(r, query)});
  const std::size_t keep = std::min(top_m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    ranks_before);
  all.resize(keep);
  return RunList(std::move(qid), std::move(all));
}

RunList VectorIndex::score(std::string qid, std::span<const double> query,
                           std::span<const std::string> candidates) const {
  check_query(query);
  std::vector<ScoredDoc> out;
  out.reserve(candidates.size());
  for (const auto& id : candidates) {
    auto row = rows_.find(id);
    if (!row) throw ValidationError("candidate document '" + id + "' is not in the vector index");
    out.push_back({id, dot(*row, query)});
  }
  return RunList(std::move(qid), std::move(out));
}

void VectorIndex::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  auto pod = [&out](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  out.write(kMagic, sizeof(kMagic));
  pod(kFormatVersion);
  pod(static_cast<std::uint64_t>(dim()));
  pod(static_cast<std::uint64_t>(size()));
  for (std::size_t r = 0; r < size(); ++r) {
    const std::string& id = rows_.id(r);
    pod(static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double v : rows_.row(r)) pod(v);
  }
  if (!out) throw Error("short write to '" + path.string() + "'");
}

VectorIndex VectorIndex::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  auto fail = [&path]() -> ParseError { return ParseError(path.string() + ": truncated vector index"); };
  auto pod = [&in, &fail](auto& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw fail();
  };
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + ": not a vector index file");
  }
  std::uint32_t version = 0;
  pod(version);
  if (version != kFormatVersion) {
    throw ParseError(path.string() + ": unsupported vector index version " + std::to_string(version));
  }
  std::uint64_t dim = 0;
  std::uint64_t n = 0;
  pod(dim);
  pod(n);
  EmbeddingMatrix m(dim);
  std::vector<double> row(dim);
  for (std::uint64_t r = 0; r < n; ++r) {
    std::uint32_t len = 0;
    pod(len);
    std::string id(len, '\0');
    in.read(id.data(), len);
    if (!in) throw fail();
    for (auto& v : row) pod(v);
    m.append(std::move(id), row);
  }
  return VectorIndex(std::move(m));
}

}  // namespace quark
