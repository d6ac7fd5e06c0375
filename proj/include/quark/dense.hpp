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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quark/types.hpp"

namespace quark {

// Row-major id-labelled embedding matrix.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const std::string> ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * dim_, dim_);
  }
  std::optional<std::size_t> find(std::string_view id) const;

  // Throws ValidationError on a dimension mismatch or repeated id.
  void append(std::string id, std::span<const double> values);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> pos_;
};

// L2-normalizes in place. Throws DataError naming `id` when the norm is zero
// or not finite.
void l2_normalize(std::span<double> v, std::string_view id);
std::vector<double> l2_normalized(std::span<const double> v, std::string_view id = "query");

struct EmbeddingServiceConfig {
  std::string url;
  std::string model;
  std::string token_env;  // name of the variable holding the bearer token
  std::size_t batch_size = 32;
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  std::size_t max_in_flight = 4;
};

struct EmbeddingSource {
  enum class Kind { kFile, kService };
  Kind kind = Kind::kFile;
  std::filesystem::path path;
  EmbeddingServiceConfig service;
};

// Embedding file: a `dim=<d>` header line, then `id<TAB>v1 ... vd` rows.
// Values may be separated by tabs or spaces. Rows come back normalized.
EmbeddingMatrix load_embedding_file(const std::filesystem::path& path);
void write_embedding_file(const EmbeddingMatrix& m, const std::filesystem::path& path);

// One normalized row per id, in `ids` order. File sources must hold exactly
// |ids| rows covering every id. Service sources are batched with bounded
// concurrency; output order always follows input order.
EmbeddingMatrix ingest_embeddings(const EmbeddingSource& source, std::span<const std::string> ids,
                                  std::span<const std::string> texts);

// Calls an OpenAI-compatible /embeddings endpoint for one batch.
std::vector<std::vector<double>> embed_batch(const EmbeddingServiceConfig& cfg,
                                             std::span<const std::string> texts);

// Exact inner-product search over unit-norm rows (cosine similarity).
class VectorIndex {
 public:
  // Rows must already be unit-norm to within 1e-6; throws DataError otherwise.
  explicit VectorIndex(EmbeddingMatrix rows);

  std::size_t dim() const noexcept { return rows_.dim(); }
  std::size_t size() const noexcept { return rows_.rows(); }
  const EmbeddingMatrix& rows() const noexcept { return rows_; }

  // Top `top_m` documents by dot product. `query` must be unit-norm.
  RunList score(std::string qid, std::span<const double> query, std::size_t top_m) const;
  // Exact scores for every candidate; unknown ids throw ValidationError.
  RunList score(std::string qid, std::span<const double> query,
                std::span<const std::string> candidates) const;

  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  void check_query(std::span<const double> query) const;
  double dot(std::size_t row, std::span<const double> query) const;

  EmbeddingMatrix rows_;
};

}  // namespace quark
