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

#include <string>
#include <string_view>
#include <vector>

namespace quark {

enum class TokenizerMode {
  kUnicodeWords,  // maximal runs of non-space, non-punctuation characters
  kCjkBigrams,    // overlapping character bigrams over every run
  kMixed,         // words for space-delimited scripts, bigrams for CJK runs
};

TokenizerMode parse_tokenizer_mode(std::string_view name);
std::string_view to_string(TokenizerMode mode);

// Deterministic tokenizer. In bigram modes a run of a single character
// yields that character as a unigram so short segments stay matchable.
struct Tokenizer {
  TokenizerMode mode = TokenizerMode::kMixed;
  bool lowercase = true;

  std::vector<std::string> tokenize(std::string_view text) const;

  bool operator==(const Tokenizer&) const = default;
};

}  // namespace quark
