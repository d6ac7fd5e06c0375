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

#include "quark/tokenizer.hpp"

#include "quark/error.hpp"
#include "quark/utf8.hpp"

namespace quark {

TokenizerMode parse_tokenizer_mode(std::string_view name) {
  if (name == "unicode-words" || name == "words") return TokenizerMode::kUnicodeWords;
  if (name == "cjk-char-bigrams" || name == "bigrams") return TokenizerMode::kCjkBigrams;
  if (name == "mixed") return TokenizerMode::kMixed;
  throw ValidationError("unknown tokenizer mode '" + std::string(name) + "'");
}

std::string_view to_string(TokenizerMode mode) {
  switch (mode) {
    case TokenizerMode::kUnicodeWords: return "unicode-words";
    case TokenizerMode::kCjkBigrams: return "cjk-char-bigrams";
    case TokenizerMode::kMixed: return "mixed";
  }
  return "mixed";
}

namespace {

void emit_bigrams(std::u32string_view seg, std::vector<std::string>& out) {
  if (seg.size() == 1) {
    out.push_back(utf8::encode(seg));
    return;
  }
  for (std::size_t i = 0; i + 1 < seg.size(); ++i) out.push_back(utf8::encode(seg.substr(i, 2)));
}

}  // namespace

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::u32string cps = utf8::decode(text);
  if (lowercase) {
    for (char32_t& cp : cps) cp = utf8::to_lower(cp);
  }
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  const std::u32string_view all(cps);
  while (i < n) {
    if (utf8::is_space(cps[i]) || utf8::is_punct(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !utf8::is_space(cps[j]) && !utf8::is_punct(cps[j])) ++j;
    const std::u32string_view run = all.substr(i, j - i);
    switch (mode) {
      case TokenizerMode::kUnicodeWords:
        out.push_back(utf8::encode(run));
        break;
      case TokenizerMode::kCjkBigrams:
        emit_bigrams(run, out);
        break;
      case TokenizerMode::kMixed: {
        std::size_t s = 0;
        while (s < run.size()) {
          const bool cjk = utf8::is_cjk(run[s]);
          std::size_t e = s;
          while (e < run.size() && utf8::is_cjk(run[e]) == cjk) ++e;
          if (cjk) {
            emit_bigrams(run.substr(s, e - s), out);
          } else {
            out.push_back(utf8::encode(run.substr(s, e - s)));
          }
          s = e;
        }
        break;
      }
    }
    i = j;
  }
  return out;
}

}  // namespace quark
