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

namespace quark::utf8 {

// Decodes UTF-8 into code points. Invalid sequences become U+FFFD.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

// Number of code points in `text`.
std::size_t length(std::string_view text);

// Trims ASCII and Unicode whitespace from both ends.
std::string trim(std::string_view text);

// Collapses internal whitespace runs to a single space and trims.
std::string normalize_space(std::string_view text);

bool is_space(char32_t cp);

// CJK ideographs, kana and hangul: scripts written without word delimiters.
bool is_cjk(char32_t cp);

// Punctuation and symbol code points that never belong to a token.
bool is_punct(char32_t cp);

// Simple case folding for ASCII, Latin-1, Greek and Cyrillic capitals.
char32_t to_lower(char32_t cp);

}  // namespace quark::utf8
