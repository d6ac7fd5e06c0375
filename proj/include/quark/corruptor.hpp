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

#include <cstdint>
#include <string>
#include <string_view>

#include "quark/random.hpp"

namespace quark {

// Parameters of the synthetic recall channel. Each character is, in order of
// precedence, deleted, substituted, or swapped with its right neighbour.
// Substitutes are drawn uniformly from the character's confusion group: the
// block of `confusion_group` consecutive code points containing it. Size 2
// pairs every character with exactly one confusable partner.
struct NoiseLevel {
  std::string label;
  double sub_rate = 0.0;
  double del_rate = 0.0;
  double transpose_rate = 0.0;
  double target_editsim = 1.0;  // mean EditSim the rates are calibrated to
  std::uint32_t confusion_group = 2;

  // Throws ValidationError unless each rate is in [0, 1], their sum is at
  // most 1 and confusion_group >= 2.
  void validate() const;
};

// Frozen calibrated presets "L1", "L2", "L3", plus "H", the heavier channel
// the oracle hypothesis provider uses at desk scale. Throws ValidationError
// otherwise.
NoiseLevel noise_level(std::string_view label);
// All rates zero.
NoiseLevel identity_noise();

// A different member of cp's confusion group, uniformly.
char32_t confusable(char32_t cp, std::uint32_t group, Rng& rng);

// Deterministic in (text, level, seed). Never returns an empty string for a
// non-empty input: the last remaining character is never deleted.
std::string corrupt_query(std::string_view text, const NoiseLevel& level, std::uint64_t seed);

}  // namespace quark
