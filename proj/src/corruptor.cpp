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

#include "quark/corruptor.hpp"

#include "quark/error.hpp"
#include "quark/utf8.hpp"

namespace quark {

void NoiseLevel::validate() const {
  for (double r : {sub_rate, del_rate, transpose_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ValidationError("noise level '" + label + "': rates must lie in [0, 1]");
    }
  }
  if (sub_rate + del_rate + transpose_rate > 1.0 + 1e-12) {
    throw ValidationError("noise level '" + label + "': rates sum above 1");
  }
  if (confusion_group < 2) {
    throw ValidationError("noise level '" + label + "': confusion group must hold >= 2 code points");
  }
}

NoiseLevel noise_level(std::string_view label) {
  // Rates calibrated by simulation on 8-30 character CJK lines so the mean
  // EditSim lands on the target.
  if (label == "L1") return {"L1", 0.080, 0.020, 0.010, 0.881, 2};
  if (label == "L2") return {"L2", 0.165, 0.040, 0.025, 0.754, 2};
  if (label == "L3") return {"L3", 0.580, 0.120, 0.050, 0.269, 2};
  if (label == "H") return {"H", 0.700, 0.200, 0.050, 0.096, 2};
  throw ValidationError("unknown noise level '" + std::string(label) +
                        "' (expected L1, L2, L3, H)");
}

NoiseLevel identity_noise() { return {"identity", 0.0, 0.0, 0.0, 1.0, 2}; }

char32_t confusable(char32_t cp, std::uint32_t group, Rng& rng) {
  const char32_t base = cp - cp % group;
  auto pick = static_cast<char32_t>(uniform_index(rng, group - 1));
  char32_t out = base + pick;
  if (out >= cp) ++out;
  // Never produce surrogates or values beyond the Unicode range.
  if (out > 0x10FFFF || (out >= 0xD800 && out <= 0xDFFF)) return cp;
  return out;
}

std::string corrupt_query(std::string_view text, const NoiseLevel& level, std::uint64_t seed) {
  level.validate();
  const std::u32string in = utf8::decode(text);
  Rng rng(seed);
  std::u32string out;
  out.reserve(in.size());
  std::size_t remaining = in.size();  // length the output would have if no more deletions
  std::size_t i = 0;
  const double p_del = level.del_rate;
  const double p_sub = p_del + level.sub_rate;
  const double p_swap = p_sub + level.transpose_rate;
  while (i < in.size()) {
    const double u = uniform01(rng);
    if (u < p_del) {
      if (remaining > 1) {
        --remaining;
        ++i;
        continue;
      }
      out.push_back(in[i++]);
    } else if (u < p_sub) {
      out.push_back(confusable(in[i++], level.confusion_group, rng));
    } else if (u < p_swap && i + 1 < in.size()) {
      out.push_back(in[i + 1]);
      out.push_back(in[i]);
      i += 2;
    } else {
      out.push_back(in[i++]);
    }
  }
  return utf8::encode(out);
}

}  // namespace quark
