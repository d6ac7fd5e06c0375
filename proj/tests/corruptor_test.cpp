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

#include <gtest/gtest.h>

#include <random>

#include "quark/corruptor.hpp"
#include "quark/error.hpp"
#include "quark/faithfulness.hpp"
#include "quark/utf8.hpp"

namespace quark {
namespace {

const char* kLine = "我们在夜里唱着那首很久以前的老歌直到天亮";

double mean_editsim(const NoiseLevel& level, int seeds) {
  double sum = 0;
  for (int s = 0; s < seeds; ++s) {
    sum += faithfulness(corrupt_query(kLine, level, static_cast<std::uint64_t>(s)), kLine).edit_sim;
  }
  return sum / seeds;
}

TEST(Corruptor, IdentityLevel) {
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(corrupt_query(kLine, identity_noise(), s), kLine);
}

TEST(Corruptor, Deterministic) {
  const auto level = noise_level("L3");
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(corrupt_query(kLine, level, s), corrupt_query(kLine, level, s));
  }
  EXPECT_NE(corrupt_query(kLine, level, 1), corrupt_query(kLine, level, 2));
}

TEST(Corruptor, NeverEmpty) {
  NoiseLevel all_delete{"x", 0, 1, 0, 0, 2};
  EXPECT_EQ(utf8::length(corrupt_query(kLine, all_delete, 3)), 1u);
  EXPECT_EQ(corrupt_query("", all_delete, 3), "");
  const auto h = noise_level("H");
  for (std::uint64_t s = 0; s < 300; ++s) EXPECT_FALSE(corrupt_query("一二", h, s).empty());
}

TEST(Corruptor, Presets) {
  for (const char* name : {"L1", "L2", "L3", "H"}) {
    const auto l = noise_level(name);
    EXPECT_EQ(l.label, name);
    EXPECT_NO_THROW(l.validate());
  }
  EXPECT_THROW(noise_level("L4"), ValidationError);
  EXPECT_THROW((NoiseLevel{"x", 0.7, 0.5, 0, 0, 2}.validate()), ValidationError);
  EXPECT_THROW((NoiseLevel{"x", -0.1, 0, 0, 0, 2}.validate()), ValidationError);
  EXPECT_THROW((NoiseLevel{"x", 0.1, 0, 0, 0, 1}.validate()), ValidationError);
  const auto l1 = noise_level("L1"), l2 = noise_level("L2"), l3 = noise_level("L3");
  EXPECT_GT(l1.target_editsim, l2.target_editsim);
  EXPECT_GT(l2.target_editsim, l3.target_editsim);
}

TEST(Corruptor, MoreNoiseLowersSimilarity) {
  const double e1 = mean_editsim(noise_level("L1"), 500);
  const double e2 = mean_editsim(noise_level("L2"), 500);
  const double e3 = mean_editsim(noise_level("L3"), 500);
  const double eh = mean_editsim(noise_level("H"), 500);
  EXPECT_GT(e1, e2);
  EXPECT_GT(e2, e3);
  EXPECT_GT(e3, eh);
  EXPECT_NEAR(e1, noise_level("L1").target_editsim, 0.05);
  EXPECT_NEAR(e3, noise_level("L3").target_editsim, 0.05);
}

TEST(Corruptor, ConfusableStaysInGroup) {
  Rng rng(5);
  for (std::uint32_t group : {2u, 3u, 16u}) {
    for (char32_t cp : {U'一', U'丁', U'丯', U'a'}) {
      for (int i = 0; i < 100; ++i) {
        const char32_t c = confusable(cp, group, rng);
        EXPECT_NE(c, cp);
        EXPECT_EQ(c / group, cp / group);
      }
    }
  }
  // Size-2 groups pair each character with one partner.
  EXPECT_EQ(confusable(U'一', 2, rng), U'丁');
  EXPECT_EQ(confusable(U'丁', 2, rng), U'一');
}

TEST(Corruptor, SubstitutionOnlyPreservesLengthAndGroups) {
  NoiseLevel sub{"s", 1.0, 0, 0, 0, 2};
  const auto in = utf8::decode(kLine);
  const auto out = utf8::decode(corrupt_query(kLine, sub, 9));
  ASSERT_EQ(in.size(), out.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_NE(in[i], out[i]);
    EXPECT_EQ(in[i] / 2, out[i] / 2);
  }
}

}  // namespace
}  // namespace quark
