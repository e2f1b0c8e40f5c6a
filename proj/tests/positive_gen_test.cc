//
// Copyright 2026 The Salad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "salad/positive_gen.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "salad/common.h"
#include "test_util.h"

namespace salad {
namespace {

using T = UniversalTag;

PositiveGenConfig Alpha(double a) {
  PositiveGenConfig cfg;
  cfg.scaling_factor = a;
  return cfg;
}

TEST(KFromMeanTest, FortyFiveTimesPointOneEight) {
  EXPECT_EQ(KFromMean(45.0, Alpha(0.18)), 8);
}

TEST(KFromMeanTest, FloorsAtOne) { EXPECT_EQ(KFromMean(45.0, Alpha(0.0)), 1); }

TEST(KFromMeanTest, RoundsToNearest) {
  EXPECT_EQ(KFromMean(27.5, Alpha(0.18)), 5);
  EXPECT_EQ(KFromMean(10.0, Alpha(0.12)), 1);
  EXPECT_EQ(KFromMean(10.0, Alpha(0.25)), 3);  // 2.5 rounds away from zero
}

TEST(KFromMeanTest, OverrideWins) {
  PositiveGenConfig cfg = Alpha(0.18);
  cfg.k_override = 3;
  EXPECT_EQ(KFromMean(45.0, cfg), 3);
  cfg.k_override = 0;
  EXPECT_THROW(KFromMean(45.0, cfg), ConfigError);
}

TEST(ComputeKTest, CountsNonCausalTokensOfTaggedCorpus) {
  // Non-causal tokens: "the", "for", "an", "." in the first (4) and "the"
  // in the second (1) -> mean 2.5, times 0.4 = 1.
  const Dataset ds = testing::MakeDataset(
      Task::Sentiment(),
      {testing::MakeExample("a", "for an engaging plot the film works .", 1),
       testing::MakeExample("b", "the movie rocks", 1)});
  EXPECT_EQ(ComputeK(ds, testing::ContentWordPartition(), Alpha(0.4),
                     testing::ToyTagger()),
            1);
  std::vector<TaggedExample> tagged;
  for (const auto& ex : ds.examples) tagged.push_back(Tag(ex, testing::ToyTagger()));
  EXPECT_DOUBLE_EQ(MeanNonCausalCount(tagged, testing::ContentWordPartition()), 2.5);
}

TaggedExample Tagged(std::string text, std::optional<std::string> b = {}) {
  return Tag(testing::MakeExample("t", std::move(text), 1, std::move(b)),
             testing::ToyTagger());
}

TEST(GeneratePositiveTest, OnlyFunctionWordsAreMasked) {
  const TaggedExample t = Tagged("For an engaging plot the film works");
  Rng rng(1);
  const PositiveExample p =
      GeneratePositive(t, testing::ContentWordPartition(), 3, "[UNK]", rng);
  EXPECT_EQ(p.text, "[UNK] [UNK] engaging plot [UNK] film works");
  EXPECT_EQ(p.replaced_positions, (std::vector<std::size_t>{0, 1, 4}));
}

TEST(GeneratePositiveTest, SaturationMasksEveryNonCausalToken) {
  const TaggedExample t = Tagged("i loved the movie , it was great .");
  Rng rng(2);
  const PositiveExample p =
      GeneratePositive(t, testing::ContentWordPartition(), 50, "[UNK]", rng);
  EXPECT_EQ(p.text, "[UNK] loved [UNK] movie [UNK] [UNK] was great [UNK]");
}

TEST(GeneratePositiveTest, NoNonCausalTokensGivesFlaggedCopy) {
  const TaggedExample t = Tagged("movie rocks");
  Rng rng(3);
  const PositiveExample p =
      GeneratePositive(t, testing::ContentWordPartition(), 2, "[UNK]", rng);
  EXPECT_TRUE(p.unmodified);
  EXPECT_EQ(p.text, "movie rocks");
}

TEST(GeneratePositiveTest, SingleReplacementStaysInLegalPositions) {
  // Non-causal positions of "i loved it ." are 0, 2 and 3.
  const TaggedExample t = Tagged("i loved it .");
  std::set<std::size_t> seen;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    const PositiveExample p =
        GeneratePositive(t, testing::ContentWordPartition(), 1, "[UNK]", rng);
    ASSERT_EQ(p.replaced_positions.size(), 1u);
    seen.insert(p.replaced_positions[0]);
  }
  EXPECT_EQ(seen, (std::set<std::size_t>{0, 2, 3}));
}

TEST(GeneratePositiveTest, PairKeepsPremiseAndHypothesisSeparate) {
  const TaggedExample t = Tagged("the movie rocks", "it works");
  Rng rng(4);
  const PositiveExample p =
      GeneratePositive(t, testing::ContentWordPartition(), 5, "[UNK]", rng);
  EXPECT_EQ(p.text, "[UNK] movie rocks");
  EXPECT_EQ(p.text_b, "[UNK] works");
}

TEST(GeneratePositiveTest, SelectionFrequencyIsUniform) {
  // 7 non-causal positions, k = 3.
  const TaggedExample t = Tagged("i loved the plot of the film and it was so great .");
  const auto partition = testing::ContentWordPartition();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < t.tags.size(); ++i) {
    if (!partition.IsCausal(t.tags[i])) eligible.push_back(i);
  }
  ASSERT_EQ(eligible.size(), 7u);
  constexpr int kDraws = 10000;
  constexpr int kK = 3;
  std::vector<int> hits(t.tokens.size(), 0);
  for (int d = 0; d < kDraws; ++d) {
    Rng rng(DeriveSeed(77, {"freq"}, {static_cast<std::uint64_t>(d)}));
    for (std::size_t pos : GeneratePositive(t, partition, kK, "[UNK]", rng)
                               .replaced_positions) {
      ++hits[pos];
    }
  }
  const double p = static_cast<double>(kK) / 7.0;
  const double se = std::sqrt(p * (1 - p) / kDraws);
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    const bool legal = std::count(eligible.begin(), eligible.end(), i) > 0;
    if (!legal) {
      EXPECT_EQ(hits[i], 0);
      continue;
    }
    const double freq = static_cast<double>(hits[i]) / kDraws;
    EXPECT_NEAR(freq, p, 3 * se) << "position " << i;
  }
}

TEST(GenerateEpochPositivesTest, SameSeedAndEpochIsDeterministic) {
  std::vector<TaggedExample> tagged = {
      Tagged("i loved the plot of the film and it was so great ."),
      Tagged("for an engaging plot the film works .")};
  tagged[1].example.id = "u";
  const auto p = testing::ContentWordPartition();
  const auto a = GenerateEpochPositives(tagged, p, 2, 0, 9, "[UNK]");
  const auto b = GenerateEpochPositives(tagged, p, 2, 0, 9, "[UNK]");
  EXPECT_EQ(SerializePositives(a), SerializePositives(b));
}

TEST(GenerateEpochPositivesTest, EpochsDrawDifferentMasks) {
  std::vector<TaggedExample> tagged;
  for (int i = 0; i < 5; ++i) {
    tagged.push_back(Tagged("i loved the plot of the film and it was so great ."));
    tagged.back().example.id = "x" + std::to_string(i);
  }
  const auto p = testing::ContentWordPartition();
  const auto e0 = GenerateEpochPositives(tagged, p, 2, 0, 9, "[UNK]");
  const auto e1 = GenerateEpochPositives(tagged, p, 2, 1, 9, "[UNK]");
  bool differ = false;
  for (std::size_t i = 0; i < e0.size(); ++i) {
    differ |= e0[i].replaced_positions != e1[i].replaced_positions;
    EXPECT_EQ(e1[i].epoch, 1);
  }
  EXPECT_TRUE(differ);
}

// Structural invariants checked on randomly drawn inputs.
TEST(GeneratePositiveTest, RandomizedInvariants) {
  const std::vector<std::string> words = {"the", "movie", "loved", "great",
                                          "so", "of", "it", "and", ".", "zorp",
                                          "film", "a", "never"};
  Rng rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string text;
    const int n = 1 + static_cast<int>(rng.Uniform(14));
    for (int i = 0; i < n; ++i) text += words[rng.Uniform(words.size())] + " ";
    const TaggedExample t = Tagged(text);
    TagSetPartition part;
    for (T tag : kAllUniversalTags) {
      (rng.Uniform(2) ? part.causal : part.noncausal).insert(tag);
    }
    const int k = 1 + static_cast<int>(rng.Uniform(6));
    const std::uint64_t seed = rng.Next();
    Rng r1(seed), r2(seed);
    const PositiveExample p = GeneratePositive(t, part, k, "[UNK]", r1);
    const PositiveExample q = GeneratePositive(t, part, k, "[UNK]", r2);
    ASSERT_EQ(p.text, q.text);
    const std::vector<std::string> out = Tokenize(p.text);
    ASSERT_EQ(out.size(), t.tokens.size()) << text;
    std::size_t eligible = 0;
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
      const bool replaced =
          std::binary_search(p.replaced_positions.begin(),
                             p.replaced_positions.end(), i);
      if (!part.IsCausal(t.tags[i])) ++eligible;
      if (replaced) {
        ASSERT_FALSE(part.IsCausal(t.tags[i]));
        ASSERT_EQ(out[i], "[UNK]");
      } else {
        ASSERT_EQ(out[i], t.tokens[i]);
      }
    }
    ASSERT_EQ(p.replaced_positions.size(),
              std::min<std::size_t>(eligible, static_cast<std::size_t>(k)));
  }
}

}  // namespace
}  // namespace salad
