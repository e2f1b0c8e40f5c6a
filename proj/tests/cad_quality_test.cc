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

#include "salad/cad_quality.h"

#include <cmath>
#include <map>
#include <set>

#include "gtest/gtest.h"
#include "salad/common.h"
#include "salad/encoder.h"
#include "salad/rng.h"
#include "test_util.h"

namespace salad {
namespace {

std::set<std::string> Words(const std::string& s) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find(' ', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) out.insert(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Fixed vectors per whole text, for hand-computable cosines.
class TableEmbedder : public SentenceEmbedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> t) : t_(std::move(t)) {}
  Eigen::VectorXd Embed(std::string_view text) const override {
    const auto& v = t_.at(std::string(text));
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

 private:
  std::map<std::string, std::vector<double>> t_;
};

TEST(DiversityTest, IdenticalCorpusAddsNothing) {
  const std::vector<std::string> texts = {"a b", "c d e"};
  EXPECT_EQ(Diversity(texts, texts), 0u);
}

TEST(DiversityTest, CountsNewTypes) {
  const std::vector<std::string> train = {"a b"};
  const std::vector<std::string> cad = {"a c d"};
  EXPECT_EQ(Diversity(train, cad), 2u);
}

TEST(DiversityTest, TypesNotOccurrences) {
  const std::vector<std::string> train = {"a"};
  const std::vector<std::string> cad = {"z z z", "z"};
  EXPECT_EQ(Diversity(train, cad), 1u);
}

TEST(OverlapTest, IdenticalPairsAreHundred) {
  const std::vector<TextPair> pairs = {{"a b c", "a b c"}, {"d", "d"}};
  EXPECT_DOUBLE_EQ(Overlap(pairs).overlap_pct, 100.0);
}

TEST(OverlapTest, ThreeOfFourRetained) {
  const std::vector<TextPair> pairs = {{"a b c d", "a b c x"}};
  EXPECT_DOUBLE_EQ(Overlap(pairs).overlap_pct, 75.0);
}

TEST(OverlapTest, EmptyOriginalSkipped) {
  const std::vector<TextPair> pairs = {{"", "x"}, {"a b", "a"}};
  const OverlapResult r = Overlap(pairs);
  EXPECT_EQ(r.skipped, (std::vector<std::size_t>{0}));
  EXPECT_DOUBLE_EQ(r.overlap_pct, 50.0);
}

// Random three-pair fixtures against plain std::set arithmetic.
TEST(CadMetricsTest, MatchBruteForceSets) {
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "f", "g"};
  Rng rng(55);
  auto sentence = [&] {
    std::string s;
    const int n = 1 + static_cast<int>(rng.Uniform(5));
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + alphabet[rng.Uniform(alphabet.size())];
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TextPair> pairs(3);
    std::vector<std::string> train, cad;
    for (TextPair& p : pairs) {
      p = {sentence(), sentence()};
      train.push_back(p.original);
      cad.push_back(p.counterfactual);
    }
    std::set<std::string> train_types, fresh;
    for (const auto& t : train) for (const auto& w : Words(t)) train_types.insert(w);
    for (const auto& t : cad) for (const auto& w : Words(t)) if (!train_types.contains(w)) fresh.insert(w);
    ASSERT_EQ(Diversity(train, cad), fresh.size());

    double sum = 0;
    for (const TextPair& p : pairs) {
      const auto o = Words(p.original);
      const auto c = Words(p.counterfactual);
      std::size_t kept = 0;
      for (const auto& w : o) kept += c.contains(w);
      sum += 100.0 * static_cast<double>(kept) / static_cast<double>(o.size());
    }
    ASSERT_NEAR(Overlap(pairs).overlap_pct, sum / 3.0, 1e-9);
  }
}

TEST(EmbedSimilarityTest, IdenticalPairsScoreOne) {
  const std::vector<TextPair> pairs = {{"the movie was great .", "the movie was great ."},
                                       {"never so glad", "never so glad"}};
  EXPECT_NEAR(EmbedSimilarity(pairs, HashingSentenceEmbedder()).mean, 1.0, 1e-6);
  EXPECT_NEAR(EmbedSimilarity(pairs, HashingTokenEmbedder()).mean, 1.0, 1e-6);
  std::vector<std::string> texts = {"the movie was great .", "never so glad"};
  ToyEncoderConfig cfg;
  cfg.init_seed = 4;
  const ToyEncoder enc(Vocabulary::Build(texts), cfg);
  EXPECT_NEAR(EmbedSimilarity(pairs, EncoderSentenceEmbedder(enc)).mean, 1.0, 1e-6);
}

TEST(EmbedSimilarityTest, OrthogonalVectorsScoreZero) {
  const TableEmbedder emb({{"x", {1, 0}}, {"y", {0, 3}}});
  const std::vector<TextPair> pairs = {{"x", "y"}};
  EXPECT_NEAR(EmbedSimilarity(pairs, emb).mean, 0.0, 1e-12);
}

TEST(EmbedSimilarityTest, HandComputedMeanCosine) {
  // cos = 1, 0.6 (3-4-5 triangle), -1 -> mean 0.2
  const TableEmbedder emb({{"a", {1, 0}}, {"a2", {2, 0}}, {"b", {1, 0}},
                           {"b2", {3, 4}}, {"c", {0, 1}}, {"c2", {0, -1}}});
  const std::vector<TextPair> pairs = {{"a", "a2"}, {"b", "b2"}, {"c", "c2"}};
  const SimilarityResult r = EmbedSimilarity(pairs, emb);
  EXPECT_NEAR(r.mean, 0.2, 1e-12);
  EXPECT_EQ(r.mode, EmbedMode::kPooled);
  ASSERT_EQ(r.per_pair.size(), 3u);
  EXPECT_NEAR(r.per_pair[1], 0.6, 1e-12);
}

TEST(EmbedSimilarityTest, EmbedderFailuresAreCollected) {
  const TableEmbedder emb({{"a", {1, 0}}, {"b", {1, 1}}});
  const std::vector<TextPair> pairs = {{"a", "b"}, {"a", "missing"}};
  const SimilarityResult r = EmbedSimilarity(pairs, emb);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].first, 1u);
  EXPECT_NEAR(r.mean, std::sqrt(0.5), 1e-12);
}

TEST(MeasureCadQualityTest, PairsBySourceId) {
  const Dataset train = testing::MakeDataset(
      Task::Sentiment(), {testing::MakeExample("s1", "a b c d", 1),
                          testing::MakeExample("s2", "e f", 0)});
  std::vector<CounterfactualExample> cad(2);
  cad[0].source_id = "s2";
  cad[0].text = "e g";
  cad[1].source_id = "s1";
  cad[1].text = "a b c x";
  const CadQualityReport r = MeasureCadQuality(train, cad, HashingTokenEmbedder());
  EXPECT_EQ(r.diversity, 2u);
  EXPECT_DOUBLE_EQ(r.overlap_pct, (50.0 + 75.0) / 2);
  EXPECT_EQ(r.pair_count, 2u);
  EXPECT_EQ(r.ToJson().at("mode"), "token-matching");
}

}  // namespace
}  // namespace salad
