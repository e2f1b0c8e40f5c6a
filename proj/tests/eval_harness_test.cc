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

#include "salad/eval_harness.h"

#include <map>

#include "gtest/gtest.h"
#include "salad/common.h"
#include "salad/rng.h"
#include "test_util.h"

namespace salad {
namespace {

// Returns preset logits per text; unseen texts get a constant row.
class TableEncoder : public Encoder {
 public:
  explicit TableEncoder(std::map<std::string, std::vector<double>> table,
                        std::vector<double> fallback = {1.0, 0.0})
      : table_(std::move(table)), fallback_(std::move(fallback)) {}
  int hidden_size() const override { return 1; }
  int num_classes() const override { return static_cast<int>(fallback_.size()); }
  void SetMaxSequenceLength(int) override {}
  EncodeOutput Forward(std::span<const std::string> texts) override {
    return Encode(texts);
  }
  EncodeOutput Encode(std::span<const std::string> texts) const override {
    const auto n = static_cast<Eigen::Index>(texts.size());
    EncodeOutput out{Matrix::Zero(n, 1), Matrix(n, num_classes())};
    for (Eigen::Index i = 0; i < n; ++i) {
      auto it = table_.find(texts[static_cast<std::size_t>(i)]);
      const std::vector<double>& row = it == table_.end() ? fallback_ : it->second;
      for (int c = 0; c < num_classes(); ++c) out.logits(i, c) = row[static_cast<std::size_t>(c)];
    }
    return out;
  }
  void Backward(const Matrix&, const Matrix&) override {}
  std::vector<ParameterBlock> Parameters() override { return {}; }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::vector<double> fallback_;
};

Dataset Balanced(int n) {
  std::vector<LabeledExample> ex;
  for (int i = 0; i < n; ++i) {
    ex.push_back(testing::MakeExample("e" + std::to_string(i), "text " + std::to_string(i), i % 2));
  }
  return testing::MakeDataset(Task::Sentiment(), ex);
}

TEST(EvaluateTest, GoldOracleScoresHundred) {
  const Dataset ds = Balanced(10);
  const testing::ScriptedOracle gold([](const LabeledExample& ex) {
    return std::stoi(ex.text_a.substr(5)) % 2;
  });
  EXPECT_EQ(Evaluate(gold, ds), 100.0);
}

TEST(EvaluateTest, ConstantPredictorOnBalancedLabels) {
  EXPECT_EQ(Evaluate(TableEncoder({}), Balanced(10)), 50.0);
}

TEST(EvaluateTest, HandCountedLogits) {
  // argmaxes: class 1, class 0 (tie goes low), class 2 -> two of three right.
  const Dataset ds = testing::MakeDataset(
      Task::Nli(), {testing::MakeExample("a", "p1", 1, "h1"),
                    testing::MakeExample("b", "p2", 1, "h2"),
                    testing::MakeExample("c", "p3", 2, "h3")});
  const TableEncoder enc({{"p1 h1", {0.1, 0.7, 0.2}},
                          {"p2 h2", {0.5, 0.5, 0.0}},
                          {"p3 h3", {-1.0, -2.0, 3.0}}},
                         {0.0, 0.0, 0.0});
  EXPECT_NEAR(Evaluate(enc, ds), 200.0 / 3.0, 1e-12);
}

TEST(EvaluateTest, EmptyDatasetRejected) {
  EXPECT_ANY_THROW(Evaluate(TableEncoder({}), Balanced(0)));
}

TEST(EvaluateTest, InvariantToShuffling) {
  Dataset ds = Balanced(37);
  std::map<std::string, std::vector<double>> table;
  Rng rng(6);
  for (const auto& ex : ds.examples) table[ex.text_a] = {rng.Normal(), rng.Normal()};
  const TableEncoder enc(table);
  const double base = Evaluate(enc, ds);
  for (int t = 0; t < 20; ++t) {
    rng.Shuffle(std::span<LabeledExample>(ds.examples));
    EXPECT_EQ(Evaluate(enc, ds), base);
  }
}

TEST(AggregateOverallTest, SentimentRow) {
  const ResultRows rows = {{"SALAD",
                            {{"O-Test", 93.78}, {"CF-Test", 95.90}, {"Amazon", 94.99},
                             {"Yelp", 92.68}, {"SST-2", 95.58}, {"Twitter", 85.35}}}};
  EXPECT_NEAR(AggregateOverall(rows).at("SALAD"), 93.05, 0.005);
}

TEST(AggregateOverallTest, NliRow) {
  const ResultRows rows = {{"SALAD", {{"O-Test", 93.07}, {"CF-Test", 88.47}, {"ODD", 83.38}}}};
  EXPECT_NEAR(AggregateOverall(rows).at("SALAD"), 88.31, 0.005);
}

TEST(AggregateOverallTest, SingleSplit) {
  EXPECT_EQ(AggregateOverall({{"r", {{"only", 71.25}}}}).at("r"), 71.25);
}

TEST(AggregateOverallTest, MismatchedSplitsNamed) {
  try {
    AggregateOverall({{"a", {{"x", 1.0}}}, {"b", {{"y", 2.0}}}});
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_TRUE(msg.find("x") != std::string::npos || msg.find("y") != std::string::npos) << msg;
  }
}

TEST(AggregateOverallTest, InvariantToSplitOrder) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::pair<std::string, double>> cells;
    const int n = 1 + static_cast<int>(rng.Uniform(8));
    for (int i = 0; i < n; ++i) cells.push_back({"s" + std::to_string(i), 100 * rng.UniformReal()});
    double mean = 0;
    for (const auto& [_, v] : cells) mean += v;
    mean /= n;
    rng.Shuffle(std::span<std::pair<std::string, double>>(cells));
    ResultRows rows;
    for (const auto& [k, v] : cells) rows["r"][k] = v;
    EXPECT_NEAR(AggregateOverall(rows).at("r"), mean, 1e-9);
  }
}

TEST(EvalReportTest, SeedAverageThenSplitAverage) {
  const EvalReport r = EvalReport::FromPerSeed(
      {"A", "B"}, {1, 2, 3},
      {{"run", {{"A", {90.0, 80.0, 70.0}}, {"B", {60.0, 60.0, 63.0}}}}});
  EXPECT_DOUBLE_EQ(r.rows.at("run").at("A"), 80.0);
  EXPECT_DOUBLE_EQ(r.rows.at("run").at("B"), 61.0);
  EXPECT_DOUBLE_EQ(r.overall.at("run"), 70.5);
  EXPECT_EQ(r.per_seed.at("run").at("A").size(), 3u);
  const std::string table = r.FormatTable();
  EXPECT_NE(table.find("Methods"), std::string::npos);
  EXPECT_NE(table.find("Overall"), std::string::npos);
  EXPECT_NE(table.find("70.50"), std::string::npos);
  EXPECT_EQ(r.ToJson().at("overall").at("run"), 70.5);
}

Domain MakeDomain(const std::string& name, const std::string& abbr, int label_bias) {
  Domain d;
  d.name = name;
  d.abbreviation = abbr;
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 10; ++i) {
    ex.push_back(testing::MakeExample(name + std::to_string(i), name + " text " + std::to_string(i),
                                      (i + label_bias) % 2));
  }
  d.train = testing::MakeDataset(Task::Sentiment(), ex, name);
  d.test = testing::MakeDataset(Task::Sentiment(), ex, name + "-test");
  d.test.split = Split::kCrossDomain;
  return d;
}

DomainTrainer ConstantTrainer() {
  return [](const Dataset&, const Dataset&, std::uint64_t) -> std::unique_ptr<Encoder> {
    return std::make_unique<TableEncoder>(std::map<std::string, std::vector<double>>{});
  };
}

TEST(CrossDomainTest, TwoDomainsTwoCells) {
  const auto r = CrossDomain({MakeDomain("sst", "S", 0), MakeDomain("imdb", "I", 1)},
                             ConstantTrainer(), {1, 2}, "SALAD");
  EXPECT_EQ(r.split_order, (std::vector<std::string>{"S→I", "I→S"}));
  EXPECT_EQ(r.rows.at("SALAD").size(), 2u);
}

TEST(CrossDomainTest, ThreeDomainsSixCells) {
  const auto r = CrossDomain(
      {MakeDomain("sst", "S", 0), MakeDomain("imdb", "I", 1), MakeDomain("food", "F", 0)},
      ConstantTrainer(), {7}, "SALAD");
  EXPECT_EQ(r.split_order,
            (std::vector<std::string>{"S→I", "S→F", "I→S", "I→F", "F→S", "F→I"}));
  for (const std::string& col : r.split_order) {
    EXPECT_EQ(col.substr(0, 1) == col.substr(col.size() - 1), false);
    EXPECT_DOUBLE_EQ(r.rows.at("SALAD").at(col), 50.0);
  }
}

TEST(CrossDomainTest, FailedSourceIsRecordedAndOthersContinue) {
  const DomainTrainer flaky = [](const Dataset& train, const Dataset&,
                                 std::uint64_t) -> std::unique_ptr<Encoder> {
    if (train.name.rfind("imdb", 0) == 0) throw Error("diverged");
    return std::make_unique<TableEncoder>(std::map<std::string, std::vector<double>>{});
  };
  const auto r = CrossDomain({MakeDomain("sst", "S", 0), MakeDomain("imdb", "I", 1),
                              MakeDomain("food", "F", 0)},
                             flaky, {1}, "SALAD");
  EXPECT_EQ(r.errors.size(), 2u);
  EXPECT_NE(r.errors.at("SALAD/I→S").find("diverged"), std::string::npos);
  EXPECT_EQ(r.rows.at("SALAD").size(), 4u);
}

TEST(CrossDomainTest, NeedsTwoDomains) {
  EXPECT_THROW(CrossDomain({MakeDomain("sst", "S", 0)}, ConstantTrainer(), {1}, "x"),
               ConfigError);
}

TEST(DomainSplitsTest, EightyTwentyWithoutValidation) {
  const auto [train, val] = DomainSplits(MakeDomain("sst", "S", 0), 3);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(val.size(), 2u);
}

}  // namespace
}  // namespace salad
