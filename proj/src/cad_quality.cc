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

#include <set>
#include <unordered_map>
#include <unordered_set>

#include "salad/common.h"
#include "salad/rng.h"

namespace salad {
namespace {

std::set<std::string> TokenTypes(std::string_view text) {
  std::vector<std::string> tokens = Tokenize(text);
  return {std::make_move_iterator(tokens.begin()),
          std::make_move_iterator(tokens.end())};
}

double Cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("zero-norm embedding");
  return a.dot(b) / (na * nb);
}

template <typename Fn>
SimilarityResult ScorePairs(std::span<const TextPair> pairs, EmbedMode mode,
                            Fn score) {
  if (pairs.empty()) throw ContractViolation("no pairs to score");
  SimilarityResult result;
  result.mode = mode;
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      const double s = score(pairs[i]);
      result.per_pair.push_back(s);
      sum += s;
    } catch (const std::exception& e) {
      result.errors.emplace_back(i, e.what());
    }
  }
  if (result.per_pair.empty()) {
    throw Error("embedding failed for every pair: " +
                result.errors.front().second);
  }
  result.mean = sum / static_cast<double>(result.per_pair.size());
  return result;
}

CadQualityReport Assemble(const Dataset& train,
                          std::span<const CounterfactualExample> cad,
                          const std::vector<TextPair>& pairs,
                          const SimilarityResult& sim) {
  CadQualityReport report;
  report.diversity = Diversity(train, cad);
  report.overlap_pct = Overlap(pairs).overlap_pct;
  report.embed_sim = sim.mean;
  report.mode = sim.mode;
  report.pair_count = pairs.size();
  return report;
}

}  // namespace

std::size_t Diversity(std::span<const std::string> train_texts,
                      std::span<const std::string> cad_texts) {
  std::unordered_set<std::string> train_vocab;
  for (const std::string& t : train_texts) {
    for (std::string& tok : Tokenize(t)) train_vocab.insert(std::move(tok));
  }
  std::unordered_set<std::string> fresh;
  for (const std::string& t : cad_texts) {
    for (std::string& tok : Tokenize(t)) {
      if (!train_vocab.contains(tok)) fresh.insert(std::move(tok));
    }
  }
  return fresh.size();
}

std::size_t Diversity(const Dataset& train,
                      std::span<const CounterfactualExample> cad) {
  std::vector<std::string> train_texts;
  for (const LabeledExample& ex : train.examples) {
    train_texts.push_back(ex.FullText());
  }
  std::vector<std::string> cad_texts;
  for (const CounterfactualExample& cf : cad) cad_texts.push_back(cf.FullText());
  return Diversity(train_texts, cad_texts);
}

std::vector<TextPair> PairWithSources(
    const Dataset& train, std::span<const CounterfactualExample> cad) {
  std::unordered_map<std::string, const LabeledExample*> by_id;
  for (const LabeledExample& ex : train.examples) by_id.emplace(ex.id, &ex);
  std::vector<TextPair> pairs;
  for (const CounterfactualExample& cf : cad) {
    auto it = by_id.find(cf.source_id);
    if (it == by_id.end()) {
      throw DataError("counterfactual source '" + cf.source_id +
                      "' not found in " + train.name);
    }
    pairs.push_back({it->second->FullText(), cf.FullText()});
  }
  return pairs;
}

OverlapResult Overlap(std::span<const TextPair> pairs) {
  if (pairs.empty()) throw ContractViolation("no pairs to compare");
  OverlapResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::set<std::string> original = TokenTypes(pairs[i].original);
    if (original.empty()) {
      result.skipped.push_back(i);
      continue;
    }
    const std::set<std::string> cf = TokenTypes(pairs[i].counterfactual);
    std::size_t shared = 0;
    for (const std::string& t : original) shared += cf.contains(t);
    const double pct = 100.0 * static_cast<double>(shared) /
                       static_cast<double>(original.size());
    result.per_pair.push_back(pct);
    sum += pct;
  }
  if (!result.per_pair.empty()) {
    result.overlap_pct = sum / static_cast<double>(result.per_pair.size());
  }
  return result;
}

std::string_view EmbedModeName(EmbedMode mode) {
  return mode == EmbedMode::kPooled ? "pooled" : "token-matching";
}

Eigen::VectorXd HashingSentenceEmbedder::Embed(std::string_view text) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  for (const std::string& tok : Tokenize(text)) {
    const std::uint64_t h = DeriveSeed(0, {tok});
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v(static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_))) += sign;
  }
  return v;
}

Eigen::MatrixXd HashingTokenEmbedder::EmbedTokens(std::string_view text) const {
  const std::vector<std::string> tokens = Tokenize(text);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()), dim_);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Rng rng(DeriveSeed(0, {"token-embedding", tokens[i]}));
    Eigen::RowVectorXd row(dim_);
    for (int d = 0; d < dim_; ++d) row(d) = rng.Normal();
    out.row(static_cast<Eigen::Index>(i)) = row.normalized();
  }
  return out;
}

Eigen::VectorXd EncoderSentenceEmbedder::Embed(std::string_view text) const {
  const std::string s(text);
  return encoder_.Encode(std::span<const std::string>(&s, 1))
      .reprs.row(0)
      .transpose();
}

SimilarityResult EmbedSimilarity(std::span<const TextPair> pairs,
                                 const SentenceEmbedder& embedder) {
  return ScorePairs(pairs, EmbedMode::kPooled, [&](const TextPair& p) {
    return Cosine(embedder.Embed(p.original), embedder.Embed(p.counterfactual));
  });
}

SimilarityResult EmbedSimilarity(std::span<const TextPair> pairs,
                                 const TokenEmbedder& embedder) {
  return ScorePairs(pairs, EmbedMode::kTokenMatching, [&](const TextPair& p) {
    Eigen::MatrixXd ref = embedder.EmbedTokens(p.original);
    Eigen::MatrixXd cand = embedder.EmbedTokens(p.counterfactual);
    if (ref.rows() == 0 || cand.rows() == 0) throw Error("no tokens to match");
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
      const double n = ref.row(i).norm();
      if (n == 0.0) throw Error("zero-norm token embedding");
      ref.row(i) /= n;
    }
    for (Eigen::Index i = 0; i < cand.rows(); ++i) {
      const double n = cand.row(i).norm();
      if (n == 0.0) throw Error("zero-norm token embedding");
      cand.row(i) /= n;
    }
    const Eigen::MatrixXd sim = ref * cand.transpose();
    const double recall = sim.rowwise().maxCoeff().mean();
    const double precision = sim.colwise().maxCoeff().mean();
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
  });
}

nlohmann::json CadQualityReport::ToJson() const {
  return nlohmann::json{{"diversity", diversity},
                        {"overlap_pct", overlap_pct},
                        {"embed_sim", embed_sim},
                        {"mode", EmbedModeName(mode)},
                        {"pair_count", pair_count}};
}

CadQualityReport MeasureCadQuality(const Dataset& train,
                                   std::span<const CounterfactualExample> cad,
                                   const SentenceEmbedder& embedder) {
  const std::vector<TextPair> pairs = PairWithSources(train, cad);
  return Assemble(train, cad, pairs, EmbedSimilarity(pairs, embedder));
}

CadQualityReport MeasureCadQuality(const Dataset& train,
                                   std::span<const CounterfactualExample> cad,
                                   const TokenEmbedder& embedder) {
  const std::vector<TextPair> pairs = PairWithSources(train, cad);
  return Assemble(train, cad, pairs, EmbedSimilarity(pairs, embedder));
}

}  // namespace salad
