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

#ifndef SALAD_CAD_QUALITY_H_
#define SALAD_CAD_QUALITY_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "salad/corpus.h"
#include "salad/encoder.h"
#include "salad/negative_gen.h"

namespace salad {

// Number of distinct token types that occur in some counterfactual text but
// in no training text.
std::size_t Diversity(const Dataset& train,
                      std::span<const CounterfactualExample> cad);
std::size_t Diversity(std::span<const std::string> train_texts,
                      std::span<const std::string> cad_texts);

struct TextPair {
  std::string original;
  std::string counterfactual;
};

// Pairs each counterfactual with its source example by id.
std::vector<TextPair> PairWithSources(const Dataset& train,
                                      std::span<const CounterfactualExample> cad);

struct OverlapResult {
  double overlap_pct = 0.0;
  std::vector<double> per_pair;        // percent, for scored pairs
  std::vector<std::size_t> skipped;    // indices of pairs with empty originals
};

// Mean over pairs of |types(original) ∩ types(cf)| / |types(original)|, in
// percent.
OverlapResult Overlap(std::span<const TextPair> pairs);

enum class EmbedMode { kPooled, kTokenMatching };
std::string_view EmbedModeName(EmbedMode mode);

class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual Eigen::VectorXd Embed(std::string_view text) const = 0;
};

// One row per token.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual Eigen::MatrixXd EmbedTokens(std::string_view text) const = 0;
};

// Signed feature hashing of word tokens into `dim` buckets.
class HashingSentenceEmbedder : public SentenceEmbedder {
 public:
  explicit HashingSentenceEmbedder(int dim = 512) : dim_(dim) {}
  Eigen::VectorXd Embed(std::string_view text) const override;

 private:
  int dim_;
};

// A fixed pseudo-random unit vector per token type.
class HashingTokenEmbedder : public TokenEmbedder {
 public:
  explicit HashingTokenEmbedder(int dim = 64) : dim_(dim) {}
  Eigen::MatrixXd EmbedTokens(std::string_view text) const override;

 private:
  int dim_;
};

// Pooled representation of a trained encoder.
class EncoderSentenceEmbedder : public SentenceEmbedder {
 public:
  explicit EncoderSentenceEmbedder(const Encoder& encoder) : encoder_(encoder) {}
  Eigen::VectorXd Embed(std::string_view text) const override;

 private:
  const Encoder& encoder_;
};

struct SimilarityResult {
  double mean = 0.0;
  EmbedMode mode = EmbedMode::kPooled;
  std::vector<double> per_pair;
  std::vector<std::pair<std::size_t, std::string>> errors;
};

// Mean cosine similarity of pooled embeddings.
SimilarityResult EmbedSimilarity(std::span<const TextPair> pairs,
                                 const SentenceEmbedder& embedder);
// Mean greedy-matching F1 over token cosine similarities.
SimilarityResult EmbedSimilarity(std::span<const TextPair> pairs,
                                 const TokenEmbedder& embedder);

struct CadQualityReport {
  std::size_t diversity = 0;
  double overlap_pct = 0.0;
  double embed_sim = 0.0;
  std::size_t pair_count = 0;
  EmbedMode mode = EmbedMode::kPooled;

  nlohmann::json ToJson() const;
};

CadQualityReport MeasureCadQuality(const Dataset& train,
                                   std::span<const CounterfactualExample> cad,
                                   const SentenceEmbedder& embedder);
CadQualityReport MeasureCadQuality(const Dataset& train,
                                   std::span<const CounterfactualExample> cad,
                                   const TokenEmbedder& embedder);

}  // namespace salad

#endif  // SALAD_CAD_QUALITY_H_
