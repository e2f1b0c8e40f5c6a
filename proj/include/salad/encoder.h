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

#ifndef SALAD_ENCODER_H_
#define SALAD_ENCODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "salad/losses.h"
#include "salad/tagset_discovery.h"

namespace salad {

struct EncodeOutput {
  Matrix reprs;   // batch x hidden, pooled representations
  Matrix logits;  // batch x classes
};

// A contiguous block of trainable parameters and its gradient accumulator.
struct ParameterBlock {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

// Text encoder with a classification head. Forward() caches activations
// for the following Backward(); Encode() is the const inference path and
// may run concurrently with other Encode() calls.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual int hidden_size() const = 0;
  virtual int num_classes() const = 0;
  virtual void SetMaxSequenceLength(int max_tokens) = 0;

  virtual EncodeOutput Forward(std::span<const std::string> texts) = 0;
  virtual EncodeOutput Encode(std::span<const std::string> texts) const = 0;
  // Accumulates d loss / d parameters given d loss / d outputs of the last
  // Forward().
  virtual void Backward(const Matrix& grad_reprs, const Matrix& grad_logits) = 0;

  virtual std::vector<ParameterBlock> Parameters() = 0;
  void ZeroGrad();
};

// Index of the largest logit; ties resolve to the lowest class index.
int ArgMax(const Eigen::Ref<const Eigen::RowVectorXd>& logits);

class Vocabulary {
 public:
  static constexpr int kUnknownId = 0;

  Vocabulary();  // holds only the unknown token
  explicit Vocabulary(std::vector<std::string> tokens);

  // Adds every token of every text, in first-seen order.
  static Vocabulary Build(std::span<const std::string> texts,
                          const std::string& unk_token = "[UNK]");

  int Id(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct ToyEncoderConfig {
  int embedding_dim = 16;
  int hidden = 8;
  int num_classes = 2;
  int max_seq_len = 256;
  std::uint64_t init_seed = 0;
};

// Mean-of-embeddings -> tanh layer (the pooled representation) -> linear
// classifier head.
class ToyEncoder : public Encoder {
 public:
  ToyEncoder(Vocabulary vocab, const ToyEncoderConfig& cfg);

  int hidden_size() const override { return cfg_.hidden; }
  int num_classes() const override { return cfg_.num_classes; }
  void SetMaxSequenceLength(int max_tokens) override;

  EncodeOutput Forward(std::span<const std::string> texts) override;
  EncodeOutput Encode(std::span<const std::string> texts) const override;
  void Backward(const Matrix& grad_reprs, const Matrix& grad_logits) override;
  std::vector<ParameterBlock> Parameters() override;

  const Vocabulary& vocabulary() const { return vocab_; }
  const ToyEncoderConfig& config() const { return cfg_; }

  nlohmann::json ToJson() const;
  static ToyEncoder FromJson(const nlohmann::json& j);

 private:
  struct Activations {
    std::vector<std::vector<int>> ids;
    Matrix pooled_input;  // batch x embedding_dim
    Matrix reprs;
    Matrix logits;
  };

  std::vector<int> TokenIds(const std::string& text) const;
  Activations Run(std::span<const std::string> texts) const;

  Vocabulary vocab_;
  ToyEncoderConfig cfg_;
  Matrix embeddings_;  // vocab x embedding_dim
  Matrix w1_;          // hidden x embedding_dim
  Eigen::VectorXd b1_;
  Matrix w2_;          // classes x hidden
  Eigen::VectorXd b2_;
  Matrix g_embeddings_, g_w1_, g_w2_;
  Eigen::VectorXd g_b1_, g_b2_;
  Activations cache_;
};

// Adam over an encoder's parameter blocks.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void Step(std::span<const ParameterBlock> blocks);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Wraps an encoder as a ClassifierOracle predicting on FullText().
class EncoderOracle : public ClassifierOracle {
 public:
  explicit EncoderOracle(const Encoder& encoder) : encoder_(encoder) {}
  int Predict(const LabeledExample& example) const override;

 private:
  const Encoder& encoder_;
};

}  // namespace salad

#endif  // SALAD_ENCODER_H_
