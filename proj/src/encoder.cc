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

#include "salad/encoder.h"

#include <algorithm>
#include <cmath>

#include "salad/common.h"
#include "salad/corpus.h"
#include "salad/rng.h"

namespace salad {

using json = nlohmann::json;

void Encoder::ZeroGrad() {
  for (const ParameterBlock& b : Parameters()) {
    std::fill(b.grad.begin(), b.grad.end(), 0.0);
  }
}

int ArgMax(const Eigen::Ref<const Eigen::RowVectorXd>& logits) {
  int best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c) {
    if (logits(c) > logits(best)) best = static_cast<int>(c);
  }
  return best;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{"[UNK]"}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw ContractViolation("vocabulary needs an unk token");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::Build(std::span<const std::string> texts,
                             const std::string& unk_token) {
  std::vector<std::string> tokens{unk_token};
  std::unordered_map<std::string, int> seen{{unk_token, 0}};
  for (const std::string& text : texts) {
    for (std::string& tok : Tokenize(text)) {
      if (seen.emplace(tok, static_cast<int>(tokens.size())).second) {
        tokens.push_back(std::move(tok));
      }
    }
  }
  return Vocabulary(std::move(tokens));
}

int Vocabulary::Id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknownId : it->second;
}

ToyEncoder::ToyEncoder(Vocabulary vocab, const ToyEncoderConfig& cfg)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  if (cfg_.embedding_dim < 1 || cfg_.hidden < 1 || cfg_.num_classes < 2 ||
      cfg_.max_seq_len < 1) {
    throw ConfigError("toy encoder dimensions must be positive");
  }
  Rng rng(DeriveSeed(cfg_.init_seed, {"toy_encoder_init"}));
  auto init = [&rng](Matrix& m, Eigen::Index rows, Eigen::Index cols,
                     double scale) {
    m.resize(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.Normal();
    }
  };
  const double e = cfg_.embedding_dim;
  const double h = cfg_.hidden;
  init(embeddings_, vocab_.size(), cfg_.embedding_dim, 1.0);
  init(w1_, cfg_.hidden, cfg_.embedding_dim, std::sqrt(1.0 / e));
  init(w2_, cfg_.num_classes, cfg_.hidden, std::sqrt(1.0 / h));
  b1_ = Eigen::VectorXd::Zero(cfg_.hidden);
  b2_ = Eigen::VectorXd::Zero(cfg_.num_classes);
  g_embeddings_ = Matrix::Zero(embeddings_.rows(), embeddings_.cols());
  g_w1_ = Matrix::Zero(w1_.rows(), w1_.cols());
  g_w2_ = Matrix::Zero(w2_.rows(), w2_.cols());
  g_b1_ = Eigen::VectorXd::Zero(b1_.size());
  g_b2_ = Eigen::VectorXd::Zero(b2_.size());
}

void ToyEncoder::SetMaxSequenceLength(int max_tokens) {
  if (max_tokens < 1) throw ConfigError("max_seq_len must be positive");
  cfg_.max_seq_len = max_tokens;
}

std::vector<int> ToyEncoder::TokenIds(const std::string& text) const {
  std::vector<std::string> tokens = Tokenize(text);
  if (tokens.size() > static_cast<std::size_t>(cfg_.max_seq_len)) {
    tokens.resize(static_cast<std::size_t>(cfg_.max_seq_len));
  }
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(vocab_.Id(t));
  return ids;
}

ToyEncoder::Activations ToyEncoder::Run(
    std::span<const std::string> texts) const {
  const auto batch = static_cast<Eigen::Index>(texts.size());
  Activations a;
  a.ids.reserve(texts.size());
  a.pooled_input = Matrix::Zero(batch, cfg_.embedding_dim);
  for (Eigen::Index i = 0; i < batch; ++i) {
    a.ids.push_back(TokenIds(texts[static_cast<std::size_t>(i)]));
    const std::vector<int>& ids = a.ids.back();
    if (ids.empty()) continue;
    for (int id : ids) a.pooled_input.row(i) += embeddings_.row(id);
    a.pooled_input.row(i) /= static_cast<double>(ids.size());
  }
  a.reprs = ((a.pooled_input * w1_.transpose()).rowwise() + b1_.transpose())
                .array()
                .tanh()
                .matrix();
  a.logits = (a.reprs * w2_.transpose()).rowwise() + b2_.transpose();
  return a;
}

EncodeOutput ToyEncoder::Forward(std::span<const std::string> texts) {
  cache_ = Run(texts);
  return {cache_.reprs, cache_.logits};
}

EncodeOutput ToyEncoder::Encode(std::span<const std::string> texts) const {
  Activations a = Run(texts);
  return {std::move(a.reprs), std::move(a.logits)};
}

void ToyEncoder::Backward(const Matrix& grad_reprs, const Matrix& grad_logits) {
  const Eigen::Index batch = cache_.reprs.rows();
  if (grad_reprs.rows() != batch || grad_logits.rows() != batch ||
      grad_reprs.cols() != cfg_.hidden ||
      grad_logits.cols() != cfg_.num_classes) {
    throw ContractViolation("Backward: gradient shapes do not match Forward");
  }
  g_w2_ += grad_logits.transpose() * cache_.reprs;
  g_b2_ += grad_logits.colwise().sum().transpose();
  const Matrix grad_r = grad_reprs + grad_logits * w2_;
  const Matrix grad_z =
      (grad_r.array() * (1.0 - cache_.reprs.array().square())).matrix();
  g_w1_ += grad_z.transpose() * cache_.pooled_input;
  g_b1_ += grad_z.colwise().sum().transpose();
  const Matrix grad_u = grad_z * w1_;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const std::vector<int>& ids = cache_.ids[static_cast<std::size_t>(i)];
    if (ids.empty()) continue;
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (int id : ids) g_embeddings_.row(id) += inv * grad_u.row(i);
  }
}

std::vector<ParameterBlock> ToyEncoder::Parameters() {
  auto block = [](std::string name, auto& value, auto& grad) {
    return ParameterBlock{
        std::move(name),
        std::span<double>(value.data(), static_cast<std::size_t>(value.size())),
        std::span<double>(grad.data(), static_cast<std::size_t>(grad.size()))};
  };
  return {block("embeddings", embeddings_, g_embeddings_),
          block("w1", w1_, g_w1_), block("b1", b1_, g_b1_),
          block("w2", w2_, g_w2_), block("b2", b2_, g_b2_)};
}

json ToyEncoder::ToJson() const {
  auto flat = [](const auto& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  return json{
      {"format", "salad-toy-encoder-v1"},
      {"embedding_dim", cfg_.embedding_dim},
      {"hidden", cfg_.hidden},
      {"num_classes", cfg_.num_classes},
      {"max_seq_len", cfg_.max_seq_len},
      {"init_seed", cfg_.init_seed},
      {"vocab", vocab_.tokens()},
      {"embeddings", flat(embeddings_)},
      {"w1", flat(w1_)},
      {"b1", flat(b1_)},
      {"w2", flat(w2_)},
      {"b2", flat(b2_)},
  };
}

ToyEncoder ToyEncoder::FromJson(const json& j) {
  try {
    if (j.at("format") != "salad-toy-encoder-v1") {
      throw DataError("unsupported checkpoint format");
    }
    ToyEncoderConfig cfg;
    cfg.embedding_dim = j.at("embedding_dim").get<int>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.num_classes = j.at("num_classes").get<int>();
    cfg.max_seq_len = j.at("max_seq_len").get<int>();
    cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
    ToyEncoder enc(Vocabulary(j.at("vocab").get<std::vector<std::string>>()),
                   cfg);
    auto load = [&j](const char* key, auto& m) {
      const auto values = j.at(key).get<std::vector<double>>();
      if (values.size() != static_cast<std::size_t>(m.size())) {
        throw DataError(std::string("checkpoint block '") + key +
                        "' has the wrong size");
      }
      std::copy(values.begin(), values.end(), m.data());
    };
    load("embeddings", enc.embeddings_);
    load("w1", enc.w1_);
    load("b1", enc.b1_);
    load("w2", enc.w2_);
    load("b2", enc.b2_);
    return enc;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void AdamOptimizer::Step(std::span<const ParameterBlock> blocks) {
  if (m_.empty()) {
    for (const ParameterBlock& b : blocks) {
      m_.emplace_back(b.value.size(), 0.0);
      v_.emplace_back(b.value.size(), 0.0);
    }
  }
  if (m_.size() != blocks.size()) {
    throw ContractViolation("AdamOptimizer: parameter blocks changed");
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<double>& m = m_[b];
    std::vector<double>& v = v_[b];
    const ParameterBlock& block = blocks[b];
    for (std::size_t i = 0; i < block.value.size(); ++i) {
      const double g = block.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      block.value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

int EncoderOracle::Predict(const LabeledExample& example) const {
  const std::string text = example.FullText();
  const EncodeOutput out = encoder_.Encode(std::span<const std::string>(&text, 1));
  return ArgMax(out.logits.row(0));
}

}  // namespace salad
