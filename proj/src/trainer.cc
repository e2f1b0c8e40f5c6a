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

#include "salad/trainer.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "salad/common.h"
#include "salad/eval_harness.h"
#include "salad/rng.h"

namespace salad {

void TrainingConfig::Validate() const {
  if (batch_size < 1 || epochs < 1 || max_seq_len < 1 ||
      !(learning_rate > 0.0)) {
    throw ConfigError(
        "batch_size, epochs, max_seq_len and learning_rate must be positive");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
}

nlohmann::json EpochMetrics::ToJson() const {
  nlohmann::json j{{"epoch", epoch}, {"ce", ce}, {"cl", cl}, {"total", total}};
  j["val_acc"] = val_acc ? nlohmann::json(*val_acc) : nlohmann::json(nullptr);
  return j;
}

namespace {

std::unordered_map<std::string, const CounterfactualExample*> IndexNegatives(
    const TrainingInputs& inputs) {
  std::unordered_map<std::string, const CounterfactualExample*> by_source;
  for (const CounterfactualExample& cf : inputs.negatives) {
    by_source.emplace(cf.source_id, &cf);
  }
  return by_source;
}

void CheckInputs(const TrainingInputs& in) {
  if (in.train == nullptr || in.partition == nullptr) {
    throw ContractViolation("training inputs need a dataset and a partition");
  }
  if (in.train->empty()) throw ContractViolation("training set is empty");
  if (in.tagged.size() != in.train->size()) {
    throw ContractViolation("tagged examples must align with the training set");
  }
  if (in.k < 1) throw ContractViolation("k must be at least 1");
}

}  // namespace

std::vector<AugmentedTriplet> AssembleTriplets(const TrainingInputs& inputs,
                                               int epoch, std::uint64_t seed) {
  CheckInputs(inputs);
  const auto negatives = IndexNegatives(inputs);
  std::vector<PositiveExample> positives = GenerateEpochPositives(
      inputs.tagged, *inputs.partition, inputs.k, epoch, seed, inputs.unk_token);
  std::vector<AugmentedTriplet> out;
  for (std::size_t i = 0; i < inputs.train->size(); ++i) {
    const LabeledExample& anchor = inputs.train->examples[i];
    auto it = negatives.find(anchor.id);
    if (it == negatives.end()) continue;
    if (it->second->label == anchor.label) {
      throw DataError("counterfactual for " + anchor.id +
                      " carries the source label");
    }
    out.push_back({&anchor, std::move(positives[i]), it->second});
  }
  return out;
}

BatchLoss BatchLossAndGrad(Encoder& encoder, const BatchTexts& batch,
                           const LossConfig& loss_cfg, bool ce_on_negatives) {
  const auto n = static_cast<Eigen::Index>(batch.anchors.size());
  const auto m = static_cast<Eigen::Index>(batch.negative_rows.size());
  if (n == 0 || batch.labels.size() != batch.anchors.size() ||
      batch.negatives.size() != batch.negative_rows.size() ||
      batch.negative_labels.size() != batch.negative_rows.size()) {
    throw ContractViolation("malformed training batch");
  }
  const double lambda = loss_cfg.lambda;
  const bool triplets = lambda > 0.0 && m > 0;
  if (triplets && batch.positives.size() != batch.negative_rows.size()) {
    throw ContractViolation("every triplet needs a positive");
  }
  const bool ce_negatives = ce_on_negatives && m > 0;

  // Rows: anchors, then positives, then counterfactuals.
  std::vector<std::string> texts = batch.anchors;
  Eigen::Index pos_row = -1, neg_row = -1;
  if (triplets) {
    pos_row = static_cast<Eigen::Index>(texts.size());
    texts.insert(texts.end(), batch.positives.begin(), batch.positives.end());
  }
  if (triplets || ce_negatives) {
    neg_row = static_cast<Eigen::Index>(texts.size());
    texts.insert(texts.end(), batch.negatives.begin(), batch.negatives.end());
  }
  const EncodeOutput out = encoder.Forward(texts);
  if (!out.logits.allFinite() || !out.reprs.allFinite()) {
    throw TrainingDivergedError("encoder produced non-finite outputs");
  }
  const auto rows = static_cast<Eigen::Index>(texts.size());
  Matrix grad_reprs = Matrix::Zero(rows, encoder.hidden_size());
  Matrix grad_logits = Matrix::Zero(rows, encoder.num_classes());

  std::vector<int> ce_labels = batch.labels;
  Matrix ce_logits;
  if (ce_negatives) {
    ce_logits.resize(n + m, out.logits.cols());
    ce_logits.topRows(n) = out.logits.topRows(n);
    ce_logits.bottomRows(m) = out.logits.middleRows(neg_row, m);
    ce_labels.insert(ce_labels.end(), batch.negative_labels.begin(),
                     batch.negative_labels.end());
  } else {
    ce_logits = out.logits.topRows(n);
  }
  const LossAndGrad ce = CrossEntropyWithGrad(ce_logits, ce_labels);
  grad_logits.topRows(n) = (1.0 - lambda) * ce.grad.topRows(n);
  if (ce_negatives) {
    grad_logits.middleRows(neg_row, m) += (1.0 - lambda) * ce.grad.bottomRows(m);
  }

  BatchLoss result;
  result.ce = ce.loss;
  if (triplets) {
    Matrix anchors(m, out.reprs.cols());
    for (Eigen::Index t = 0; t < m; ++t) {
      anchors.row(t) = out.reprs.row(static_cast<Eigen::Index>(
          batch.negative_rows[static_cast<std::size_t>(t)]));
    }
    const TripletLossAndGrad tl =
        TripletLossWithGrad(anchors, out.reprs.middleRows(pos_row, m),
                            out.reprs.middleRows(neg_row, m), loss_cfg);
    for (Eigen::Index t = 0; t < m; ++t) {
      grad_reprs.row(static_cast<Eigen::Index>(
          batch.negative_rows[static_cast<std::size_t>(t)])) +=
          lambda * tl.grad_anchor.row(t);
    }
    grad_reprs.middleRows(pos_row, m) += lambda * tl.grad_positive;
    grad_reprs.middleRows(neg_row, m) += lambda * tl.grad_negative;
    result.cl = tl.loss;
    result.triplets = static_cast<std::size_t>(m);
    result.total = CombinedLoss(ce.loss, tl.loss, lambda);
  } else {
    result.total = (1.0 - lambda) * ce.loss;
  }
  encoder.ZeroGrad();
  encoder.Backward(grad_reprs, grad_logits);
  return result;
}

std::vector<EpochMetrics> Train(const TrainingInputs& inputs,
                                const LossConfig& loss_cfg,
                                const TrainingConfig& train_cfg,
                                std::uint64_t seed, Encoder& encoder,
                                const EpochCallback& on_epoch) {
  CheckInputs(inputs);
  loss_cfg.Validate();
  train_cfg.Validate();
  encoder.SetMaxSequenceLength(train_cfg.max_seq_len);
  const auto negatives = IndexNegatives(inputs);
  const bool use_triplets = loss_cfg.lambda > 0.0;
  const double lambda = loss_cfg.lambda;
  const Dataset& train = *inputs.train;
  const std::size_t n = train.size();

  AdamOptimizer optimizer(train_cfg.learning_rate);
  std::vector<EpochMetrics> log;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::vector<PositiveExample> positives;
    if (use_triplets) {
      positives = GenerateEpochPositives(inputs.tagged, *inputs.partition,
                                         inputs.k, epoch, seed, inputs.unk_token);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(DeriveSeed(seed, {"shuffle"},
                               {static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.Shuffle(std::span<std::size_t>(order));

    EpochMetrics metrics;
    metrics.epoch = epoch;
    double ce_sum = 0.0, cl_sum = 0.0, total_sum = 0.0;
    std::size_t batches = 0, cl_batches = 0;
    const auto bs = static_cast<std::size_t>(train_cfg.batch_size);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      BatchTexts batch_texts;
      for (std::size_t j = start; j < end; ++j) {
        const LabeledExample& ex = train.examples[order[j]];
        batch_texts.anchors.push_back(ex.FullText());
        batch_texts.labels.push_back(ex.label);
        auto it = negatives.find(ex.id);
        if (it == negatives.end()) continue;
        batch_texts.negative_rows.push_back(j - start);
        if (use_triplets) {
          batch_texts.positives.push_back(positives[order[j]].FullText());
        }
        batch_texts.negatives.push_back(it->second->FullText());
        batch_texts.negative_labels.push_back(it->second->label);
      }
      auto diverged = [&](std::string_view detail) {
        std::ostringstream msg;
        msg << "non-finite loss at seed " << seed << " epoch " << epoch
            << " batch " << batches << " (" << detail << ", lambda=" << lambda
            << ", lr=" << train_cfg.learning_rate << ")";
        return TrainingDivergedError(msg.str());
      };
      BatchLoss loss;
      try {
        loss = BatchLossAndGrad(encoder, batch_texts, loss_cfg,
                                train_cfg.ce_on_negatives);
      } catch (const TrainingDivergedError& e) {
        throw diverged(e.what());
      }
      if (!std::isfinite(loss.total) || !std::isfinite(loss.ce) ||
          !std::isfinite(loss.cl)) {
        std::ostringstream detail;
        detail << "ce=" << loss.ce << ", cl=" << loss.cl;
        throw diverged(detail.str());
      }
      const std::vector<ParameterBlock> params = encoder.Parameters();
      optimizer.Step(params);
      if (loss.triplets > 0) {
        cl_sum += loss.cl;
        ++cl_batches;
        metrics.triplets += loss.triplets;
      }
      ce_sum += loss.ce;
      total_sum += loss.total;
      ++batches;
    }
    metrics.ce = ce_sum / static_cast<double>(batches);
    metrics.cl = cl_batches > 0 ? cl_sum / static_cast<double>(cl_batches) : 0.0;
    metrics.total = total_sum / static_cast<double>(batches);
    if (inputs.validation != nullptr && !inputs.validation->empty()) {
      metrics.val_acc = Evaluate(encoder, *inputs.validation);
    }
    log.push_back(metrics);
    if (on_epoch) on_epoch(metrics, encoder);
  }
  return log;
}

double TripletOrderingRate(const Encoder& encoder,
                           std::span<const AugmentedTriplet> triplets,
                           Distance distance) {
  if (triplets.empty()) throw ContractViolation("no triplets to measure");
  std::vector<std::string> texts;
  texts.reserve(3 * triplets.size());
  for (const AugmentedTriplet& t : triplets) texts.push_back(t.anchor->FullText());
  for (const AugmentedTriplet& t : triplets) texts.push_back(t.positive.FullText());
  for (const AugmentedTriplet& t : triplets) texts.push_back(t.negative->FullText());
  const EncodeOutput out = encoder.Encode(texts);
  const auto m = static_cast<Eigen::Index>(triplets.size());
  std::size_t ordered = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double dp = PairDistance(out.reprs.row(i), out.reprs.row(m + i), distance);
    const double dn =
        PairDistance(out.reprs.row(i), out.reprs.row(2 * m + i), distance);
    ordered += dp < dn;
  }
  return static_cast<double>(ordered) / static_cast<double>(m);
}

}  // namespace salad
