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

#ifndef SALAD_TRAINER_H_
#define SALAD_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "salad/corpus.h"
#include "salad/encoder.h"
#include "salad/losses.h"
#include "salad/negative_gen.h"
#include "salad/positive_gen.h"
#include "salad/postag.h"

namespace salad {

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

struct TrainingConfig {
  int batch_size = 16;
  double learning_rate = 1e-5;
  int max_seq_len = 256;
  int epochs = 3;
  std::vector<std::uint64_t> seeds = {13, 21, 42};
  // Also apply cross-entropy to the counterfactuals with their flipped labels.
  bool ce_on_negatives = false;

  static int DefaultMaxSeqLen(const Task& task) {
    return task.is_pair_task() ? 128 : 256;
  }
  void Validate() const;
};

// (anchor, positive, negative) for one training example.
struct AugmentedTriplet {
  const LabeledExample* anchor = nullptr;
  PositiveExample positive;
  const CounterfactualExample* negative = nullptr;
};

struct EpochMetrics {
  int epoch = 0;
  double ce = 0.0;
  double cl = 0.0;
  double total = 0.0;
  std::optional<double> val_acc;  // percent
  std::size_t triplets = 0;

  nlohmann::json ToJson() const;
};

struct TrainingInputs {
  const Dataset* train = nullptr;
  // Aligned with train->examples.
  std::span<const TaggedExample> tagged;
  std::span<const CounterfactualExample> negatives;
  const TagSetPartition* partition = nullptr;
  int k = 1;
  std::string unk_token = "[UNK]";
  const Dataset* validation = nullptr;  // optional
};

using EpochCallback = std::function<void(const EpochMetrics&, Encoder&)>;

// One training batch. Anchor i is batch.anchors[i]; every entry of
// negative_rows names an anchor that has a counterfactual, with the matching
// masked positive and counterfactual at the same index of the parallel lists.
struct BatchTexts {
  std::vector<std::string> anchors;
  std::vector<int> labels;
  std::vector<std::size_t> negative_rows;
  std::vector<std::string> positives;  // may be empty when lambda == 0
  std::vector<std::string> negatives;
  std::vector<int> negative_labels;
};

struct BatchLoss {
  double ce = 0.0;
  double cl = 0.0;
  double total = 0.0;
  std::size_t triplets = 0;
};

// Runs the forward pass, evaluates (1 - lambda) * CE + lambda * triplet, and
// leaves d total / d parameters in the encoder's gradient buffers. Without
// triplets in the batch the total is (1 - lambda) * CE.
BatchLoss BatchLossAndGrad(Encoder& encoder, const BatchTexts& batch,
                           const LossConfig& loss_cfg, bool ce_on_negatives);

// Each epoch regenerates positives from the (seed, epoch) stream, shuffles
// the anchors, and minimises (1 - lambda) * CE(anchors) + lambda *
// triplet(anchor, positive, negative) batch by batch with Adam. Anchors
// without a counterfactual contribute to CE only. With lambda == 0 the
// triplet branch is skipped entirely.
std::vector<EpochMetrics> Train(const TrainingInputs& inputs,
                                const LossConfig& loss_cfg,
                                const TrainingConfig& train_cfg,
                                std::uint64_t seed, Encoder& encoder,
                                const EpochCallback& on_epoch = {});

// Triplets for `epoch`, in dataset order; examples without a negative are
// left out.
std::vector<AugmentedTriplet> AssembleTriplets(const TrainingInputs& inputs,
                                               int epoch, std::uint64_t seed);

// Fraction of triplets with d(anchor, positive) < d(anchor, negative).
double TripletOrderingRate(const Encoder& encoder,
                           std::span<const AugmentedTriplet> triplets,
                           Distance distance);

}  // namespace salad

#endif  // SALAD_TRAINER_H_
