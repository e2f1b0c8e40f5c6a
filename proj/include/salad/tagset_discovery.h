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

#ifndef SALAD_TAGSET_DISCOVERY_H_
#define SALAD_TAGSET_DISCOVERY_H_

#include <array>
#include <cstddef>
#include <set>
#include <string>

#include "json.hpp"
#include "salad/corpus.h"
#include "salad/postag.h"

namespace salad {

// A fixed classifier queried for single predictions. Must be deterministic
// for a fixed model state and safe to call from several threads.
class ClassifierOracle {
 public:
  virtual ~ClassifierOracle() = default;
  virtual int Predict(const LabeledExample& example) const = 0;
};

struct TagImportanceReport {
  std::string dataset_name;
  std::size_t m = 0;
  // Accuracy drop per tag, indexed by static_cast<size_t>(UniversalTag).
  std::array<double, kNumUniversalTags> reduction{};
  // Raw counts behind each score, kept for audit.
  std::size_t correct_original = 0;
  std::array<std::size_t, kNumUniversalTags> correct_ablated{};

  double Score(UniversalTag tag) const {
    return reduction[static_cast<std::size_t>(tag)];
  }
};

struct TagSetPartition {
  std::set<UniversalTag> causal;
  std::set<UniversalTag> noncausal;
  double threshold = 0.0;

  bool IsCausal(UniversalTag tag) const { return causal.contains(tag); }
};

inline constexpr double kDefaultTagThreshold = 0.01;

struct ScoreOptions {
  // Upper bound on concurrent oracle calls; 1 scores sequentially.
  std::size_t max_parallelism = 1;
};

// For every universal tag, the accuracy of `oracle` on the examples minus
// its accuracy on the same examples with that tag's tokens removed. When a
// sentence has no token of a tag its ablation is the sentence itself and the
// original prediction is reused.
TagImportanceReport ScoreTags(const Dataset& dataset,
                              const ClassifierOracle& oracle,
                              const Tagger& tagger,
                              const ScoreOptions& options = {});

// R >= threshold is causal, everything else non-causal.
TagSetPartition PartitionTags(const TagImportanceReport& report,
                              double threshold);

nlohmann::json TagReportToJson(const TagImportanceReport& report,
                               const TagSetPartition& partition);
TagSetPartition PartitionFromJson(const nlohmann::json& j);

// Aligned per-tag table: tag, R in percent, causal/non-causal.
std::string FormatTagTable(const TagImportanceReport& report,
                           const TagSetPartition& partition);

}  // namespace salad

#endif  // SALAD_TAGSET_DISCOVERY_H_
