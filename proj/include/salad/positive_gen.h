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

#ifndef SALAD_POSITIVE_GEN_H_
#define SALAD_POSITIVE_GEN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salad/corpus.h"
#include "salad/postag.h"
#include "salad/rng.h"
#include "salad/tagset_discovery.h"

namespace salad {

struct PositiveGenConfig {
  // Multiplier applied to the mean non-causal token count to get k.
  double scaling_factor = 0.18;
  std::optional<int> k_override;
  std::string unk_token = "[UNK]";
  std::uint64_t seed = 0;

  void Validate() const;
};

// Structure-preserving copy of a training example with some non-causal
// tokens masked.
struct PositiveExample {
  std::string source_id;
  std::string text;
  std::optional<std::string> text_b;
  std::vector<std::size_t> replaced_positions;  // ascending token indices
  int epoch = 0;
  // Set when the source had no non-causal token and is returned unchanged.
  bool unmodified = false;

  std::string FullText() const { return text_b ? text + " " + *text_b : text; }
};

// Mean number of non-causal tokens per example.
double MeanNonCausalCount(std::span<const TaggedExample> tagged,
                          const TagSetPartition& partition);

// round(mean * scaling_factor), halves away from zero, at least 1.
// k_override wins when present.
int KFromMean(double mean_noncausal, const PositiveGenConfig& cfg);

int ComputeK(std::span<const TaggedExample> tagged,
             const TagSetPartition& partition, const PositiveGenConfig& cfg);
int ComputeK(const Dataset& train, const TagSetPartition& partition,
             const PositiveGenConfig& cfg, const Tagger& tagger);

// Replaces min(k, #non-causal) distinct non-causal tokens, drawn uniformly
// without replacement, by `unk_token`.
PositiveExample GeneratePositive(const TaggedExample& tagged,
                                 const TagSetPartition& partition, int k,
                                 const std::string& unk_token, Rng& rng);

// One positive per example. Each example draws from its own stream keyed by
// (seed, epoch, example id).
std::vector<PositiveExample> GenerateEpochPositives(
    std::span<const TaggedExample> tagged, const TagSetPartition& partition,
    int k, int epoch, std::uint64_t seed, const std::string& unk_token);

std::string SerializePositives(std::span<const PositiveExample> positives);

}  // namespace salad

#endif  // SALAD_POSITIVE_GEN_H_
