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

#include "salad/positive_gen.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "salad/common.h"

namespace salad {

void PositiveGenConfig::Validate() const {
  if (!(scaling_factor >= 0.0)) {
    throw ConfigError("scaling_factor must be non-negative");
  }
  if (k_override && *k_override < 1) {
    throw ConfigError("k_override must be at least 1");
  }
  if (unk_token.empty()) throw ConfigError("unk_token must not be empty");
}

double MeanNonCausalCount(std::span<const TaggedExample> tagged,
                          const TagSetPartition& partition) {
  if (tagged.empty()) {
    throw ContractViolation("MeanNonCausalCount needs at least one example");
  }
  std::size_t total = 0;
  for (const TaggedExample& t : tagged) {
    total += static_cast<std::size_t>(
        std::count_if(t.tags.begin(), t.tags.end(), [&](UniversalTag tag) {
          return !partition.IsCausal(tag);
        }));
  }
  return static_cast<double>(total) / static_cast<double>(tagged.size());
}

int KFromMean(double mean_noncausal, const PositiveGenConfig& cfg) {
  cfg.Validate();
  if (cfg.k_override) return *cfg.k_override;
  // std::round rounds halves away from zero.
  const double k = std::round(mean_noncausal * cfg.scaling_factor);
  return std::max(1, static_cast<int>(k));
}

int ComputeK(std::span<const TaggedExample> tagged,
             const TagSetPartition& partition, const PositiveGenConfig& cfg) {
  return KFromMean(MeanNonCausalCount(tagged, partition), cfg);
}

int ComputeK(const Dataset& train, const TagSetPartition& partition,
             const PositiveGenConfig& cfg, const Tagger& tagger) {
  std::vector<TaggedExample> tagged;
  tagged.reserve(train.size());
  for (const LabeledExample& ex : train.examples) {
    tagged.push_back(Tag(ex, tagger));
  }
  return ComputeK(tagged, partition, cfg);
}

PositiveExample GeneratePositive(const TaggedExample& tagged,
                                 const TagSetPartition& partition, int k,
                                 const std::string& unk_token, Rng& rng) {
  if (k < 1) throw ContractViolation("k must be at least 1");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tagged.tags.size(); ++i) {
    if (!partition.IsCausal(tagged.tags[i])) eligible.push_back(i);
  }
  const std::size_t take =
      std::min(eligible.size(), static_cast<std::size_t>(k));
  // Partial Fisher-Yates: the first `take` slots form a uniform subset.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.Uniform(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  PositiveExample out;
  out.source_id = tagged.example.id;
  out.replaced_positions.assign(eligible.begin(), eligible.begin() + take);
  std::sort(out.replaced_positions.begin(), out.replaced_positions.end());
  out.unmodified = take == 0;

  std::vector<std::string> tokens = tagged.tokens;
  for (std::size_t pos : out.replaced_positions) tokens[pos] = unk_token;
  const auto split = tokens.begin() +
                     static_cast<std::ptrdiff_t>(tagged.text_b_offset);
  out.text = Detokenize({tokens.begin(), split});
  if (tagged.example.text_b) out.text_b = Detokenize({split, tokens.end()});
  return out;
}

std::vector<PositiveExample> GenerateEpochPositives(
    std::span<const TaggedExample> tagged, const TagSetPartition& partition,
    int k, int epoch, std::uint64_t seed, const std::string& unk_token) {
  std::vector<PositiveExample> out;
  out.reserve(tagged.size());
  for (const TaggedExample& t : tagged) {
    Rng rng(DeriveSeed(seed, {"positive", t.example.id},
                       {static_cast<std::uint64_t>(epoch)}));
    PositiveExample p = GeneratePositive(t, partition, k, unk_token, rng);
    p.epoch = epoch;
    out.push_back(std::move(p));
  }
  return out;
}

std::string SerializePositives(std::span<const PositiveExample> positives) {
  std::string out;
  for (const PositiveExample& p : positives) {
    nlohmann::json j;
    j["source_id"] = p.source_id;
    j["epoch"] = p.epoch;
    j["text"] = p.text;
    if (p.text_b) j["text_b"] = *p.text_b;
    j["replaced_positions"] = p.replaced_positions;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace salad
