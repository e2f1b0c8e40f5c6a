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

#include "salad/tagset_discovery.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "salad/common.h"

namespace salad {
namespace {

struct ExampleOutcome {
  bool original_correct = false;
  std::array<bool, kNumUniversalTags> ablated_correct{};
};

ExampleOutcome ScoreOne(const LabeledExample& example,
                        const ClassifierOracle& oracle, const Tagger& tagger) {
  ExampleOutcome out;
  const TaggedExample tagged = Tag(example, tagger);
  try {
    out.original_correct = oracle.Predict(example) == example.label;
    for (UniversalTag tag : kAllUniversalTags) {
      const auto idx = static_cast<std::size_t>(tag);
      if (std::find(tagged.tags.begin(), tagged.tags.end(), tag) ==
          tagged.tags.end()) {
        out.ablated_correct[idx] = out.original_correct;
        continue;
      }
      const Ablation ablation = AblateTag(tagged, tag);
      out.ablated_correct[idx] =
          oracle.Predict(ablation.example) == example.label;
    }
  } catch (const std::exception& e) {
    throw Error("oracle failed on example " + example.id + ": " + e.what());
  }
  return out;
}

}  // namespace

TagImportanceReport ScoreTags(const Dataset& dataset,
                              const ClassifierOracle& oracle,
                              const Tagger& tagger,
                              const ScoreOptions& options) {
  if (dataset.empty()) {
    throw ContractViolation("ScoreTags needs a non-empty dataset");
  }
  const std::size_t n = dataset.size();
  std::vector<ExampleOutcome> outcomes(n);

  const std::size_t workers =
      std::clamp<std::size_t>(options.max_parallelism, 1, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      outcomes[i] = ScoreOne(dataset.examples[i], oracle, tagger);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < n; i = next++) {
            try {
              outcomes[i] = ScoreOne(dataset.examples[i], oracle, tagger);
            } catch (...) {
              std::lock_guard lock(failure_mu);
              if (!failure) failure = std::current_exception();
              next = n;
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  TagImportanceReport report;
  report.dataset_name = dataset.name;
  report.m = n;
  for (const ExampleOutcome& o : outcomes) {
    report.correct_original += o.original_correct;
    for (std::size_t t = 0; t < kNumUniversalTags; ++t) {
      report.correct_ablated[t] += o.ablated_correct[t];
    }
  }
  for (std::size_t t = 0; t < kNumUniversalTags; ++t) {
    const auto diff = static_cast<double>(report.correct_original) -
                      static_cast<double>(report.correct_ablated[t]);
    report.reduction[t] = diff / static_cast<double>(n);
  }
  return report;
}

TagSetPartition PartitionTags(const TagImportanceReport& report,
                              double threshold) {
  if (!(threshold >= 0.0)) {
    throw ConfigError("tag threshold must be non-negative");
  }
  TagSetPartition p;
  p.threshold = threshold;
  for (UniversalTag tag : kAllUniversalTags) {
    (report.Score(tag) >= threshold ? p.causal : p.noncausal).insert(tag);
  }
  return p;
}

nlohmann::json TagReportToJson(const TagImportanceReport& report,
                               const TagSetPartition& partition) {
  nlohmann::json j;
  j["dataset"] = report.dataset_name;
  j["m"] = report.m;
  nlohmann::json scores = nlohmann::json::object();
  for (UniversalTag tag : kAllUniversalTags) {
    scores[std::string(TagName(tag))] = report.Score(tag);
  }
  j["scores"] = scores;
  j["threshold"] = partition.threshold;
  auto names = [](const std::set<UniversalTag>& tags) {
    nlohmann::json arr = nlohmann::json::array();
    for (UniversalTag t : kAllUniversalTags) {
      if (tags.contains(t)) arr.push_back(std::string(TagName(t)));
    }
    return arr;
  };
  j["causal"] = names(partition.causal);
  j["noncausal"] = names(partition.noncausal);
  return j;
}

TagSetPartition PartitionFromJson(const nlohmann::json& j) {
  TagSetPartition p;
  try {
    p.threshold = j.at("threshold").get<double>();
    for (const auto& name : j.at("causal")) {
      auto tag = ParseUniversalTag(name.get<std::string>());
      if (!tag) throw DataError("unknown tag " + name.dump());
      p.causal.insert(*tag);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tag report: ") + e.what());
  }
  for (UniversalTag t : kAllUniversalTags) {
    if (!p.causal.contains(t)) p.noncausal.insert(t);
  }
  return p;
}

std::string FormatTagTable(const TagImportanceReport& report,
                           const TagSetPartition& partition) {
  std::ostringstream out;
  out << "dataset: " << report.dataset_name << "  m=" << report.m
      << "  threshold=" << partition.threshold * 100.0 << "%\n";
  out << "tag      reduction(%)  set\n";
  for (UniversalTag tag : kAllUniversalTags) {
    char line[64];
    std::snprintf(line, sizeof(line), "%-8s %12.2f  %s\n",
                  std::string(TagName(tag)).c_str(), report.Score(tag) * 100.0,
                  partition.IsCausal(tag) ? "causal" : "non-causal");
    out << line;
  }
  return out.str();
}

}  // namespace salad
