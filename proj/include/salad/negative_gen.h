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

#ifndef SALAD_NEGATIVE_GEN_H_
#define SALAD_NEGATIVE_GEN_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "salad/completion_client.h"
#include "salad/corpus.h"
#include "salad/postag.h"
#include "salad/tagset_discovery.h"

namespace salad {

class GenerationError : public Error {
 public:
  using Error::Error;
};

// Target label for a counterfactual of `source_label`; nullopt when the
// label is not flipped (NLI neutral).
std::optional<int> FlipLabel(const Task& task, int source_label);

// Prompt variants, from a bare label request (I1) to a minimal edit
// restricted to listed causal words (I4).
enum class InstructionId { kI1 = 1, kI2 = 2, kI3 = 3, kI4 = 4 };

std::string InstructionName(InstructionId id);  // "I1".."I4"
InstructionId InstructionFromName(std::string_view name);  // "I4" or "4"

struct PromptTemplate {
  InstructionId instruction = InstructionId::kI4;
  Task task = Task::Sentiment();
  int source_label = 0;
  int target_label = 0;

  bool causal_words_slot() const { return instruction == InstructionId::kI4; }

  // Throws ContractViolation when `source_label` has no flip.
  static PromptTemplate For(InstructionId instruction, const Task& task,
                            int source_label);
};

// Line prefixes of the rendered prompt.
inline constexpr std::string_view kSentencePrefix = "Sentence: ";
inline constexpr std::string_view kPremisePrefix = "Premise: ";
inline constexpr std::string_view kHypothesisPrefix = "Hypothesis: ";
inline constexpr std::string_view kCausalWordsPrefix = "Causal Words: ";

// Instruction text followed by the sentence (or premise and hypothesis).
// Throws ConfigError when an I4 template gets no causal words.
std::string RenderPrompt(const PromptTemplate& tpl,
                         const LabeledExample& example,
                         const std::vector<std::string>& causal_words);

struct PromptParts {
  std::optional<std::string> target;  // sentence, or hypothesis for pairs
  std::vector<std::string> causal_words;
};

// Inverse of RenderPrompt's layout; used by the stub client.
PromptParts ParsePrompt(std::string_view prompt);

// Surface tokens carrying a causal tag, first occurrence order, no repeats.
std::vector<std::string> ExtractCausalWords(const TaggedExample& tagged,
                                            const TagSetPartition& partition);

// Strips whitespace, code fences, a leading "Sentence:"-style label and
// enclosing quotes from a model reply.
std::string CleanResponse(std::string_view raw);

struct GenerationConfig {
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.1;
  double top_p = 1.0;
  int max_retries = 3;
  std::filesystem::path cache_dir;  // empty disables caching
  std::size_t concurrency_limit = 4;
  int initial_backoff_ms = 500;
  // generate_negatives fails when failures / eligible exceeds this.
  double max_failure_rate = 0.0;

  void Validate() const;
};

struct CounterfactualExample {
  std::string source_id;
  std::string text;
  std::optional<std::string> text_b;
  int label = 0;
  InstructionId instruction = InstructionId::kI4;
  std::string raw_response_hash;
  Provenance provenance = Provenance::kLlm;

  std::string FullText() const { return text_b ? text + " " + *text_b : text; }
};

// File-per-key response cache. Writes are atomic; safe across threads.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static nlohmann::json Key(std::string_view example_id,
                            InstructionId instruction,
                            const GenerationConfig& cfg);

  std::optional<std::string> Lookup(const nlohmann::json& key) const;
  void Store(const nlohmann::json& key, std::string_view prompt,
             std::string_view response) const;
  std::filesystem::path PathFor(const nlohmann::json& key) const;

 private:
  std::filesystem::path dir_;
};

struct NegativeRequestStats {
  std::size_t client_calls = 0;
  std::size_t cache_hits = 0;
};

// One counterfactual for `example`. Consults `cache` first (may be null);
// retries TransientError with exponential backoff up to cfg.max_retries.
CounterfactualExample GenerateNegative(
    const LabeledExample& example, const PromptTemplate& tpl,
    const std::vector<std::string>& causal_words, const GenerationConfig& cfg,
    CompletionClient& client, const ResponseCache* cache,
    NegativeRequestStats* stats = nullptr);

struct SkipRecord {
  std::string source_id;
  std::string reason;
};

struct NegativeGenResult {
  std::vector<CounterfactualExample> negatives;  // input order
  std::vector<SkipRecord> skipped;
  std::vector<SkipRecord> failed;
  NegativeRequestStats stats;

  nlohmann::json ManifestJson() const;
};

// Runs GenerateNegative over every flippable example with at most
// cfg.concurrency_limit calls in flight. `tagged` must align with
// `train.examples`.
NegativeGenResult GenerateNegatives(const Dataset& train,
                                    std::span<const TaggedExample> tagged,
                                    const TagSetPartition& partition,
                                    InstructionId instruction,
                                    const GenerationConfig& cfg,
                                    CompletionClient& client);

std::string SerializeNegatives(std::span<const CounterfactualExample> negatives,
                               const Task& task);
std::vector<CounterfactualExample> ParseNegatives(std::string_view contents,
                                                  const Task& task);

}  // namespace salad

#endif  // SALAD_NEGATIVE_GEN_H_
