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

#include "salad/negative_gen.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "salad/common.h"

namespace salad {

using json = nlohmann::json;

std::optional<int> FlipLabel(const Task& task, int source_label) {
  task.LabelName(source_label);  // range check
  switch (task.kind()) {
    case TaskKind::kSentiment:
    case TaskKind::kSexism:
      return 1 - source_label;
    case TaskKind::kNli: {
      const int entailment = *task.LabelIndex("entailment");
      const int contradiction = *task.LabelIndex("contradiction");
      if (source_label == entailment) return contradiction;
      if (source_label == contradiction) return entailment;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string InstructionName(InstructionId id) {
  return "I" + std::to_string(static_cast<int>(id));
}

InstructionId InstructionFromName(std::string_view name) {
  std::string_view s = Trim(name);
  if (!s.empty() && (s.front() == 'I' || s.front() == 'i')) s.remove_prefix(1);
  if (s.size() == 1 && s[0] >= '1' && s[0] <= '4') {
    return static_cast<InstructionId>(s[0] - '0');
  }
  throw ConfigError("unknown instruction '" + std::string(name) +
                    "' (expected I1..I4)");
}

PromptTemplate PromptTemplate::For(InstructionId instruction, const Task& task,
                                   int source_label) {
  auto target = FlipLabel(task, source_label);
  if (!target) {
    throw ContractViolation("label '" + task.LabelName(source_label) +
                            "' has no counterfactual flip");
  }
  return PromptTemplate{instruction, task, source_label, *target};
}

namespace {

std::string WithArticle(const std::string& word) {
  const bool vowel =
      !word.empty() &&
      std::string_view("aeiou").find(static_cast<char>(std::tolower(
          static_cast<unsigned char>(word[0])))) != std::string_view::npos;
  return (vowel ? "an " : "a ") + word;
}

std::string OneLine(std::string_view text) {
  std::string out(Trim(text));
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ", ";
    out += words[i];
  }
  return out;
}

}  // namespace

std::string RenderPrompt(const PromptTemplate& tpl,
                         const LabeledExample& example,
                         const std::vector<std::string>& causal_words) {
  if (tpl.causal_words_slot() && causal_words.empty()) {
    throw ConfigError("instruction I4 needs at least one causal word (example " +
                      example.id + ")");
  }
  const std::string source = tpl.task.LabelName(tpl.source_label);
  const std::string target = tpl.task.LabelName(tpl.target_label);
  const std::string desc(tpl.task.description());
  const bool pair = tpl.task.is_pair_task();
  const std::string unit = pair ? "pair" : "sentence";
  const std::string edit_scope = pair ? " in the hypothesis" : "";

  std::string prompt;
  const std::string preamble = std::string("The following ") +
                               (pair ? "sentence pair" : "sentence") + " is " +
                               WithArticle(source) + " " + unit + " in " +
                               desc + ". ";
  switch (tpl.instruction) {
    case InstructionId::kI1:
      prompt = "Please make it " + WithArticle(target) + " " + unit +
               (pair ? " by editing only the hypothesis." : ".");
      break;
    case InstructionId::kI2:
      prompt = preamble + "Please make it " + WithArticle(target) + " " + unit +
               (pair ? " by editing only the hypothesis." : ".");
      break;
    case InstructionId::kI3:
      prompt = preamble + "Just change a few words" + edit_scope +
               " to make it " + WithArticle(target) + " " + unit +
               " while preserving the original text as much as possible.";
      break;
    case InstructionId::kI4:
      prompt = preamble + "Just change a few words among causal words in the " +
               (pair ? "hypothesis" : "sentence") + " to make it " +
               WithArticle(target) + " " + unit +
               " while preserving the original text as much as possible. " +
               std::string(kCausalWordsPrefix) + JoinWords(causal_words);
      break;
  }
  if (pair) {
    prompt += " Reply with the revised hypothesis only.\n";
    prompt += std::string(kPremisePrefix) + OneLine(example.text_a) + "\n";
    prompt += std::string(kHypothesisPrefix) +
              OneLine(example.text_b.value_or("")) + "\n";
  } else {
    prompt += "\n" + std::string(kSentencePrefix) + OneLine(example.text_a) +
              "\n";
  }
  return prompt;
}

PromptParts ParsePrompt(std::string_view prompt) {
  PromptParts parts;
  std::optional<std::string> sentence;
  std::optional<std::string> hypothesis;
  std::size_t start = 0;
  while (start < prompt.size()) {
    std::size_t end = prompt.find('\n', start);
    if (end == std::string_view::npos) end = prompt.size();
    const std::string_view line = prompt.substr(start, end - start);
    start = end + 1;
    if (line.starts_with(kSentencePrefix)) {
      sentence = std::string(line.substr(kSentencePrefix.size()));
    } else if (line.starts_with(kHypothesisPrefix)) {
      hypothesis = std::string(line.substr(kHypothesisPrefix.size()));
    } else if (auto pos = line.find(kCausalWordsPrefix);
               pos != std::string_view::npos) {
      std::string_view rest = line.substr(pos + kCausalWordsPrefix.size());
      const std::size_t reply = rest.find(" Reply with");
      if (reply != std::string_view::npos) rest = rest.substr(0, reply);
      std::size_t p = 0;
      while (p <= rest.size()) {
        std::size_t comma = rest.find(',', p);
        if (comma == std::string_view::npos) comma = rest.size();
        const std::string_view word = Trim(rest.substr(p, comma - p));
        if (!word.empty()) parts.causal_words.emplace_back(word);
        p = comma + 1;
      }
    }
  }
  parts.target = hypothesis ? hypothesis : sentence;
  return parts;
}

std::vector<std::string> ExtractCausalWords(const TaggedExample& tagged,
                                            const TagSetPartition& partition) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < tagged.tokens.size(); ++i) {
    if (partition.IsCausal(tagged.tags[i]) && seen.insert(tagged.tokens[i]).second) {
      words.push_back(tagged.tokens[i]);
    }
  }
  return words;
}

std::string CleanResponse(std::string_view raw) {
  std::string_view s = Trim(raw);
  if (s.starts_with("```")) {
    const std::size_t nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view() : s.substr(nl + 1);
    if (const std::size_t fence = s.rfind("```"); fence != std::string_view::npos) {
      s = s.substr(0, fence);
    }
    s = Trim(s);
  }
  // Drop an introductory line such as "Here is the revised sentence:".
  if (const std::size_t nl = s.find('\n');
      nl != std::string_view::npos && Trim(s.substr(0, nl)).ends_with(":")) {
    s = Trim(s.substr(nl + 1));
  }
  for (std::string_view prefix :
       {kSentencePrefix, kHypothesisPrefix, std::string_view("Revised: "),
        std::string_view("Counterfactual: ")}) {
    if (s.starts_with(prefix)) {
      s = Trim(s.substr(prefix.size()));
      break;
    }
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = Trim(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

void GenerationConfig::Validate() const {
  if (model_name.empty()) throw ConfigError("model_name must not be empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("temperature must lie in [0, 2]");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw ConfigError("top_p must lie in (0, 1]");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (concurrency_limit == 0) {
    throw ConfigError("concurrency_limit must be positive");
  }
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
    throw ConfigError("max_failure_rate must lie in [0, 1]");
  }
}

json ResponseCache::Key(std::string_view example_id, InstructionId instruction,
                        const GenerationConfig& cfg) {
  return json{
      {"example_id", example_id},
      {"instruction_id", InstructionName(instruction)},
      {"model", cfg.model_name},
      {"temperature", cfg.temperature},
      {"top_p", cfg.top_p},
  };
}

std::filesystem::path ResponseCache::PathFor(const json& key) const {
  return dir_ / (Sha256Hex(key.dump()) + ".json");
}

std::optional<std::string> ResponseCache::Lookup(const json& key) const {
  const std::filesystem::path path = PathFor(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const json entry = json::parse(ReadFile(path));
    if (entry.at("key") != key) return std::nullopt;
    return entry.at("response").get<std::string>();
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are regenerated
  }
}

void ResponseCache::Store(const json& key, std::string_view prompt,
                          std::string_view response) const {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
  const json entry{{"key", key},
                   {"prompt", prompt},
                   {"response", response},
                   {"created_at", stamp}};
  WriteFileAtomic(PathFor(key), entry.dump(2) + "\n");
}

CounterfactualExample GenerateNegative(
    const LabeledExample& example, const PromptTemplate& tpl,
    const std::vector<std::string>& causal_words, const GenerationConfig& cfg,
    CompletionClient& client, const ResponseCache* cache,
    NegativeRequestStats* stats) {
  cfg.Validate();
  if (tpl.source_label != example.label) {
    throw ContractViolation("template source label does not match example " +
                            example.id);
  }
  const json key = ResponseCache::Key(example.id, tpl.instruction, cfg);
  std::optional<std::string> raw;
  if (cache != nullptr) raw = cache->Lookup(key);
  if (raw) {
    if (stats != nullptr) ++stats->cache_hits;
  } else {
    const std::string prompt = RenderPrompt(tpl, example, causal_words);
    const CompletionRequest request{cfg.model_name, prompt, cfg.temperature,
                                    cfg.top_p};
    for (int attempt = 0;; ++attempt) {
      try {
        if (stats != nullptr) ++stats->client_calls;
        raw = client.Complete(request);
        break;
      } catch (const TransientError& e) {
        if (attempt >= cfg.max_retries) {
          throw GenerationError("example " + example.id + ": retries exhausted (" +
                                std::to_string(attempt + 1) +
                                " attempts): " + e.what());
        }
        std::this_thread::sleep_for(
            std::chrono::milliseconds(cfg.initial_backoff_ms) * (1 << attempt));
      }
    }
    if (Trim(*raw).empty()) {
      throw GenerationError("example " + example.id + ": empty response");
    }
    if (cache != nullptr) cache->Store(key, prompt, *raw);
  }
  const std::string cleaned = CleanResponse(*raw);
  if (cleaned.empty()) {
    throw GenerationError("example " + example.id + ": empty response");
  }
  CounterfactualExample cf;
  cf.source_id = example.id;
  if (tpl.task.is_pair_task()) {
    cf.text = example.text_a;
    cf.text_b = cleaned;
  } else {
    cf.text = cleaned;
  }
  cf.label = tpl.target_label;
  cf.instruction = tpl.instruction;
  cf.raw_response_hash = Sha256Hex(*raw);
  cf.provenance = client.provenance();
  return cf;
}

json NegativeGenResult::ManifestJson() const {
  auto records = [](const std::vector<SkipRecord>& rs) {
    json arr = json::array();
    for (const SkipRecord& r : rs) {
      arr.push_back(json{{"source_id", r.source_id}, {"reason", r.reason}});
    }
    return arr;
  };
  return json{{"generated", negatives.size()},
              {"skipped", records(skipped)},
              {"failed", records(failed)}};
}

NegativeGenResult GenerateNegatives(const Dataset& train,
                                    std::span<const TaggedExample> tagged,
                                    const TagSetPartition& partition,
                                    InstructionId instruction,
                                    const GenerationConfig& cfg,
                                    CompletionClient& client) {
  cfg.Validate();
  if (tagged.size() != train.size()) {
    throw ContractViolation("tagged examples must align with the dataset");
  }
  NegativeGenResult result;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const LabeledExample& ex = train.examples[i];
    if (!FlipLabel(train.task, ex.label)) {
      result.skipped.push_back(
          {ex.id, "label '" + train.task.LabelName(ex.label) + "' is not flipped"});
    } else {
      eligible.push_back(i);
    }
  }

  std::optional<ResponseCache> cache;
  if (!cfg.cache_dir.empty()) cache.emplace(cfg.cache_dir);

  std::vector<std::optional<CounterfactualExample>> slots(eligible.size());
  std::vector<std::string> errors(eligible.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> hits{0};
  auto work = [&] {
    for (std::size_t j = next++; j < eligible.size(); j = next++) {
      const LabeledExample& ex = train.examples[eligible[j]];
      NegativeRequestStats local;
      try {
        const PromptTemplate tpl =
            PromptTemplate::For(instruction, train.task, ex.label);
        std::vector<std::string> words;
        if (tpl.causal_words_slot()) {
          words = ExtractCausalWords(tagged[eligible[j]], partition);
        }
        slots[j] = GenerateNegative(ex, tpl, words, cfg, client,
                                    cache ? &*cache : nullptr, &local);
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
      calls += local.client_calls;
      hits += local.cache_hits;
    }
  };
  {
    const std::size_t workers =
        std::min(cfg.concurrency_limit, std::max<std::size_t>(eligible.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  result.stats.client_calls = calls;
  result.stats.cache_hits = hits;

  for (std::size_t j = 0; j < eligible.size(); ++j) {
    if (slots[j]) {
      result.negatives.push_back(std::move(*slots[j]));
    } else {
      result.failed.push_back({train.examples[eligible[j]].id, errors[j]});
    }
  }
  if (!eligible.empty()) {
    const double rate = static_cast<double>(result.failed.size()) /
                        static_cast<double>(eligible.size());
    if (rate > cfg.max_failure_rate) {
      throw GenerationError(
          std::to_string(result.failed.size()) + " of " +
          std::to_string(eligible.size()) +
          " generations failed (ceiling " + std::to_string(cfg.max_failure_rate) +
          "); first error: " + result.failed.front().reason +
          ". Completed responses are cached; rerun to resume.");
    }
  }
  return result;
}

std::string SerializeNegatives(std::span<const CounterfactualExample> negatives,
                               const Task& task) {
  std::string out;
  for (const CounterfactualExample& cf : negatives) {
    json j;
    j["source_id"] = cf.source_id;
    j["text"] = cf.text;
    if (cf.text_b) j["text_b"] = *cf.text_b;
    j["label"] = task.LabelName(cf.label);
    j["instruction_id"] = InstructionName(cf.instruction);
    j["provenance"] = ProvenanceName(cf.provenance);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<CounterfactualExample> ParseNegatives(std::string_view contents,
                                                  const Task& task) {
  std::vector<CounterfactualExample> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = Trim(contents.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      CounterfactualExample cf;
      cf.source_id = j.at("source_id").get<std::string>();
      cf.text = j.at("text").get<std::string>();
      if (j.contains("text_b")) cf.text_b = j.at("text_b").get<std::string>();
      const std::string label = j.at("label").get<std::string>();
      auto idx = task.LabelIndex(label);
      if (!idx) throw DataError("unknown label \"" + label + "\"");
      cf.label = *idx;
      cf.instruction = InstructionFromName(
          j.value("instruction_id", std::string("I4")));
      cf.provenance = ProvenanceFromName(
          j.value("provenance", std::string("HUMAN_IMPORT")));
      out.push_back(std::move(cf));
    } catch (const std::exception& e) {
      throw DataError("negatives line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

}  // namespace salad
