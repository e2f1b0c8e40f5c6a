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

#ifndef SALAD_CORPUS_H_
#define SALAD_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace salad {

enum class TaskKind { kSentiment, kSexism, kNli };

// A classification task and its ordered label names.
class Task {
 public:
  static Task Sentiment();
  static Task Sexism();
  static Task Nli();
  // Accepts "sentiment", "sexism" or "nli" (any case).
  static Task FromName(std::string_view name);

  TaskKind kind() const { return kind_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  std::string_view name() const;
  // Human-readable task description used in prompts.
  std::string_view description() const;
  bool is_pair_task() const { return kind_ == TaskKind::kNli; }

  // Case-insensitive label lookup.
  std::optional<int> LabelIndex(std::string_view label) const;
  const std::string& LabelName(int index) const;

  friend bool operator==(const Task& a, const Task& b) {
    return a.kind_ == b.kind_;
  }

 private:
  Task(TaskKind kind, std::vector<std::string> labels)
      : kind_(kind), labels_(std::move(labels)) {}

  TaskKind kind_;
  std::vector<std::string> labels_;
};

enum class Split { kTrain, kValidation, kOTest, kCfTest, kOdd, kCrossDomain };

std::string_view SplitName(Split split);
Split SplitFromName(std::string_view name);

struct LabeledExample {
  std::string id;
  std::string text_a;
  std::optional<std::string> text_b;  // NLI hypothesis
  int label = 0;
  std::optional<std::vector<std::string>> tokens;

  // Premise-then-hypothesis concatenation for pair tasks.
  std::string FullText() const;
};

struct Dataset {
  Task task = Task::Sentiment();
  Split split = Split::kTrain;
  std::vector<LabeledExample> examples;
  std::string name;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// Lowercased word tokens with punctuation split off. Bracketed upper-case
// markers such as "[UNK]" survive as single tokens. An apostrophe followed
// by one of re/ve/ll/s/t/d/m and a word boundary starts a clitic token
// ("it's" -> "it", "'s"); any other apostrophe is punctuation.
std::vector<std::string> Tokenize(std::string_view text);

// Single-space join.
std::string Detokenize(const std::vector<std::string>& tokens);

// Tokens of the example, using the cached list when present.
std::vector<std::string> ExampleTokens(const LabeledExample& example);

// Checks the example invariants against `task`; throws DataError.
void ValidateExample(const LabeledExample& example, const Task& task);

// Content-derived id used when the input omits one.
std::string ContentId(std::string_view text_a,
                      const std::optional<std::string>& text_b);

// JSONL: {"id"?, "text", "text_b"?, "label"} per line. Blank lines ignored.
Dataset ParseDataset(std::string_view contents, const Task& task, Split split,
                     std::string name);
Dataset LoadDataset(const std::filesystem::path& path, const Task& task,
                    Split split);
std::string SerializeDataset(const Dataset& dataset);
void SaveDataset(const Dataset& dataset, const std::filesystem::path& path);

// Deterministic disjoint partition into (train, validation).
std::pair<Dataset, Dataset> SplitTrainVal(const Dataset& dataset,
                                          double val_fraction,
                                          std::uint64_t seed);

}  // namespace salad

#endif  // SALAD_CORPUS_H_
