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

#include "salad/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "salad/common.h"
#include "salad/rng.h"

namespace salad {

using json = nlohmann::json;

Task Task::Sentiment() {
  return Task(TaskKind::kSentiment, {"negative", "positive"});
}

Task Task::Sexism() { return Task(TaskKind::kSexism, {"non-sexist", "sexist"}); }

Task Task::Nli() {
  return Task(TaskKind::kNli, {"entailment", "neutral", "contradiction"});
}

Task Task::FromName(std::string_view name) {
  const std::string lower = ToLowerAscii(name);
  if (lower == "sentiment") return Sentiment();
  if (lower == "sexism") return Sexism();
  if (lower == "nli") return Nli();
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected sentiment, sexism or nli)");
}

std::string_view Task::name() const {
  switch (kind_) {
    case TaskKind::kSentiment:
      return "sentiment";
    case TaskKind::kSexism:
      return "sexism";
    case TaskKind::kNli:
      return "nli";
  }
  return "";
}

std::string_view Task::description() const {
  switch (kind_) {
    case TaskKind::kSentiment:
      return "sentiment analysis";
    case TaskKind::kSexism:
      return "sexism classification";
    case TaskKind::kNli:
      return "natural language inference";
  }
  return "";
}

std::optional<int> Task::LabelIndex(std::string_view label) const {
  const std::string lower = ToLowerAscii(Trim(label));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == lower) return static_cast<int>(i);
  }
  return std::nullopt;
}

const std::string& Task::LabelName(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= labels_.size()) {
    throw ContractViolation("label index " + std::to_string(index) +
                            " out of range for task " + std::string(name()));
  }
  return labels_[static_cast<std::size_t>(index)];
}

namespace {

constexpr std::pair<Split, std::string_view> kSplitNames[] = {
    {Split::kTrain, "train"},   {Split::kValidation, "validation"},
    {Split::kOTest, "o_test"},  {Split::kCfTest, "cf_test"},
    {Split::kOdd, "odd"},       {Split::kCrossDomain, "cross_domain"},
};

bool IsWordByte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

// Length of a "[UPPER]" marker starting at text[pos], or 0.
std::size_t SpecialTokenLength(std::string_view text, std::size_t pos) {
  if (text[pos] != '[') return 0;
  std::size_t i = pos + 1;
  while (i < text.size() &&
         std::isupper(static_cast<unsigned char>(text[i]))) {
    ++i;
  }
  if (i == pos + 1 || i >= text.size() || text[i] != ']') return 0;
  return i - pos + 1;
}

}  // namespace

std::string_view SplitName(Split split) {
  for (const auto& [s, n] : kSplitNames) {
    if (s == split) return n;
  }
  return "";
}

Split SplitFromName(std::string_view name) {
  const std::string lower = ToLowerAscii(name);
  for (const auto& [s, n] : kSplitNames) {
    if (n == lower) return s;
  }
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::string LabeledExample::FullText() const {
  if (!text_b) return text_a;
  return text_a + " " + *text_b;
}

namespace {

// Length of an English clitic ('s, 't, 're, 've, 'll, 'd, 'm) starting
// at text[i], or 0. The suffix must end at a word boundary, so the rule gives
// the same answer whether or not a space precedes the apostrophe.
std::size_t CliticLength(std::string_view text, std::size_t i) {
  if (text[i] != '\'') return 0;
  static constexpr std::string_view kSuffixes[] = {"re", "ve", "ll", "s",
                                                   "t",  "d",  "m"};
  for (std::string_view suffix : kSuffixes) {
    const std::size_t end = i + 1 + suffix.size();
    if (end > text.size()) continue;
    if (ToLowerAscii(text.substr(i + 1, suffix.size())) != suffix) continue;
    if (end < text.size() &&
        IsWordByte(static_cast<unsigned char>(text[end]))) {
      continue;
    }
    return 1 + suffix.size();
  }
  return 0;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
      ++i;
    } else if (IsWordByte(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
      ++i;
    } else if (std::size_t n = SpecialTokenLength(text, i); n > 0) {
      flush();
      tokens.emplace_back(text.substr(i, n));
      i += n;
    } else if (std::size_t n = CliticLength(text, i); n > 0) {
      flush();
      tokens.push_back(ToLowerAscii(text.substr(i, n)));
      i += n;
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  flush();
  return tokens;
}

std::string Detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> ExampleTokens(const LabeledExample& example) {
  if (example.tokens) return *example.tokens;
  return Tokenize(example.FullText());
}

void ValidateExample(const LabeledExample& example, const Task& task) {
  if (Trim(example.text_a).empty()) {
    throw DataError("example " + example.id + ": empty text");
  }
  if (task.is_pair_task() != example.text_b.has_value()) {
    throw DataError("example " + example.id +
                    (task.is_pair_task() ? ": missing text_b"
                                         : ": text_b only allowed for nli"));
  }
  if (example.label < 0 ||
      static_cast<std::size_t>(example.label) >= task.num_labels()) {
    throw DataError("example " + example.id + ": label index out of range");
  }
}

std::string ContentId(std::string_view text_a,
                      const std::optional<std::string>& text_b) {
  std::string payload(text_a);
  if (text_b) {
    payload.push_back('\x1f');
    payload += *text_b;
  }
  return "x" + Sha256Hex(payload).substr(0, 16);
}

Dataset ParseDataset(std::string_view contents, const Task& task, Split split,
                     std::string name) {
  Dataset ds{task, split, {}, std::move(name)};
  std::unordered_set<std::string> seen;
  std::unordered_map<std::string, int> generated;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = Trim(contents.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == contents.size()) break;
      continue;
    }
    const std::string where = " at line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("malformed JSON" + where + ": " + e.what());
    }
    if (!obj.is_object()) throw DataError("expected JSON object" + where);
    auto string_field = [&](const char* key) -> std::optional<std::string> {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) return std::nullopt;
      if (!it->is_string()) {
        throw DataError(std::string("field '") + key + "' must be a string" +
                        where);
      }
      return it->get<std::string>();
    };
    LabeledExample ex;
    auto text = string_field("text");
    if (!text || Trim(*text).empty()) {
      throw DataError("missing or empty text" + where);
    }
    ex.text_a = *text;
    ex.text_b = string_field("text_b");
    if (task.is_pair_task() && !ex.text_b) {
      throw DataError("missing text_b" + where);
    }
    if (!task.is_pair_task() && ex.text_b) {
      throw DataError("text_b only allowed for nli" + where);
    }
    auto label = string_field("label");
    if (!label) throw DataError("missing label" + where);
    auto index = task.LabelIndex(*label);
    if (!index) {
      throw DataError("unknown label" + where + ": \"" + *label + "\"");
    }
    ex.label = *index;
    if (auto id = string_field("id")) {
      ex.id = *id;
    } else {
      ex.id = ContentId(ex.text_a, ex.text_b);
      // Duplicate texts get an occurrence suffix.
      if (int n = generated[ex.id]++; n > 0) {
        ex.id += "-" + std::to_string(n + 1);
      }
    }
    if (!seen.insert(ex.id).second) {
      throw DataError("duplicate id '" + ex.id + "'" + where);
    }
    ds.examples.push_back(std::move(ex));
    if (end == contents.size()) break;
  }
  return ds;
}

Dataset LoadDataset(const std::filesystem::path& path, const Task& task,
                    Split split) {
  try {
    return ParseDataset(ReadFile(path), task, split, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string SerializeDataset(const Dataset& dataset) {
  std::string out;
  for (const LabeledExample& ex : dataset.examples) {
    json obj = json::object();
    obj["id"] = ex.id;
    obj["text"] = ex.text_a;
    if (ex.text_b) obj["text_b"] = *ex.text_b;
    obj["label"] = dataset.task.LabelName(ex.label);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeDataset(dataset));
}

std::pair<Dataset, Dataset> SplitTrainVal(const Dataset& dataset,
                                          double val_fraction,
                                          std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("val_fraction must lie in (0, 1)");
  }
  if (dataset.split != Split::kTrain) {
    throw ContractViolation("SplitTrainVal expects a TRAIN dataset");
  }
  const std::size_t n = dataset.size();
  if (n < 2) throw ContractViolation("SplitTrainVal needs at least 2 examples");
  auto val_n = static_cast<std::size_t>(
      std::lround(static_cast<double>(n) * val_fraction));
  val_n = std::clamp<std::size_t>(val_n, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, {"split_train_val", dataset.name}));
  rng.Shuffle(std::span<std::size_t>(order));
  std::vector<bool> in_val(n, false);
  for (std::size_t i = 0; i < val_n; ++i) in_val[order[i]] = true;

  Dataset train{dataset.task, Split::kTrain, {}, dataset.name + "-train"};
  Dataset val{dataset.task, Split::kValidation, {}, dataset.name + "-val"};
  for (std::size_t i = 0; i < n; ++i) {
    (in_val[i] ? val : train).examples.push_back(dataset.examples[i]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace salad
