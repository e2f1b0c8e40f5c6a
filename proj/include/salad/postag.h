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

#ifndef SALAD_POSTAG_H_
#define SALAD_POSTAG_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "salad/corpus.h"

namespace salad {

// The 12-tag universal POS set. kPunct is the universal "." tag.
enum class UniversalTag {
  kVerb,
  kNoun,
  kPron,
  kAdj,
  kAdv,
  kAdp,
  kConj,
  kDet,
  kNum,
  kPrt,
  kX,
  kPunct,
};

inline constexpr std::size_t kNumUniversalTags = 12;
inline constexpr std::array<UniversalTag, kNumUniversalTags> kAllUniversalTags = {
    UniversalTag::kVerb, UniversalTag::kNoun, UniversalTag::kPron,
    UniversalTag::kAdj,  UniversalTag::kAdv,  UniversalTag::kAdp,
    UniversalTag::kConj, UniversalTag::kDet,  UniversalTag::kNum,
    UniversalTag::kPrt,  UniversalTag::kX,    UniversalTag::kPunct,
};

std::string_view TagName(UniversalTag tag);
// Strict: accepts only the 12 universal names ("." is accepted for PUNCT).
std::optional<UniversalTag> ParseUniversalTag(std::string_view name);
// Maps Penn Treebank or UD tag strings onto the universal set. Universal
// names map to themselves and anything unrecognised maps to X.
UniversalTag MapToUniversal(std::string_view backend_tag);

// Marker substituted for a sentence whose tokens were all removed.
inline constexpr std::string_view kEmptySentinel = "[EMPTY]";

// Assigns one universal tag per token. Implementations are safe for
// concurrent use through a const reference.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<UniversalTag> TagTokens(
      const std::vector<std::string>& tokens) const = 0;
};

// A tagger emitting a richer tagset (Penn Treebank, UD, ...).
class FineGrainedTagger {
 public:
  virtual ~FineGrainedTagger() = default;
  virtual std::vector<std::string> TagTokens(
      const std::vector<std::string>& tokens) const = 0;
};

// Adapts a fine-grained backend onto the universal set via MapToUniversal.
class MappedTagger : public Tagger {
 public:
  explicit MappedTagger(std::unique_ptr<FineGrainedTagger> backend)
      : backend_(std::move(backend)) {}
  std::vector<UniversalTag> TagTokens(
      const std::vector<std::string>& tokens) const override;

 private:
  std::unique_ptr<FineGrainedTagger> backend_;
};

// Penn Treebank tagger driven by a closed-class lexicon, an open-class
// lexicon and suffix heuristics. Needs no model files.
class LexiconPennTagger : public FineGrainedTagger {
 public:
  LexiconPennTagger();
  std::vector<std::string> TagTokens(
      const std::vector<std::string>& tokens) const override;

 private:
  std::string TagWord(std::string_view word) const;
  std::unordered_map<std::string, std::string> lexicon_;
};

// Deterministic lookup tagger for fixtures. Punctuation-only tokens are
// PUNCT and bracketed markers are X; other unknown words get `fallback`, or
// raise DataError when no fallback is configured.
class DictionaryTagger : public Tagger {
 public:
  explicit DictionaryTagger(
      std::unordered_map<std::string, UniversalTag> entries,
      std::optional<UniversalTag> fallback = UniversalTag::kX);

  // TSV: token<TAB>universal-tag, one per line. '#' starts a comment line.
  static DictionaryTagger FromTsv(std::string_view contents,
                                  std::optional<UniversalTag> fallback =
                                      UniversalTag::kX);
  static DictionaryTagger Load(const std::filesystem::path& path,
                               std::optional<UniversalTag> fallback =
                                   UniversalTag::kX);

  std::vector<UniversalTag> TagTokens(
      const std::vector<std::string>& tokens) const override;

 private:
  std::unordered_map<std::string, UniversalTag> entries_;
  std::optional<UniversalTag> fallback_;
};

// "dictionary" (needs `dictionary_path`) or "lexicon".
std::unique_ptr<Tagger> MakeTagger(std::string_view kind,
                                   const std::filesystem::path& dictionary_path);

struct TaggedExample {
  LabeledExample example;
  std::vector<std::string> tokens;
  std::vector<UniversalTag> tags;
  // Index of the first hypothesis token; tokens.size() for single texts.
  std::size_t text_b_offset = 0;
};

// Tags premise and hypothesis separately and concatenates them.
TaggedExample Tag(const LabeledExample& example, const Tagger& tagger);

struct Ablation {
  LabeledExample example;
  // Source indices of the surviving tokens, in order.
  std::vector<std::size_t> kept_positions;
  // True when every token of some segment was removed; that segment then
  // holds kEmptySentinel.
  bool degenerate = false;
};

// Removes every token tagged `tag`; the survivors are joined with single
// spaces. The label is unchanged.
Ablation AblateTag(const TaggedExample& tagged, UniversalTag tag);

}  // namespace salad

#endif  // SALAD_POSTAG_H_
