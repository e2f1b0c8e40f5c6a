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

#include "salad/postag.h"

#include <algorithm>
#include <cctype>
#include <utility>

#include "salad/common.h"

namespace salad {
namespace {

constexpr std::pair<UniversalTag, std::string_view> kTagNames[] = {
    {UniversalTag::kVerb, "VERB"}, {UniversalTag::kNoun, "NOUN"},
    {UniversalTag::kPron, "PRON"}, {UniversalTag::kAdj, "ADJ"},
    {UniversalTag::kAdv, "ADV"},   {UniversalTag::kAdp, "ADP"},
    {UniversalTag::kConj, "CONJ"}, {UniversalTag::kDet, "DET"},
    {UniversalTag::kNum, "NUM"},   {UniversalTag::kPrt, "PRT"},
    {UniversalTag::kX, "X"},       {UniversalTag::kPunct, "PUNCT"},
};

// Penn Treebank (and a few UD) tags onto the universal set.
const std::unordered_map<std::string, UniversalTag>& BackendMap() {
  using enum UniversalTag;
  static const auto* map = new std::unordered_map<std::string, UniversalTag>{
      {"!", kPunct},    {"#", kPunct},     {"$", kPunct},     {"''", kPunct},
      {"(", kPunct},    {")", kPunct},     {",", kPunct},     {"-LRB-", kPunct},
      {"-RRB-", kPunct}, {".", kPunct},    {":", kPunct},     {"?", kPunct},
      {"``", kPunct},   {"HYPH", kPunct},  {"NFP", kPunct},   {"CC", kConj},
      {"CD", kNum},     {"DT", kDet},      {"EX", kDet},      {"FW", kX},
      {"IN", kAdp},     {"JJ", kAdj},      {"JJR", kAdj},     {"JJRJR", kAdj},
      {"JJS", kAdj},    {"LS", kX},        {"MD", kVerb},     {"NN", kNoun},
      {"NNP", kNoun},   {"NNPS", kNoun},   {"NNS", kNoun},    {"NP", kNoun},
      {"PDT", kDet},    {"POS", kPrt},     {"PRP", kPron},    {"PRP$", kPron},
      {"PRP|VBP", kPron}, {"PRT", kPrt},   {"RB", kAdv},      {"RBR", kAdv},
      {"RBS", kAdv},    {"RN", kX},        {"RP", kPrt},      {"SYM", kX},
      {"TO", kPrt},     {"UH", kX},        {"VB", kVerb},     {"VBD", kVerb},
      {"VBD|VBN", kVerb}, {"VBG", kVerb},  {"VBN", kVerb},    {"VBP", kVerb},
      {"VBZ", kVerb},   {"WDT", kDet},     {"WH", kX},        {"WP", kPron},
      {"WP$", kPron},   {"WRB", kAdv},     {"ADD", kX},       {"AFX", kX},
      {"GW", kX},       {"XX", kX},
      // Universal Dependencies v2 names not shared with the universal set.
      {"PROPN", kNoun}, {"AUX", kVerb},    {"CCONJ", kConj},  {"SCONJ", kConj},
      {"INTJ", kX},     {"PART", kPrt},
  };
  return *map;
}

bool IsPunctuationToken(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](char c) {
           return std::ispunct(static_cast<unsigned char>(c));
         });
}

bool IsBracketMarker(std::string_view token) {
  return token.size() >= 3 && token.front() == '[' && token.back() == ']';
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string_view TagName(UniversalTag tag) {
  for (const auto& [t, n] : kTagNames) {
    if (t == tag) return n;
  }
  return "X";
}

std::optional<UniversalTag> ParseUniversalTag(std::string_view name) {
  if (name == ".") return UniversalTag::kPunct;
  for (const auto& [t, n] : kTagNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

UniversalTag MapToUniversal(std::string_view backend_tag) {
  if (auto tag = ParseUniversalTag(backend_tag)) return *tag;
  const auto& map = BackendMap();
  if (auto it = map.find(std::string(backend_tag)); it != map.end()) {
    return it->second;
  }
  return UniversalTag::kX;
}

std::vector<UniversalTag> MappedTagger::TagTokens(
    const std::vector<std::string>& tokens) const {
  std::vector<std::string> fine = backend_->TagTokens(tokens);
  if (fine.size() != tokens.size()) {
    throw DataError("tagger backend returned " + std::to_string(fine.size()) +
                    " tags for " + std::to_string(tokens.size()) + " tokens");
  }
  std::vector<UniversalTag> tags;
  tags.reserve(fine.size());
  for (const std::string& t : fine) tags.push_back(MapToUniversal(t));
  return tags;
}

LexiconPennTagger::LexiconPennTagger() {
  auto add = [this](std::string_view tag, std::initializer_list<const char*> words) {
    for (const char* w : words) lexicon_.emplace(w, std::string(tag));
  };
  add("DT", {"the", "a", "an", "this", "that", "these", "those", "every",
             "each", "some", "any", "no", "all", "both", "another", "either",
             "neither"});
  add("IN", {"for", "of", "in", "on", "at", "by", "with", "from", "about",
             "as", "into", "like", "through", "after", "over", "between",
             "against", "during", "without", "before", "under", "around",
             "among", "than", "because", "if", "while", "although", "since",
             "until", "upon", "within", "despite", "towards", "toward"});
  add("CC", {"and", "or", "but", "nor", "yet"});
  add("PRP", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us",
              "them", "myself", "yourself", "itself", "themselves"});
  add("PRP$", {"my", "your", "his", "her", "its", "our", "their"});
  add("WP", {"who", "whom", "what"});
  add("WDT", {"which", "whatever"});
  add("WRB", {"when", "where", "why", "how"});
  add("EX", {"there"});
  add("RB", {"not", "never", "very", "too", "also", "just", "so", "really",
             "always", "quite", "even", "only", "still", "here", "again",
             "ever", "n't", "rather", "almost", "often", "now", "then",
             "soon", "well", "once", "perhaps", "maybe", "sometimes"});
  add("MD", {"can", "could", "will", "would", "shall", "should", "may",
             "might", "must"});
  add("VB", {"be", "have", "do", "make", "see", "get", "go", "watch", "love",
             "hate", "like", "recommend"});
  add("VBZ", {"is", "has", "does", "'s", "works", "rocks", "makes", "seems",
              "looks", "feels"});
  add("VBP", {"am", "are", "'re", "'m", "'ve"});
  add("VBD", {"was", "were", "had", "did", "made", "saw", "got", "went",
              "felt", "loved", "hated", "watched", "thought"});
  add("VBN", {"been", "seen", "done", "gone", "given", "taken"});
  add("VBG", {"being", "having", "doing"});
  add("TO", {"to"});
  add("RP", {"up", "off", "out", "down"});
  add("UH", {"oh", "wow", "yes", "hey", "ah", "ok", "okay", "please"});
  add("CD", {"one", "two", "three", "four", "five", "six", "seven", "eight",
             "nine", "ten", "hundred", "thousand"});
  add("JJ", {"good", "bad", "great", "glad", "happy", "sad", "long", "short",
             "boring", "exciting", "awful", "terrible", "nice", "fine", "new",
             "old", "best", "worst", "funny", "dull", "poor", "excellent",
             "amazing", "horrible", "delightful", "blasphemous", "fantastic",
             "wonderful", "brilliant", "engaging", "interesting", "beautiful",
             "ugly", "stupid", "smart", "slow", "fast", "cheap", "fresh",
             "stale", "tasty", "bland", "perfect", "weak", "strong", "big",
             "small", "first", "last", "other", "same", "few", "many",
             "much", "more", "most", "less", "own", "such"});
  add("NN", {"movie", "film", "plot", "story", "acting", "actor", "actress",
             "director", "scene", "ending", "beginning", "time", "product",
             "food", "taste", "flavor", "service", "credits", "book", "show",
             "character", "music", "script", "cast", "thing", "way", "day",
             "people", "man", "woman", "men", "women", "girl", "boy"});
}

std::string LexiconPennTagger::TagWord(std::string_view word) const {
  if (auto it = lexicon_.find(std::string(word)); it != lexicon_.end()) {
    return it->second;
  }
  if (IsPunctuationToken(word)) {
    if (word == "," || word == "." || word == ":" || word == "?" ||
        word == "!" || word == "(" || word == ")" || word == "$" ||
        word == "#") {
      return std::string(word);
    }
    return "SYM";
  }
  if (IsBracketMarker(word)) return "SYM";
  if (std::all_of(word.begin(), word.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
      })) {
    return "CD";
  }
  if (word.front() == '\'') return "POS";
  if (EndsWith(word, "ly")) return "RB";
  if (EndsWith(word, "ing")) return "VBG";
  if (EndsWith(word, "ed")) return "VBD";
  for (std::string_view s : {"ous", "ful", "able", "ible", "ive", "less",
                             "ic", "ish", "ary", "est"}) {
    if (EndsWith(word, s)) return "JJ";
  }
  for (std::string_view s : {"tion", "sion", "ment", "ness", "ity", "ism",
                             "ance", "ence", "ship", "er", "or"}) {
    if (EndsWith(word, s)) return "NN";
  }
  if (EndsWith(word, "s") && !EndsWith(word, "ss")) return "NNS";
  return "NN";
}

std::vector<std::string> LexiconPennTagger::TagTokens(
    const std::vector<std::string>& tokens) const {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  for (const std::string& tok : tokens) tags.push_back(TagWord(tok));
  return tags;
}

DictionaryTagger::DictionaryTagger(
    std::unordered_map<std::string, UniversalTag> entries,
    std::optional<UniversalTag> fallback)
    : entries_(std::move(entries)), fallback_(fallback) {}

DictionaryTagger DictionaryTagger::FromTsv(std::string_view contents,
                                           std::optional<UniversalTag> fallback) {
  std::unordered_map<std::string, UniversalTag> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty() || Trim(line).front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("dictionary line " + std::to_string(line_no) +
                      ": expected token<TAB>tag");
    }
    const std::string token = ToLowerAscii(Trim(line.substr(0, tab)));
    const std::string_view tag_name = Trim(line.substr(tab + 1));
    auto tag = ParseUniversalTag(tag_name);
    if (!tag) {
      throw DataError("dictionary line " + std::to_string(line_no) +
                      ": unknown universal tag '" + std::string(tag_name) +
                      "'");
    }
    entries[token] = *tag;
  }
  return DictionaryTagger(std::move(entries), fallback);
}

DictionaryTagger DictionaryTagger::Load(const std::filesystem::path& path,
                                        std::optional<UniversalTag> fallback) {
  return FromTsv(ReadFile(path), fallback);
}

std::vector<UniversalTag> DictionaryTagger::TagTokens(
    const std::vector<std::string>& tokens) const {
  std::vector<UniversalTag> tags;
  tags.reserve(tokens.size());
  for (const std::string& tok : tokens) {
    if (auto it = entries_.find(tok); it != entries_.end()) {
      tags.push_back(it->second);
    } else if (IsBracketMarker(tok)) {
      tags.push_back(UniversalTag::kX);
    } else if (IsPunctuationToken(tok)) {
      tags.push_back(UniversalTag::kPunct);
    } else if (fallback_) {
      tags.push_back(*fallback_);
    } else {
      throw DataError("dictionary tagger: unknown token '" + tok + "'");
    }
  }
  return tags;
}

std::unique_ptr<Tagger> MakeTagger(std::string_view kind,
                                   const std::filesystem::path& dictionary_path) {
  if (kind == "dictionary") {
    if (dictionary_path.empty()) {
      throw ConfigError("tagger 'dictionary' needs a dictionary path");
    }
    return std::make_unique<DictionaryTagger>(
        DictionaryTagger::Load(dictionary_path));
  }
  if (kind == "lexicon") {
    return std::make_unique<MappedTagger>(std::make_unique<LexiconPennTagger>());
  }
  throw ConfigError("unknown tagger '" + std::string(kind) +
                    "' (expected dictionary or lexicon)");
}

TaggedExample Tag(const LabeledExample& example, const Tagger& tagger) {
  TaggedExample out;
  out.example = example;
  try {
    if (example.tokens && !example.text_b) {
      out.tokens = *example.tokens;
    } else {
      out.tokens = Tokenize(example.text_a);
    }
    out.tags = tagger.TagTokens(out.tokens);
    out.text_b_offset = out.tokens.size();
    if (example.text_b) {
      std::vector<std::string> hyp = Tokenize(*example.text_b);
      std::vector<UniversalTag> hyp_tags = tagger.TagTokens(hyp);
      out.tokens.insert(out.tokens.end(), hyp.begin(), hyp.end());
      out.tags.insert(out.tags.end(), hyp_tags.begin(), hyp_tags.end());
    }
  } catch (const std::exception& e) {
    throw DataError("tagging example " + example.id + " failed: " + e.what());
  }
  if (out.tags.size() != out.tokens.size()) {
    throw DataError("tagging example " + example.id +
                    " failed: tag count does not match token count");
  }
  return out;
}

Ablation AblateTag(const TaggedExample& tagged, UniversalTag tag) {
  Ablation out;
  out.example = tagged.example;
  std::vector<std::string> seg_a;
  std::vector<std::string> seg_b;
  for (std::size_t i = 0; i < tagged.tokens.size(); ++i) {
    if (tagged.tags[i] == tag) continue;
    out.kept_positions.push_back(i);
    (i < tagged.text_b_offset ? seg_a : seg_b).push_back(tagged.tokens[i]);
  }
  auto finish = [&out](std::vector<std::string>& seg) {
    if (seg.empty()) {
      out.degenerate = true;
      seg.emplace_back(kEmptySentinel);
    }
    return Detokenize(seg);
  };
  out.example.text_a = finish(seg_a);
  std::vector<std::string> all = seg_a;
  if (tagged.example.text_b) {
    out.example.text_b = finish(seg_b);
    all.insert(all.end(), seg_b.begin(), seg_b.end());
  }
  out.example.tokens = std::move(all);
  return out;
}

}  // namespace salad
