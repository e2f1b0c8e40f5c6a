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

#include "salad/completion_client.h"

#include <algorithm>
#include <cstdlib>
#include <utility>

#include "httplib.h"
#include "salad/corpus.h"
#include "salad/negative_gen.h"

namespace salad {

using json = nlohmann::json;

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kLlm:
      return "LLM";
    case Provenance::kStub:
      return "STUB";
    case Provenance::kHumanImport:
      return "HUMAN_IMPORT";
  }
  return "";
}

Provenance ProvenanceFromName(std::string_view name) {
  if (name == "LLM") return Provenance::kLlm;
  if (name == "STUB") return Provenance::kStub;
  if (name == "HUMAN_IMPORT") return Provenance::kHumanImport;
  throw DataError("unknown provenance '" + std::string(name) + "'");
}

HttpCompletionClient::HttpCompletionClient(std::string api_base,
                                           std::string api_key,
                                           std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  while (!api_base.empty() && api_base.back() == '/') api_base.pop_back();
  const std::size_t scheme_end = api_base.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("api base must include a scheme: " + api_base);
  }
  const std::size_t path_start = api_base.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = api_base;
  } else {
    host_ = api_base.substr(0, path_start);
    path_prefix_ = api_base.substr(path_start);
  }
}

HttpCompletionClient HttpCompletionClient::FromEnvironment() {
  const char* key = std::getenv("SALAD_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw ConfigError(
        "SALAD_API_KEY is not set; export it or use the stub client");
  }
  const char* base = std::getenv("SALAD_API_BASE");
  return HttpCompletionClient(
      base != nullptr && *base != '\0' ? base : "https://api.openai.com/v1",
      key);
}

json HttpCompletionClient::BuildRequestBody(const CompletionRequest& request) {
  return json{
      {"model", request.model},
      {"messages", json::array({json{{"role", "user"},
                                     {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
  };
}

std::string HttpCompletionClient::ParseResponseBody(std::string_view body) {
  try {
    const json j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("unexpected chat completion response: ") +
                e.what());
  }
}

std::string HttpCompletionClient::Complete(const CompletionRequest& request) {
  httplib::Client client(host_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  const httplib::Headers headers = {
      {"Authorization", "Bearer " + api_key_},
  };
  auto result = client.Post(path_prefix_ + "/chat/completions", headers,
                            BuildRequestBody(request).dump(),
                            "application/json");
  if (!result) {
    throw TransientError("chat completion request failed: " +
                         httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw TransientError("chat completion returned HTTP " +
                         std::to_string(status));
  }
  if (status != 200) {
    throw Error("chat completion returned HTTP " + std::to_string(status) +
                ": " + result->body.substr(0, 200));
  }
  return ParseResponseBody(result->body);
}

StubCompletionClient::StubCompletionClient(
    std::unordered_map<std::string, std::string> antonyms)
    : antonyms_(std::move(antonyms)) {}

StubCompletionClient StubCompletionClient::FromTsv(std::string_view contents) {
  std::unordered_map<std::string, std::string> explicit_pairs;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = Trim(contents.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("antonym line " + std::to_string(line_no) +
                      ": expected word<TAB>antonym");
    }
    explicit_pairs[ToLowerAscii(Trim(line.substr(0, tab)))] =
        ToLowerAscii(Trim(line.substr(tab + 1)));
  }
  auto table = explicit_pairs;
  for (const auto& [word, antonym] : explicit_pairs) {
    table.try_emplace(antonym, word);
  }
  return StubCompletionClient(std::move(table));
}

StubCompletionClient StubCompletionClient::Load(
    const std::filesystem::path& path) {
  return FromTsv(ReadFile(path));
}

std::string StubCompletionClient::Complete(const CompletionRequest& request) {
  const PromptParts parts = ParsePrompt(request.prompt);
  if (!parts.target) {
    throw Error("stub client: prompt has no sentence to rewrite");
  }
  std::vector<std::string> tokens = Tokenize(*parts.target);
  for (std::string& tok : tokens) {
    if (!parts.causal_words.empty() &&
        std::find(parts.causal_words.begin(), parts.causal_words.end(), tok) ==
            parts.causal_words.end()) {
      continue;
    }
    if (auto it = antonyms_.find(tok); it != antonyms_.end()) {
      tok = it->second;
    }
  }
  return Detokenize(tokens);
}

}  // namespace salad
