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

#ifndef SALAD_COMPLETION_CLIENT_H_
#define SALAD_COMPLETION_CLIENT_H_

#include <chrono>
#include <string>
#include <string_view>
#include <unordered_map>

#include "json.hpp"
#include "salad/common.h"

namespace salad {

enum class Provenance { kLlm, kStub, kHumanImport };

std::string_view ProvenanceName(Provenance p);
Provenance ProvenanceFromName(std::string_view name);

struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.1;
  double top_p = 1.0;
};

// Raised for failures worth retrying (timeouts, 429, 5xx).
class TransientError : public Error {
 public:
  using Error::Error;
};

// Single-turn chat completion. Implementations must tolerate concurrent
// Complete() calls.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string Complete(const CompletionRequest& request) = 0;
  virtual Provenance provenance() const = 0;
};

// OpenAI-compatible chat-completions client over HTTP(S).
class HttpCompletionClient : public CompletionClient {
 public:
  // `api_base` like "https://api.openai.com/v1"; requests go to
  // {api_base}/chat/completions.
  HttpCompletionClient(std::string api_base, std::string api_key,
                       std::chrono::seconds timeout = std::chrono::seconds(60));

  // Reads SALAD_API_BASE and SALAD_API_KEY. Throws ConfigError when the key
  // is missing.
  static HttpCompletionClient FromEnvironment();

  static nlohmann::json BuildRequestBody(const CompletionRequest& request);
  // First choice's message content. Throws Error on unexpected shapes.
  static std::string ParseResponseBody(std::string_view body);

  std::string Complete(const CompletionRequest& request) override;
  Provenance provenance() const override { return Provenance::kLlm; }

 private:
  std::string host_;  // scheme://host[:port]
  std::string path_prefix_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

// Offline stand-in for an LLM: reads the sentence and causal-word list out of
// a rendered prompt and swaps words found in an antonym table. When the
// prompt lists causal words only those are eligible.
class StubCompletionClient : public CompletionClient {
 public:
  explicit StubCompletionClient(
      std::unordered_map<std::string, std::string> antonyms);

  // TSV: word<TAB>antonym. Pairs are made symmetric unless the reverse
  // direction is listed explicitly.
  static StubCompletionClient FromTsv(std::string_view contents);
  static StubCompletionClient Load(const std::filesystem::path& path);

  std::string Complete(const CompletionRequest& request) override;
  Provenance provenance() const override { return Provenance::kStub; }

 private:
  std::unordered_map<std::string, std::string> antonyms_;
};

}  // namespace salad

#endif  // SALAD_COMPLETION_CLIENT_H_
