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

#ifndef SALAD_PIPELINE_H_
#define SALAD_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "salad/corpus.h"
#include "salad/encoder.h"
#include "salad/losses.h"
#include "salad/negative_gen.h"
#include "salad/positive_gen.h"
#include "salad/trainer.h"

namespace salad {

struct TestSetConfig {
  std::string name;  // column label in reports
  std::filesystem::path path;
  Split split = Split::kOTest;
};

// Every run-level setting, resolved from a JSON config file plus overrides.
// Relative paths in the file resolve against the file's directory.
struct RunConfig {
  std::string run_name = "salad";
  Task task = Task::Sentiment();

  std::filesystem::path train_path;
  std::optional<std::filesystem::path> validation_path;
  double val_fraction = 0.1;
  std::vector<TestSetConfig> tests;
  std::optional<std::filesystem::path> dictionary_path;
  std::optional<std::filesystem::path> antonyms_path;
  std::optional<std::filesystem::path> oracle_checkpoint;

  std::string tagger = "dictionary";
  double threshold = kDefaultTagThreshold;
  std::string score_on = "train";  // or "validation"
  PositiveGenConfig positive;
  LossConfig loss;
  InstructionId instruction = InstructionId::kI4;
  std::string client = "stub";  // or "http"
  GenerationConfig generation;
  TrainingConfig training;
  ToyEncoderConfig encoder;
  std::string cad_embedder = "token-matching";  // or "pooled"
  std::filesystem::path output_dir;

  // The merged JSON the fields above were read from.
  nlohmann::json resolved;

  static RunConfig FromJson(const nlohmann::json& j,
                            const std::filesystem::path& base_dir);
  static RunConfig Load(const std::filesystem::path& path,
                        const nlohmann::json& overrides = nlohmann::json::object());

  // Throws ConfigError naming the first configured input that is missing.
  void CheckPathsExist() const;
};

struct CommandOptions {
  bool strict = false;
  bool train_oracle = false;
  std::vector<InstructionId> instructions;  // empty: the configured one
  std::string format = "table";             // eval output: table | json
};

// Each command reads its upstream artifacts from cfg.output_dir, writes its
// own under a stage subdirectory together with a manifest.json, and prints a
// short summary to `out`. Failures throw.
void CmdDiscoverTags(const RunConfig& cfg, const CommandOptions& opts,
                     std::ostream& out, std::ostream& err);
void CmdGenPos(const RunConfig& cfg, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);
void CmdGenNeg(const RunConfig& cfg, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);
void CmdTrain(const RunConfig& cfg, const CommandOptions& opts,
              std::ostream& out, std::ostream& err);
void CmdEval(const RunConfig& cfg, const CommandOptions& opts,
             std::ostream& out, std::ostream& err);
void CmdCadQuality(const RunConfig& cfg, const CommandOptions& opts,
                   std::ostream& out, std::ostream& err);

// Dispatches by command name and maps failures to exit codes: 0 success,
// 1 runtime failure, 2 configuration or usage error.
int RunCommand(std::string_view command, const RunConfig& cfg,
               const CommandOptions& opts, std::ostream& out,
               std::ostream& err);

// Parses "4", "I2", "1..4" or "1,3".
std::vector<InstructionId> ParseInstructionList(std::string_view text);

// Sets a dotted key ("training.epochs") in `patch`, parsing `value` as JSON
// when possible and as a string otherwise.
void SetOverride(nlohmann::json& patch, std::string_view dotted_key,
                 std::string_view value);

std::string CheckpointName(const std::string& run_name, std::uint64_t seed,
                           int epoch);

}  // namespace salad

#endif  // SALAD_PIPELINE_H_
