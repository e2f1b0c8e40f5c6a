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

// Command-line entry point. Each subcommand runs one pipeline stage against a
// JSON run config; flags override individual config keys.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "salad/common.h"
#include "salad/pipeline.h"

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual augmentation and contrastive training pipeline"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<double> threshold;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<std::string> instruction;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> sets;
  salad::CommandOptions opts;

  app.add_option("--config", config_path, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--output-dir", output_dir, "Run directory for artifacts");
  app.add_option("--threshold", threshold, "Tag causality threshold");
  app.add_option("--lambda", lambda, "Triplet loss weight in [0, 1]");
  app.add_option("--epochs", epochs, "Training epochs");
  app.add_option("--seeds", seeds, "Training seeds")->delimiter(',');
  app.add_option("--instruction", instruction,
                 "Instruction id: 4, I2, 1..4 or 1,3");
  app.add_option("--set", sets, "Override any config key: key.path=value");
  app.add_flag("--strict", opts.strict, "Treat stale upstream artifacts as errors");
  app.add_flag("--train-oracle", opts.train_oracle,
               "discover-tags: fit the scoring classifier on the train split");
  app.add_option("--format", opts.format, "eval output: table or json")
      ->check(CLI::IsMember({"table", "json"}));

  for (const char* name : {"discover-tags", "gen-pos", "gen-neg", "train",
                           "eval", "cad-quality"}) {
    app.add_subcommand(name);
  }
  app.get_subcommand("discover-tags")
      ->description("Score POS tags by ablation and split them into causal/non-causal sets");
  app.get_subcommand("gen-pos")->description("Mask k non-causal tokens per example");
  app.get_subcommand("gen-neg")->description("Generate label-flipped counterfactuals");
  app.get_subcommand("train")->description("Train with cross-entropy plus triplet loss");
  app.get_subcommand("eval")->description("Evaluate checkpoints on the configured test sets");
  app.get_subcommand("cad-quality")->description("Diversity, overlap and similarity of generated data");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  salad::RunConfig cfg;
  try {
    nlohmann::json patch = nlohmann::json::object();
    if (output_dir) patch["output_dir"] = *output_dir;
    if (threshold) patch["threshold"] = *threshold;
    if (lambda) patch["lambda"] = *lambda;
    if (epochs) patch["training"]["epochs"] = *epochs;
    if (!seeds.empty()) patch["seeds"] = seeds;
    for (const std::string& s : sets) {
      const std::size_t eq = s.find('=');
      if (eq == std::string::npos) {
        throw salad::ConfigError("--set expects key=value, got '" + s + "'");
      }
      salad::SetOverride(patch, s.substr(0, eq), s.substr(eq + 1));
    }
    if (instruction) {
      opts.instructions = salad::ParseInstructionList(*instruction);
      patch["instruction_id"] = salad::InstructionName(opts.instructions.front());
    }
    // A relative --output-dir is taken relative to the working directory,
    // not the config file.
    if (output_dir) {
      patch["output_dir"] = std::filesystem::absolute(*output_dir).string();
    }
    cfg = salad::RunConfig::Load(config_path, patch);
  } catch (const salad::Error& e) {
    std::cerr << "error [" << command << "]: " << e.what() << "\n";
    return 2;
  }
  return salad::RunCommand(command, cfg, opts, std::cout, std::cerr);
}
