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

#ifndef SALAD_EVAL_HARNESS_H_
#define SALAD_EVAL_HARNESS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "salad/corpus.h"
#include "salad/encoder.h"
#include "salad/tagset_discovery.h"

namespace salad {

// Accuracy in percent of argmax predictions against gold labels.
double Evaluate(const Encoder& encoder, const Dataset& dataset);
double Evaluate(const ClassifierOracle& oracle, const Dataset& dataset);

// run name -> split name -> accuracy percent.
using ResultRows = std::map<std::string, std::map<std::string, double>>;

// Unweighted mean over splits for each run. All runs must share one split
// set; a split missing from some run raises ConfigError naming it.
std::map<std::string, double> AggregateOverall(const ResultRows& rows);

struct EvalReport {
  std::vector<std::string> split_order;  // column order for rendering
  ResultRows rows;                       // seed-averaged
  std::map<std::string, double> overall;
  std::vector<std::uint64_t> seeds;
  // run -> split -> one accuracy per seed, in `seeds` order.
  std::map<std::string, std::map<std::string, std::vector<double>>> per_seed;
  // Cells that failed, keyed "run/split".
  std::map<std::string, std::string> errors;

  // Averages per-seed accuracies per split, then splits into Overall.
  static EvalReport FromPerSeed(
      std::vector<std::string> split_order, std::vector<std::uint64_t> seeds,
      std::map<std::string, std::map<std::string, std::vector<double>>>
          per_seed);

  nlohmann::json ToJson() const;
  // Aligned columns: Methods | splits... | Overall.
  std::string FormatTable() const;
};

struct Domain {
  std::string name;
  std::string abbreviation;  // column label, e.g. "S"
  Dataset train;
  std::optional<Dataset> validation;
  Dataset test;
};

// Trains a classifier for (train, validation, seed).
using DomainTrainer = std::function<std::unique_ptr<Encoder>(
    const Dataset& train, const Dataset& validation, std::uint64_t seed)>;

// Validation split for a domain: the official one when present, otherwise
// a seeded 8:2 split of its training data. Returns (train, validation).
std::pair<Dataset, Dataset> DomainSplits(const Domain& domain,
                                         std::uint64_t seed);

// Trains once per (source domain, seed) and evaluates on every other
// domain's test set. Columns are "S→I"-style; a failing cell is recorded in
// `errors` and the remaining cells still run.
EvalReport CrossDomain(const std::vector<Domain>& domains,
                       const DomainTrainer& trainer,
                       const std::vector<std::uint64_t>& seeds,
                       const std::string& run_name);

}  // namespace salad

#endif  // SALAD_EVAL_HARNESS_H_
