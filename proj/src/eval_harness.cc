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

#include "salad/eval_harness.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "salad/common.h"

namespace salad {

double Evaluate(const Encoder& encoder, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("cannot evaluate on an empty dataset");
  constexpr std::size_t kBatch = 64;
  std::size_t correct = 0;
  std::vector<std::string> texts;
  for (std::size_t start = 0; start < dataset.size(); start += kBatch) {
    const std::size_t end = std::min(dataset.size(), start + kBatch);
    texts.clear();
    for (std::size_t i = start; i < end; ++i) {
      texts.push_back(dataset.examples[i].FullText());
    }
    const EncodeOutput out = encoder.Encode(texts);
    for (std::size_t i = start; i < end; ++i) {
      correct += ArgMax(out.logits.row(static_cast<Eigen::Index>(i - start))) ==
                 dataset.examples[i].label;
    }
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(dataset.size());
}

double Evaluate(const ClassifierOracle& oracle, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("cannot evaluate on an empty dataset");
  std::size_t correct = 0;
  for (const LabeledExample& ex : dataset.examples) {
    correct += oracle.Predict(ex) == ex.label;
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(dataset.size());
}

std::map<std::string, double> AggregateOverall(const ResultRows& rows) {
  std::set<std::string> all_splits;
  for (const auto& [run, splits] : rows) {
    for (const auto& [split, acc] : splits) all_splits.insert(split);
  }
  std::map<std::string, double> overall;
  for (const auto& [run, splits] : rows) {
    for (const std::string& split : all_splits) {
      if (!splits.contains(split)) {
        throw ConfigError("run '" + run + "' is missing split '" + split + "'");
      }
    }
    if (splits.empty()) throw ConfigError("run '" + run + "' has no splits");
    double sum = 0.0;
    for (const auto& [split, acc] : splits) sum += acc;
    overall[run] = sum / static_cast<double>(splits.size());
  }
  return overall;
}

EvalReport EvalReport::FromPerSeed(
    std::vector<std::string> split_order, std::vector<std::uint64_t> seeds,
    std::map<std::string, std::map<std::string, std::vector<double>>>
        per_seed) {
  EvalReport report;
  report.split_order = std::move(split_order);
  report.seeds = std::move(seeds);
  report.per_seed = std::move(per_seed);
  for (const auto& [run, splits] : report.per_seed) {
    for (const auto& [split, accs] : splits) {
      if (accs.empty()) continue;
      report.rows[run][split] =
          std::accumulate(accs.begin(), accs.end(), 0.0) /
          static_cast<double>(accs.size());
    }
  }
  report.overall = AggregateOverall(report.rows);
  return report;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j;
  j["splits"] = split_order;
  j["seeds"] = seeds;
  j["rows"] = rows;
  j["overall"] = overall;
  j["per_seed"] = per_seed;
  if (!errors.empty()) j["errors"] = errors;
  return j;
}

std::string EvalReport::FormatTable() const {
  std::size_t name_width = std::string("Methods").size();
  for (const auto& [run, _] : rows) name_width = std::max(name_width, run.size());
  std::vector<std::string> columns = split_order;
  columns.push_back("Overall");
  std::vector<std::size_t> widths;
  for (const std::string& c : columns) {
    // Column labels such as "S→I" contain multi-byte characters; pad on
    // display width, approximated by code points.
    std::size_t points = 0;
    for (unsigned char ch : c) points += (ch & 0xC0) != 0x80;
    widths.push_back(std::max<std::size_t>(points, 6));
  }
  std::ostringstream out;
  auto pad = [&out](const std::string& s, std::size_t width) {
    std::size_t points = 0;
    for (unsigned char ch : s) points += (ch & 0xC0) != 0x80;
    out << std::string(width > points ? width - points : 0, ' ') << s;
  };
  out << "Methods" << std::string(name_width - 7, ' ');
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << "  ";
    pad(columns[c], widths[c]);
  }
  out << "\n";
  for (const auto& [run, splits] : rows) {
    out << run << std::string(name_width - run.size(), ' ');
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::optional<double> value;
      if (c + 1 == columns.size()) {
        if (auto it = overall.find(run); it != overall.end()) value = it->second;
      } else if (auto it = splits.find(columns[c]); it != splits.end()) {
        value = it->second;
      }
      char cell[32];
      if (value) {
        std::snprintf(cell, sizeof(cell), "%.2f", *value);
      } else {
        std::snprintf(cell, sizeof(cell), "-");
      }
      out << "  ";
      pad(cell, widths[c]);
    }
    out << "\n";
  }
  return out.str();
}

std::pair<Dataset, Dataset> DomainSplits(const Domain& domain,
                                         std::uint64_t seed) {
  if (domain.validation) return {domain.train, *domain.validation};
  return SplitTrainVal(domain.train, 0.2, seed);
}

EvalReport CrossDomain(const std::vector<Domain>& domains,
                       const DomainTrainer& trainer,
                       const std::vector<std::uint64_t>& seeds,
                       const std::string& run_name) {
  if (domains.size() < 2) {
    throw ConfigError("cross-domain evaluation needs at least two domains");
  }
  if (seeds.empty()) throw ConfigError("cross-domain evaluation needs seeds");
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> cells;
  std::map<std::string, std::string> errors;
  for (const Domain& source : domains) {
    for (const Domain& target : domains) {
      if (&source != &target) {
        columns.push_back(source.abbreviation + "→" + target.abbreviation);
      }
    }
  }
  for (const Domain& source : domains) {
    for (std::uint64_t seed : seeds) {
      std::unique_ptr<Encoder> model;
      std::string train_error;
      try {
        auto [train, val] = DomainSplits(source, seed);
        model = trainer(train, val, seed);
      } catch (const std::exception& e) {
        train_error = e.what();
      }
      for (const Domain& target : domains) {
        if (&source == &target) continue;
        const std::string col =
            source.abbreviation + "→" + target.abbreviation;
        if (!model) {
          errors[run_name + "/" + col] = train_error;
          continue;
        }
        try {
          cells[col].push_back(Evaluate(*model, target.test));
        } catch (const std::exception& e) {
          errors[run_name + "/" + col] = e.what();
        }
      }
    }
  }
  EvalReport report;
  report.split_order = columns;
  report.seeds = seeds;
  for (auto& [col, accs] : cells) {
    if (accs.size() == seeds.size()) report.per_seed[run_name][col] = accs;
  }
  for (const auto& [run, splits] : report.per_seed) {
    for (const auto& [split, accs] : splits) {
      report.rows[run][split] = std::accumulate(accs.begin(), accs.end(), 0.0) /
                                static_cast<double>(accs.size());
    }
  }
  if (!report.rows.empty()) {
    // Overall over the cells that completed for every seed.
    report.overall = AggregateOverall(report.rows);
  }
  report.errors = std::move(errors);
  return report;
}

}  // namespace salad
