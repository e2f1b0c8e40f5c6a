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

#include "salad/pipeline.h"

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "salad/cad_quality.h"
#include "salad/common.h"
#include "salad/completion_client.h"
#include "salad/eval_harness.h"
#include "salad/postag.h"
#include "salad/tagset_discovery.h"

namespace salad {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr char kTagsDir[] = "tags";
constexpr char kPositivesDir[] = "positives";
constexpr char kNegativesDir[] = "negatives";
constexpr char kTrainDir[] = "train";
constexpr char kEvalDir[] = "eval";
constexpr char kCadDir[] = "cad";

json DefaultConfig() {
  return json{
      {"run_name", "salad"},
      {"task", "sentiment"},
      {"paths", json::object()},
      {"val_fraction", 0.1},
      {"tagger", "dictionary"},
      {"threshold", kDefaultTagThreshold},
      {"score_on", "train"},
      {"scaling_factor", 0.18},
      {"k_override", nullptr},
      {"unk_token", "[UNK]"},
      {"lambda", 0.5},
      {"margin", 1.0},
      {"distance", "euclidean"},
      {"triplet_mode", "batch_mean_hinge"},
      {"instruction_id", "I4"},
      {"generation",
       {{"client", "stub"},
        {"model_name", "gpt-4o-mini"},
        {"temperature", 0.1},
        {"top_p", 1.0},
        {"max_retries", 3},
        {"cache_dir", nullptr},
        {"concurrency_limit", 4},
        {"initial_backoff_ms", 500},
        {"max_failure_rate", 0.0}}},
      {"training",
       {{"batch_size", 16},
        {"learning_rate", 1e-5},
        {"max_seq_len", nullptr},
        {"epochs", 3},
        {"ce_on_negatives", false}}},
      {"encoder", {{"embedding_dim", 16}, {"hidden", 8}}},
      {"seeds", {13, 21, 42}},
      {"cad_embedder", "token-matching"},
      {"output_dir", "runs"},
  };
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<fs::path> OptionalPath(const json& paths, const char* key,
                                     const fs::path& base) {
  auto it = paths.find(key);
  if (it == paths.end() || it->is_null()) return std::nullopt;
  return Resolve(base, it->get<std::string>());
}

std::string FileDigest(const fs::path& path) { return Sha256Hex(ReadFile(path)); }

// Content digests of the configured inputs, so hashes do not depend on
// where the files live.
json InputDigests(const RunConfig& cfg) {
  json d = json::object();
  d["train"] = FileDigest(cfg.train_path);
  if (cfg.validation_path) d["validation"] = FileDigest(*cfg.validation_path);
  if (cfg.dictionary_path) d["dictionary"] = FileDigest(*cfg.dictionary_path);
  if (cfg.antonyms_path) d["antonyms"] = FileDigest(*cfg.antonyms_path);
  if (cfg.oracle_checkpoint && fs::exists(*cfg.oracle_checkpoint)) {
    d["oracle_checkpoint"] = FileDigest(*cfg.oracle_checkpoint);
  }
  json tests = json::array();
  for (const TestSetConfig& t : cfg.tests) {
    tests.push_back({{"name", t.name},
                     {"split", SplitName(t.split)},
                     {"digest", FileDigest(t.path)}});
  }
  d["tests"] = tests;
  return d;
}

json Pick(const json& j, std::initializer_list<const char*> keys) {
  json out = json::object();
  for (const char* k : keys) {
    if (j.contains(k)) out[k] = j.at(k);
  }
  return out;
}

// Hash of the settings a stage consumes, chained through its upstream
// stages.
std::string StageHash(std::string_view stage, const RunConfig& cfg,
                      const json& digests) {
  const json& r = cfg.resolved;
  json payload;
  if (stage == kTagsDir) {
    payload = Pick(r, {"task", "tagger", "threshold", "score_on",
                       "val_fraction", "encoder", "training", "seeds"});
    payload["inputs"] = Pick(digests, {"train", "validation", "dictionary",
                                       "oracle_checkpoint"});
  } else if (stage == kPositivesDir) {
    payload = Pick(r, {"scaling_factor", "k_override", "unk_token", "seeds"});
    payload["epochs"] = r.at("training").at("epochs");
    payload["upstream"] = StageHash(kTagsDir, cfg, digests);
  } else if (stage == kNegativesDir) {
    json gen = r.at("generation");
    gen.erase("cache_dir");
    gen.erase("concurrency_limit");
    gen.erase("initial_backoff_ms");
    payload["generation"] = gen;
    payload["inputs"] = Pick(digests, {"antonyms"});
    payload["upstream"] = StageHash(kTagsDir, cfg, digests);
  } else if (stage == kTrainDir) {
    payload = Pick(r, {"run_name", "lambda", "margin", "distance",
                       "triplet_mode", "instruction_id", "training", "encoder",
                       "seeds"});
    payload["upstream"] = json::array({StageHash(kPositivesDir, cfg, digests),
                                       StageHash(kNegativesDir, cfg, digests)});
  } else if (stage == kEvalDir) {
    payload["tests"] = digests.at("tests");
    payload["upstream"] = StageHash(kTrainDir, cfg, digests);
  } else if (stage == kCadDir) {
    payload = Pick(r, {"cad_embedder"});
    payload["upstream"] = StageHash(kNegativesDir, cfg, digests);
  }
  return Sha256Hex(payload.dump());
}

std::string ConfigHash(const RunConfig& cfg, const json& digests) {
  json payload = cfg.resolved;
  payload.erase("output_dir");
  payload.erase("paths");
  payload["generation"].erase("cache_dir");
  payload["inputs"] = digests;
  return Sha256Hex(payload.dump());
}

void WriteJson(const fs::path& path, const json& j) {
  WriteFileAtomic(path, j.dump(2) + "\n");
}

json ReadJson(const fs::path& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void WriteManifest(const RunConfig& cfg, const json& digests,
                   std::string_view stage, std::string_view command,
                   const std::vector<fs::path>& outputs) {
  json files = json::object();
  for (const fs::path& p : outputs) {
    files[fs::relative(p, cfg.output_dir).generic_string()] = FileDigest(p);
  }
  WriteJson(cfg.output_dir / stage / "manifest.json",
            json{{"command", command},
                 {"stage_hash", StageHash(stage, cfg, digests)},
                 {"config_hash", ConfigHash(cfg, digests)},
                 {"inputs", digests},
                 {"outputs", files}});
}

// Confirms an upstream stage ran and was produced from the current settings.
void CheckUpstream(const RunConfig& cfg, const json& digests,
                   std::string_view stage, std::string_view producer,
                   const CommandOptions& opts, std::ostream& err) {
  const fs::path manifest = cfg.output_dir / stage / "manifest.json";
  if (!fs::exists(manifest)) {
    throw ConfigError("missing upstream artifacts in " +
                      (cfg.output_dir / stage).string() + "; run `salad " +
                      std::string(producer) + "` first");
  }
  const json m = ReadJson(manifest);
  if (m.value("stage_hash", std::string()) != StageHash(stage, cfg, digests)) {
    const std::string msg = "upstream artifacts in " +
                            (cfg.output_dir / stage).string() +
                            " were produced with a different configuration; "
                            "rerun `salad " + std::string(producer) + "`";
    if (opts.strict) throw ConfigError("stale artifact: " + msg);
    err << "warning: " << msg << "\n";
  }
}

struct LoadedData {
  Dataset train;
  Dataset validation;
};

LoadedData LoadTrainVal(const RunConfig& cfg) {
  Dataset full = LoadDataset(cfg.train_path, cfg.task, Split::kTrain);
  if (cfg.validation_path) {
    return {std::move(full),
            LoadDataset(*cfg.validation_path, cfg.task, Split::kValidation)};
  }
  auto [train, val] = SplitTrainVal(full, cfg.val_fraction,
                                    cfg.training.seeds.front());
  return {std::move(train), std::move(val)};
}

std::vector<TaggedExample> TagAll(const Dataset& ds, const Tagger& tagger) {
  std::vector<TaggedExample> out;
  out.reserve(ds.size());
  for (const LabeledExample& ex : ds.examples) out.push_back(Tag(ex, tagger));
  return out;
}

std::unique_ptr<Tagger> MakeConfiguredTagger(const RunConfig& cfg) {
  return MakeTagger(cfg.tagger, cfg.dictionary_path.value_or(fs::path()));
}

TagSetPartition LoadPartition(const RunConfig& cfg) {
  return PartitionFromJson(ReadJson(cfg.output_dir / kTagsDir / "tag_report.json"));
}

std::unique_ptr<CompletionClient> MakeClient(const RunConfig& cfg) {
  if (cfg.client == "stub") {
    if (!cfg.antonyms_path) {
      throw ConfigError("the stub client needs paths.antonyms");
    }
    return std::make_unique<StubCompletionClient>(
        StubCompletionClient::Load(*cfg.antonyms_path));
  }
  if (cfg.client == "http") {
    return std::make_unique<HttpCompletionClient>(
        HttpCompletionClient::FromEnvironment());
  }
  throw ConfigError("unknown client '" + cfg.client + "' (expected stub or http)");
}

std::vector<InstructionId> Instructions(const RunConfig& cfg,
                                        const CommandOptions& opts) {
  if (!opts.instructions.empty()) return opts.instructions;
  return {cfg.instruction};
}

fs::path NegativesPath(const RunConfig& cfg, InstructionId id) {
  return cfg.output_dir / kNegativesDir /
         ("negatives-" + InstructionName(id) + ".jsonl");
}

ToyEncoder NewEncoder(const RunConfig& cfg, std::span<const std::string> texts,
                      std::uint64_t seed) {
  ToyEncoderConfig enc = cfg.encoder;
  enc.num_classes = static_cast<int>(cfg.task.num_labels());
  enc.max_seq_len = cfg.training.max_seq_len;
  enc.init_seed = seed;
  return ToyEncoder(Vocabulary::Build(texts, cfg.positive.unk_token), enc);
}

std::vector<std::string> TrainTexts(const Dataset& ds) {
  std::vector<std::string> texts;
  for (const LabeledExample& ex : ds.examples) texts.push_back(ex.FullText());
  return texts;
}

}  // namespace

std::string CheckpointName(const std::string& run_name, std::uint64_t seed,
                           int epoch) {
  return run_name + "-seed" + std::to_string(seed) + "-ep" +
         std::to_string(epoch);
}

RunConfig RunConfig::FromJson(const json& user, const fs::path& base_dir) {
  json j = DefaultConfig();
  j.merge_patch(user);
  RunConfig cfg;
  try {
    cfg.run_name = j.at("run_name").get<std::string>();
    cfg.task = Task::FromName(j.at("task").get<std::string>());
    const json& paths = j.at("paths");
    if (!paths.contains("train")) throw ConfigError("paths.train is required");
    cfg.train_path = Resolve(base_dir, paths.at("train").get<std::string>());
    cfg.validation_path = OptionalPath(paths, "validation", base_dir);
    cfg.dictionary_path = OptionalPath(paths, "dictionary", base_dir);
    cfg.antonyms_path = OptionalPath(paths, "antonyms", base_dir);
    cfg.oracle_checkpoint = OptionalPath(paths, "oracle_checkpoint", base_dir);
    if (paths.contains("tests")) {
      for (const json& t : paths.at("tests")) {
        TestSetConfig test;
        test.name = t.at("name").get<std::string>();
        test.path = Resolve(base_dir, t.at("path").get<std::string>());
        test.split = SplitFromName(t.value("split", std::string("o_test")));
        cfg.tests.push_back(std::move(test));
      }
    }
    cfg.val_fraction = j.at("val_fraction").get<double>();
    cfg.tagger = j.at("tagger").get<std::string>();
    cfg.threshold = j.at("threshold").get<double>();
    cfg.score_on = j.at("score_on").get<std::string>();
    if (cfg.score_on != "train" && cfg.score_on != "validation") {
      throw ConfigError("score_on must be 'train' or 'validation'");
    }
    cfg.positive.scaling_factor = j.at("scaling_factor").get<double>();
    if (!j.at("k_override").is_null()) {
      cfg.positive.k_override = j.at("k_override").get<int>();
    }
    cfg.positive.unk_token = j.at("unk_token").get<std::string>();
    cfg.loss.lambda = j.at("lambda").get<double>();
    cfg.loss.margin = j.at("margin").get<double>();
    cfg.loss.distance = DistanceFromName(j.at("distance").get<std::string>());
    cfg.loss.triplet_mode =
        TripletModeFromName(j.at("triplet_mode").get<std::string>());
    cfg.instruction =
        InstructionFromName(j.at("instruction_id").get<std::string>());

    const json& gen = j.at("generation");
    cfg.client = gen.at("client").get<std::string>();
    cfg.generation.model_name = gen.at("model_name").get<std::string>();
    cfg.generation.temperature = gen.at("temperature").get<double>();
    cfg.generation.top_p = gen.at("top_p").get<double>();
    cfg.generation.max_retries = gen.at("max_retries").get<int>();
    cfg.generation.concurrency_limit = gen.at("concurrency_limit").get<std::size_t>();
    cfg.generation.initial_backoff_ms = gen.at("initial_backoff_ms").get<int>();
    cfg.generation.max_failure_rate = gen.at("max_failure_rate").get<double>();

    const json& tr = j.at("training");
    cfg.training.batch_size = tr.at("batch_size").get<int>();
    cfg.training.learning_rate = tr.at("learning_rate").get<double>();
    cfg.training.max_seq_len = tr.at("max_seq_len").is_null()
                                   ? TrainingConfig::DefaultMaxSeqLen(cfg.task)
                                   : tr.at("max_seq_len").get<int>();
    cfg.training.epochs = tr.at("epochs").get<int>();
    cfg.training.ce_on_negatives = tr.at("ce_on_negatives").get<bool>();
    cfg.training.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();

    cfg.encoder.embedding_dim = j.at("encoder").at("embedding_dim").get<int>();
    cfg.encoder.hidden = j.at("encoder").at("hidden").get<int>();
    cfg.cad_embedder = j.at("cad_embedder").get<std::string>();
    if (cfg.cad_embedder != "token-matching" && cfg.cad_embedder != "pooled") {
      throw ConfigError("cad_embedder must be 'token-matching' or 'pooled'");
    }
    cfg.output_dir = Resolve(base_dir, j.at("output_dir").get<std::string>());
    const json& cache = gen.at("cache_dir");
    cfg.generation.cache_dir = cache.is_null()
                                   ? cfg.output_dir / "cache"
                                   : Resolve(base_dir, cache.get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.positive.Validate();
  cfg.loss.Validate();
  cfg.generation.Validate();
  cfg.training.Validate();
  if (!(cfg.threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0)) {
    throw ConfigError("val_fraction must lie in (0, 1)");
  }
  cfg.resolved = std::move(j);
  return cfg;
}

RunConfig RunConfig::Load(const fs::path& path, const json& overrides) {
  json user;
  try {
    user = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  user.merge_patch(overrides);
  return FromJson(user, fs::absolute(path).parent_path());
}

void RunConfig::CheckPathsExist() const {
  auto need = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) {
      throw ConfigError(std::string(what) + " not found: " + p.string());
    }
  };
  need(train_path, "paths.train");
  if (validation_path) need(*validation_path, "paths.validation");
  if (dictionary_path) need(*dictionary_path, "paths.dictionary");
  if (antonyms_path) need(*antonyms_path, "paths.antonyms");
  for (const TestSetConfig& t : tests) need(t.path, "test set");
  if (tagger == "dictionary" && !dictionary_path) {
    throw ConfigError("tagger 'dictionary' needs paths.dictionary");
  }
}

void CmdDiscoverTags(const RunConfig& cfg, const CommandOptions& opts,
                     std::ostream& out, std::ostream& err) {
  (void)err;
  cfg.CheckPathsExist();
  const LoadedData data = LoadTrainVal(cfg);
  const std::unique_ptr<Tagger> tagger = MakeConfiguredTagger(cfg);
  const fs::path dir = cfg.output_dir / kTagsDir;
  std::vector<fs::path> outputs;

  std::unique_ptr<ToyEncoder> oracle_model;
  if (opts.train_oracle) {
    const std::vector<std::string> texts = TrainTexts(data.train);
    const std::uint64_t seed = cfg.training.seeds.front();
    oracle_model = std::make_unique<ToyEncoder>(NewEncoder(cfg, texts, seed));
    const std::vector<TaggedExample> tagged = TagAll(data.train, *tagger);
    const TagSetPartition none;
    TrainingInputs inputs;
    inputs.train = &data.train;
    inputs.tagged = tagged;
    inputs.partition = &none;
    inputs.validation = &data.validation;
    LossConfig ce_only = cfg.loss;
    ce_only.lambda = 0.0;
    const auto log = Train(inputs, ce_only, cfg.training, seed, *oracle_model);
    const fs::path ckpt = dir / "oracle.ckpt.json";
    WriteJson(ckpt, oracle_model->ToJson());
    outputs.push_back(ckpt);
    out << "trained oracle (seed " << seed << "): final train CE "
        << log.back().ce;
    if (log.back().val_acc) out << ", val acc " << *log.back().val_acc << "%";
    out << "\n";
  } else if (cfg.oracle_checkpoint) {
    if (!fs::exists(*cfg.oracle_checkpoint)) {
      throw ConfigError("oracle checkpoint not found: " +
                        cfg.oracle_checkpoint->string() +
                        " (pass --train-oracle to fit one)");
    }
    oracle_model = std::make_unique<ToyEncoder>(
        ToyEncoder::FromJson(ReadJson(*cfg.oracle_checkpoint)));
  } else {
    throw ConfigError(
        "no classifier to score tags with: set paths.oracle_checkpoint or "
        "pass --train-oracle");
  }

  const EncoderOracle oracle(*oracle_model);
  const Dataset& scored =
      cfg.score_on == "validation" ? data.validation : data.train;
  const TagImportanceReport report = ScoreTags(scored, oracle, *tagger);
  const TagSetPartition partition = PartitionTags(report, cfg.threshold);
  const fs::path report_path = dir / "tag_report.json";
  WriteJson(report_path, TagReportToJson(report, partition));
  outputs.push_back(report_path);
  WriteManifest(cfg, InputDigests(cfg), kTagsDir, "discover-tags", outputs);
  out << FormatTagTable(report, partition);
}

void CmdGenPos(const RunConfig& cfg, const CommandOptions& opts,
               std::ostream& out, std::ostream& err) {
  cfg.CheckPathsExist();
  const json digests = InputDigests(cfg);
  CheckUpstream(cfg, digests, kTagsDir, "discover-tags", opts, err);
  const LoadedData data = LoadTrainVal(cfg);
  const std::unique_ptr<Tagger> tagger = MakeConfiguredTagger(cfg);
  const TagSetPartition partition = LoadPartition(cfg);
  const std::vector<TaggedExample> tagged = TagAll(data.train, *tagger);
  const double mean = MeanNonCausalCount(tagged, partition);
  const int k = KFromMean(mean, cfg.positive);

  const fs::path dir = cfg.output_dir / kPositivesDir;
  std::vector<fs::path> outputs;
  const fs::path k_path = dir / "k.json";
  json k_json{{"k", k},
              {"mean_noncausal", mean},
              {"scaling_factor", cfg.positive.scaling_factor}};
  k_json["k_override"] = cfg.positive.k_override
                             ? json(*cfg.positive.k_override)
                             : json(nullptr);
  WriteJson(k_path, k_json);
  outputs.push_back(k_path);
  const std::uint64_t seed = cfg.training.seeds.front();
  for (int epoch = 0; epoch < cfg.training.epochs; ++epoch) {
    const std::vector<PositiveExample> positives = GenerateEpochPositives(
        tagged, partition, k, epoch, seed, cfg.positive.unk_token);
    const fs::path p = dir / ("epoch-" + std::to_string(epoch) + ".jsonl");
    WriteFileAtomic(p, SerializePositives(positives));
    outputs.push_back(p);
  }
  WriteManifest(cfg, digests, kPositivesDir, "gen-pos", outputs);
  out << "mean non-causal tokens " << mean << ", scaling factor "
      << cfg.positive.scaling_factor << " -> k = " << k << "\n";
  out << "wrote positives for " << cfg.training.epochs << " epoch(s) of "
      << data.train.size() << " examples\n";
}

void CmdGenNeg(const RunConfig& cfg, const CommandOptions& opts,
               std::ostream& out, std::ostream& err) {
  cfg.CheckPathsExist();
  const json digests = InputDigests(cfg);
  CheckUpstream(cfg, digests, kTagsDir, "discover-tags", opts, err);
  const LoadedData data = LoadTrainVal(cfg);
  const std::unique_ptr<Tagger> tagger = MakeConfiguredTagger(cfg);
  const TagSetPartition partition = LoadPartition(cfg);
  const std::vector<TaggedExample> tagged = TagAll(data.train, *tagger);
  const std::unique_ptr<CompletionClient> client = MakeClient(cfg);

  const fs::path dir = cfg.output_dir / kNegativesDir;
  std::vector<fs::path> outputs;
  // Keep files from other instructions listed in the manifest.
  for (int i = 1; i <= 4; ++i) {
    const auto id = static_cast<InstructionId>(i);
    const fs::path existing = NegativesPath(cfg, id);
    const std::vector<InstructionId> now = Instructions(cfg, opts);
    if (fs::exists(existing) &&
        std::find(now.begin(), now.end(), id) == now.end()) {
      outputs.push_back(existing);
      outputs.push_back(dir / ("skips-" + InstructionName(id) + ".json"));
    }
  }
  for (InstructionId id : Instructions(cfg, opts)) {
    const NegativeGenResult result = GenerateNegatives(
        data.train, tagged, partition, id, cfg.generation, *client);
    const fs::path neg_path = NegativesPath(cfg, id);
    WriteFileAtomic(neg_path, SerializeNegatives(result.negatives, cfg.task));
    const fs::path skip_path = dir / ("skips-" + InstructionName(id) + ".json");
    WriteJson(skip_path, result.ManifestJson());
    outputs.push_back(neg_path);
    outputs.push_back(skip_path);
    out << InstructionName(id) << ": " << result.negatives.size()
        << " negatives, " << result.skipped.size() << " skipped, "
        << result.failed.size() << " failed (" << result.stats.client_calls
        << " client calls, " << result.stats.cache_hits << " cache hits)\n";
  }
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  outputs.erase(std::remove_if(outputs.begin(), outputs.end(),
                               [](const fs::path& p) { return !fs::exists(p); }),
                outputs.end());
  WriteManifest(cfg, digests, kNegativesDir, "gen-neg", outputs);
}

void CmdTrain(const RunConfig& cfg, const CommandOptions& opts,
              std::ostream& out, std::ostream& err) {
  cfg.CheckPathsExist();
  const json digests = InputDigests(cfg);
  CheckUpstream(cfg, digests, kPositivesDir, "gen-pos", opts, err);
  CheckUpstream(cfg, digests, kNegativesDir, "gen-neg", opts, err);
  const LoadedData data = LoadTrainVal(cfg);
  const std::unique_ptr<Tagger> tagger = MakeConfiguredTagger(cfg);
  const TagSetPartition partition = LoadPartition(cfg);
  const std::vector<TaggedExample> tagged = TagAll(data.train, *tagger);
  const int k =
      ReadJson(cfg.output_dir / kPositivesDir / "k.json").at("k").get<int>();
  const fs::path neg_path = NegativesPath(cfg, cfg.instruction);
  if (!fs::exists(neg_path)) {
    throw ConfigError("missing " + neg_path.string() + "; run `salad gen-neg --instruction " +
                      InstructionName(cfg.instruction) + "` first");
  }
  const std::vector<CounterfactualExample> negatives =
      ParseNegatives(ReadFile(neg_path), cfg.task);

  std::vector<std::string> vocab_texts = TrainTexts(data.train);
  for (const CounterfactualExample& cf : negatives) {
    vocab_texts.push_back(cf.FullText());
  }

  TrainingInputs inputs;
  inputs.train = &data.train;
  inputs.tagged = tagged;
  inputs.negatives = negatives;
  inputs.partition = &partition;
  inputs.k = k;
  inputs.unk_token = cfg.positive.unk_token;
  inputs.validation = &data.validation;

  const fs::path dir = cfg.output_dir / kTrainDir;
  std::vector<fs::path> outputs;
  for (std::uint64_t seed : cfg.training.seeds) {
    ToyEncoder encoder = NewEncoder(cfg, vocab_texts, seed);
    const std::vector<EpochMetrics> log =
        Train(inputs, cfg.loss, cfg.training, seed, encoder);
    std::string metrics;
    for (const EpochMetrics& m : log) {
      metrics += m.ToJson().dump() + "\n";
      char line[160];
      std::snprintf(line, sizeof(line),
                    "seed %llu epoch %d: ce %.4f cl %.4f total %.4f",
                    static_cast<unsigned long long>(seed), m.epoch, m.ce, m.cl,
                    m.total);
      out << line;
      if (m.val_acc) out << " val_acc " << *m.val_acc;
      out << "\n";
    }
    const fs::path metrics_path =
        dir / ("metrics-seed" + std::to_string(seed) + ".jsonl");
    WriteFileAtomic(metrics_path, metrics);
    const fs::path ckpt =
        dir / (CheckpointName(cfg.run_name, seed, cfg.training.epochs) +
               ".ckpt.json");
    WriteJson(ckpt, encoder.ToJson());
    outputs.push_back(metrics_path);
    outputs.push_back(ckpt);
  }
  WriteManifest(cfg, digests, kTrainDir, "train", outputs);
}

void CmdEval(const RunConfig& cfg, const CommandOptions& opts,
             std::ostream& out, std::ostream& err) {
  cfg.CheckPathsExist();
  if (cfg.tests.empty()) throw ConfigError("no test sets configured (paths.tests)");
  if (opts.format != "table" && opts.format != "json") {
    throw ConfigError("--format must be table or json");
  }
  const json digests = InputDigests(cfg);
  CheckUpstream(cfg, digests, kTrainDir, "train", opts, err);
  std::vector<Dataset> tests;
  std::vector<std::string> split_order;
  for (const TestSetConfig& t : cfg.tests) {
    tests.push_back(LoadDataset(t.path, cfg.task, t.split));
    split_order.push_back(t.name);
  }
  std::map<std::string, std::map<std::string, std::vector<double>>> per_seed;
  for (std::uint64_t seed : cfg.training.seeds) {
    const fs::path ckpt =
        cfg.output_dir / kTrainDir /
        (CheckpointName(cfg.run_name, seed, cfg.training.epochs) + ".ckpt.json");
    if (!fs::exists(ckpt)) {
      throw ConfigError("missing checkpoint " + ckpt.string() +
                        "; run `salad train` first");
    }
    const ToyEncoder encoder = ToyEncoder::FromJson(ReadJson(ckpt));
    for (std::size_t i = 0; i < tests.size(); ++i) {
      per_seed[cfg.run_name][split_order[i]].push_back(
          Evaluate(encoder, tests[i]));
    }
  }
  const EvalReport report = EvalReport::FromPerSeed(
      split_order, cfg.training.seeds, std::move(per_seed));
  const fs::path dir = cfg.output_dir / kEvalDir;
  const fs::path json_path = dir / "report.json";
  const fs::path table_path = dir / "report.txt";
  WriteJson(json_path, report.ToJson());
  WriteFileAtomic(table_path, report.FormatTable());
  WriteManifest(cfg, digests, kEvalDir, "eval", {json_path, table_path});
  if (opts.format == "json") {
    out << report.ToJson().dump(2) << "\n";
  } else {
    out << report.FormatTable();
  }
}

void CmdCadQuality(const RunConfig& cfg, const CommandOptions& opts,
                   std::ostream& out, std::ostream& err) {
  cfg.CheckPathsExist();
  const json digests = InputDigests(cfg);
  CheckUpstream(cfg, digests, kNegativesDir, "gen-neg", opts, err);
  const LoadedData data = LoadTrainVal(cfg);
  const fs::path dir = cfg.output_dir / kCadDir;
  std::vector<fs::path> outputs;
  out << "instruction  diversity  overlap(%)  similarity  mode\n";
  for (InstructionId id : Instructions(cfg, opts)) {
    const fs::path neg_path = NegativesPath(cfg, id);
    if (!fs::exists(neg_path)) {
      throw ConfigError("missing " + neg_path.string() +
                        "; run `salad gen-neg --instruction " +
                        InstructionName(id) + "` first");
    }
    const std::vector<CounterfactualExample> cad =
        ParseNegatives(ReadFile(neg_path), cfg.task);
    if (cad.empty()) throw DataError(neg_path.string() + " is empty");
    CadQualityReport report;
    if (cfg.cad_embedder == "pooled") {
      report = MeasureCadQuality(data.train, cad, HashingSentenceEmbedder());
    } else {
      report = MeasureCadQuality(data.train, cad, HashingTokenEmbedder());
    }
    const fs::path p = dir / ("quality-" + InstructionName(id) + ".json");
    WriteJson(p, report.ToJson());
    outputs.push_back(p);
    char line[128];
    std::snprintf(line, sizeof(line), "%-11s  %9zu  %10.2f  %10.3f  %s\n",
                  InstructionName(id).c_str(), report.diversity,
                  report.overlap_pct, report.embed_sim,
                  std::string(EmbedModeName(report.mode)).c_str());
    out << line;
  }
  WriteManifest(cfg, digests, kCadDir, "cad-quality", outputs);
}

int RunCommand(std::string_view command, const RunConfig& cfg,
               const CommandOptions& opts, std::ostream& out,
               std::ostream& err) {
  try {
    if (command == "discover-tags") {
      CmdDiscoverTags(cfg, opts, out, err);
    } else if (command == "gen-pos") {
      CmdGenPos(cfg, opts, out, err);
    } else if (command == "gen-neg") {
      CmdGenNeg(cfg, opts, out, err);
    } else if (command == "train") {
      CmdTrain(cfg, opts, out, err);
    } else if (command == "eval") {
      CmdEval(cfg, opts, out, err);
    } else if (command == "cad-quality") {
      CmdCadQuality(cfg, opts, out, err);
    } else {
      err << "error: unknown command '" << command << "'\n";
      return 2;
    }
  } catch (const ConfigError& e) {
    err << "error [" << command << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error [" << command << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

std::vector<InstructionId> ParseInstructionList(std::string_view text) {
  std::vector<InstructionId> ids;
  const std::string_view s = Trim(text);
  if (const std::size_t dots = s.find(".."); dots != std::string_view::npos) {
    const int lo = static_cast<int>(InstructionFromName(s.substr(0, dots)));
    const int hi = static_cast<int>(InstructionFromName(s.substr(dots + 2)));
    if (lo > hi) throw ConfigError("empty instruction range '" + std::string(s) + "'");
    for (int i = lo; i <= hi; ++i) ids.push_back(static_cast<InstructionId>(i));
    return ids;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    ids.push_back(InstructionFromName(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return ids;
}

void SetOverride(json& patch, std::string_view dotted_key,
                 std::string_view value) {
  json* node = &patch;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string key(dotted_key.substr(
        start, dot == std::string_view::npos ? std::string_view::npos
                                             : dot - start));
    if (key.empty()) {
      throw ConfigError("bad override key '" + std::string(dotted_key) + "'");
    }
    if (dot == std::string_view::npos) {
      json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
      (*node)[key] = parsed.is_discarded() ? json(std::string(value)) : parsed;
      return;
    }
    if (!(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace salad
