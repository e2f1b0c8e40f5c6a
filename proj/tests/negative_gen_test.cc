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

#include "salad/negative_gen.h"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "gtest/gtest.h"
#include "httplib.h"
#include "salad/common.h"
#include "salad/completion_client.h"
#include "test_util.h"

namespace salad {
namespace {

using T = UniversalTag;

const char kAntonyms[] =
    "long\tshort\nboring\texciting\nblasphemous\tdelightful\n"
    "never\talways\nglad\thappy\nending\tbeginning\ngood\tbad\n";

int Nli(std::string_view label) { return *Task::Nli().LabelIndex(label); }

// Counts calls and can be told to fail or stall.
class FakeClient : public CompletionClient {
 public:
  explicit FakeClient(std::function<std::string(const CompletionRequest&, int)> fn)
      : fn_(std::move(fn)) {}
  std::string Complete(const CompletionRequest& request) override {
    const int n = ++calls_;
    return fn_(request, n);
  }
  Provenance provenance() const override { return Provenance::kStub; }
  int calls() const { return calls_; }

 private:
  std::function<std::string(const CompletionRequest&, int)> fn_;
  std::atomic<int> calls_{0};
};

GenerationConfig FastConfig() {
  GenerationConfig cfg;
  cfg.initial_backoff_ms = 1;
  return cfg;
}

TEST(FlipLabelTest, SentimentAndSexismSwap) {
  EXPECT_EQ(FlipLabel(Task::Sentiment(), *Task::Sentiment().LabelIndex("positive")),
            *Task::Sentiment().LabelIndex("negative"));
  EXPECT_EQ(FlipLabel(Task::Sexism(), 0), 1);
}

TEST(FlipLabelTest, NeutralHasNoFlip) {
  EXPECT_FALSE(FlipLabel(Task::Nli(), Nli("neutral")).has_value());
  EXPECT_EQ(FlipLabel(Task::Nli(), Nli("entailment")), Nli("contradiction"));
}

TEST(FlipLabelTest, Involution) {
  for (const Task& task : {Task::Sentiment(), Task::Sexism(), Task::Nli()}) {
    for (int label = 0; label < static_cast<int>(task.num_labels()); ++label) {
      if (auto f = FlipLabel(task, label)) {
        EXPECT_EQ(FlipLabel(task, *f), label);
        EXPECT_NE(*f, label);
      }
    }
  }
}

TEST(InstructionTest, NamesParse) {
  EXPECT_EQ(InstructionFromName("4"), InstructionId::kI4);
  EXPECT_EQ(InstructionFromName("I2"), InstructionId::kI2);
  EXPECT_EQ(InstructionName(InstructionId::kI3), "I3");
  EXPECT_THROW(InstructionFromName("I5"), ConfigError);
}

LabeledExample Review() {
  return testing::MakeExample(
      "r1",
      "Long, boring, blasphemous. Never have I been so glad to see ending "
      "credits roll.",
      0);
}

TEST(RenderPromptTest, InstructionOneAsksForTheOtherLabel) {
  const LabeledExample ex = testing::MakeExample("p", "A great film.", 1);
  const std::string prompt = RenderPrompt(
      PromptTemplate::For(InstructionId::kI1, Task::Sentiment(), 1), ex, {});
  EXPECT_EQ(prompt,
            "Please make it a negative sentence.\nSentence: A great film.\n");
}

TEST(RenderPromptTest, InstructionFourListsCausalWords) {
  const LabeledExample ex = testing::MakeExample("p", "I was so glad.", 1);
  const auto tpl = PromptTemplate::For(InstructionId::kI4, Task::Sentiment(), 1);
  const std::string prompt = RenderPrompt(tpl, ex, {"boring", "glad"});
  EXPECT_EQ(prompt,
            "The following sentence is a positive sentence in sentiment "
            "analysis. Just change a few words among causal words in the "
            "sentence to make it a negative sentence while preserving the "
            "original text as much as possible. Causal Words: boring, glad\n"
            "Sentence: I was so glad.\n");
  EXPECT_EQ(RenderPrompt(tpl, ex, {"boring", "glad"}), prompt);
}

TEST(RenderPromptTest, InstructionFourWithoutWordsIsConfigError) {
  const auto tpl = PromptTemplate::For(InstructionId::kI4, Task::Sentiment(), 1);
  EXPECT_THROW(RenderPrompt(tpl, Review(), {}), ConfigError);
}

TEST(RenderPromptTest, MiddleInstructions) {
  const auto i2 = RenderPrompt(
      PromptTemplate::For(InstructionId::kI2, Task::Sexism(), 1), Review(), {});
  EXPECT_EQ(i2.rfind("The following sentence is a sexist sentence in sexism "
                     "classification. Please make it a non-sexist sentence.", 0),
            0u)
      << i2;
  const auto i3 = RenderPrompt(
      PromptTemplate::For(InstructionId::kI3, Task::Sentiment(), 0), Review(), {});
  EXPECT_NE(i3.find("Just change a few words to make it a positive sentence "
                    "while preserving the original text as much as possible."),
            std::string::npos)
      << i3;
}

TEST(RenderPromptTest, PairPromptEditsHypothesis) {
  const LabeledExample ex =
      testing::MakeExample("n", "A man sleeps.", Nli("entailment"), "A man rests.");
  const std::string prompt = RenderPrompt(
      PromptTemplate::For(InstructionId::kI4, Task::Nli(), Nli("entailment")), ex,
      {"rests"});
  EXPECT_NE(prompt.find("Premise: A man sleeps.\n"), std::string::npos);
  EXPECT_NE(prompt.find("Hypothesis: A man rests.\n"), std::string::npos);
  EXPECT_NE(prompt.find("contradiction"), std::string::npos);
  const PromptParts parts = ParsePrompt(prompt);
  EXPECT_EQ(parts.target, "A man rests.");
  EXPECT_EQ(parts.causal_words, (std::vector<std::string>{"rests"}));
}

TEST(ParsePromptTest, RecoversSentenceAndWords) {
  const auto tpl = PromptTemplate::For(InstructionId::kI4, Task::Sentiment(), 0);
  const PromptParts parts =
      ParsePrompt(RenderPrompt(tpl, Review(), {"long", "boring"}));
  EXPECT_EQ(parts.target, Review().text_a);
  EXPECT_EQ(parts.causal_words, (std::vector<std::string>{"long", "boring"}));
}

TEST(ExtractCausalWordsTest, AdjectivesOfTheReview) {
  const TaggedExample t = Tag(testing::MakeExample("x", "Long, boring, blasphemous.", 0),
                              testing::ToyTagger());
  EXPECT_EQ(ExtractCausalWords(t, testing::ContentWordPartition()),
            (std::vector<std::string>{"long", "boring", "blasphemous"}));
}

TEST(ExtractCausalWordsTest, FunctionWordsOnlyGiveNothing) {
  const TaggedExample t =
      Tag(testing::MakeExample("x", "the of a to", 0), testing::ToyTagger());
  EXPECT_TRUE(ExtractCausalWords(t, testing::ContentWordPartition()).empty());
}

TEST(ExtractCausalWordsTest, RepeatsAppearOnce) {
  const TaggedExample t = Tag(
      testing::MakeExample("x", "boring plot , boring film , boring", 0),
      testing::ToyTagger());
  EXPECT_EQ(ExtractCausalWords(t, testing::ContentWordPartition()),
            (std::vector<std::string>{"boring", "plot", "film"}));
}

TEST(CleanResponseTest, StripsWrappers) {
  EXPECT_EQ(CleanResponse("  \"A fine film.\"  "), "A fine film.");
  EXPECT_EQ(CleanResponse("Sentence: A fine film."), "A fine film.");
  EXPECT_EQ(CleanResponse("Here is the revised sentence:\nA fine film."),
            "A fine film.");
  EXPECT_EQ(CleanResponse("```\nA fine film.\n```"), "A fine film.");
  EXPECT_EQ(CleanResponse("   "), "");
}

TEST(StubClientTest, FlipsOnlyListedCausalWords) {
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  const auto tpl = PromptTemplate::For(InstructionId::kI4, Task::Sentiment(), 0);
  const std::string out = stub.Complete(
      {"stub", RenderPrompt(tpl, Review(), {"long", "boring", "blasphemous", "glad"}),
       0.1, 1.0});
  EXPECT_EQ(out,
            "short , exciting , delightful . never have i been so happy to see "
            "ending credits roll .");
}

TEST(StubClientTest, WithoutWordListFlipsEveryTableWord) {
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  const auto tpl = PromptTemplate::For(InstructionId::kI1, Task::Sentiment(), 0);
  const std::string out = stub.Complete({"stub", RenderPrompt(tpl, Review(), {}), 0.1, 1.0});
  EXPECT_EQ(out,
            "short , exciting , delightful . always have i been so happy to "
            "see beginning credits roll .");
  // The table is symmetric.
  const std::string back = stub.Complete(
      {"stub", RenderPrompt(tpl, testing::MakeExample("y", out, 1), {}), 0.1, 1.0});
  EXPECT_EQ(back, Detokenize(Tokenize(Review().text_a)));
}

TEST(GenerateNegativeTest, FlipsLabelAndRecordsProvenance) {
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  const auto tpl = PromptTemplate::For(InstructionId::kI4, Task::Sentiment(), 0);
  const CounterfactualExample cf =
      GenerateNegative(Review(), tpl, {"boring"}, FastConfig(), stub, nullptr);
  EXPECT_EQ(cf.label, 1);
  EXPECT_EQ(cf.source_id, "r1");
  EXPECT_EQ(cf.provenance, Provenance::kStub);
  EXPECT_NE(cf.text.find("exciting"), std::string::npos);
  EXPECT_EQ(cf.raw_response_hash.size(), 64u);
}

TEST(GenerateNegativeTest, RetriesTransientFailures) {
  FakeClient client([](const CompletionRequest&, int n) -> std::string {
    if (n < 3) throw TransientError("rate limited");
    return "A dull film.";
  });
  const auto tpl = PromptTemplate::For(InstructionId::kI1, Task::Sentiment(), 1);
  const auto cf = GenerateNegative(testing::MakeExample("a", "A fine film.", 1),
                                   tpl, {}, FastConfig(), client, nullptr);
  EXPECT_EQ(cf.text, "A dull film.");
  EXPECT_EQ(client.calls(), 3);
}

TEST(GenerateNegativeTest, ExhaustedRetriesIsGenerationError) {
  FakeClient client([](const CompletionRequest&, int) -> std::string {
    throw TransientError("down");
  });
  GenerationConfig cfg = FastConfig();
  cfg.max_retries = 2;
  const auto tpl = PromptTemplate::For(InstructionId::kI1, Task::Sentiment(), 1);
  EXPECT_THROW(GenerateNegative(testing::MakeExample("a", "x", 1), tpl, {}, cfg,
                                client, nullptr),
               GenerationError);
  EXPECT_EQ(client.calls(), 3);
}

TEST(GenerateNegativeTest, BlankResponseIsGenerationError) {
  FakeClient client([](const CompletionRequest&, int) { return std::string(" \n"); });
  const auto tpl = PromptTemplate::For(InstructionId::kI1, Task::Sentiment(), 1);
  EXPECT_THROW(GenerateNegative(testing::MakeExample("a", "x", 1), tpl, {},
                                FastConfig(), client, nullptr),
               GenerationError);
}

TEST(GenerateNegativeTest, PairKeepsPremise) {
  FakeClient client([](const CompletionRequest&, int) { return std::string("A man runs."); });
  const auto tpl =
      PromptTemplate::For(InstructionId::kI3, Task::Nli(), Nli("entailment"));
  const auto cf = GenerateNegative(
      testing::MakeExample("n", "A man sleeps.", Nli("entailment"), "A man rests."),
      tpl, {}, FastConfig(), client, nullptr);
  EXPECT_EQ(cf.text, "A man sleeps.");
  EXPECT_EQ(cf.text_b, "A man runs.");
  EXPECT_EQ(cf.label, Nli("contradiction"));
}

Dataset SentimentSet(int n) {
  std::vector<LabeledExample> examples;
  for (int i = 0; i < n; ++i) {
    examples.push_back(testing::MakeExample(
        "s" + std::to_string(i),
        i % 2 ? "a good film number " + std::to_string(i)
              : "a bad plot number " + std::to_string(i),
        i % 2));
  }
  return testing::MakeDataset(Task::Sentiment(), examples);
}

std::vector<TaggedExample> TagAll(const Dataset& ds) {
  std::vector<TaggedExample> out;
  for (const auto& ex : ds.examples) out.push_back(Tag(ex, testing::ToyTagger()));
  return out;
}

TEST(GenerateNegativesTest, AllSentimentExamplesEligible) {
  const Dataset ds = SentimentSet(10);
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  const auto r = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                   InstructionId::kI4, FastConfig(), stub);
  EXPECT_EQ(r.negatives.size(), 10u);
  EXPECT_TRUE(r.skipped.empty());
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(r.negatives[i].source_id, ds.examples[i].id);
    EXPECT_EQ(r.negatives[i].label, 1 - ds.examples[i].label);
  }
}

TEST(GenerateNegativesTest, NeutralPairsAreSkipped) {
  std::vector<LabeledExample> examples;
  const char* labels[] = {"entailment", "neutral", "contradiction"};
  for (int i = 0; i < 9; ++i) {
    examples.push_back(testing::MakeExample("n" + std::to_string(i), "the movie rocks",
                                            Nli(labels[i % 3]),
                                            "it was good " + std::to_string(i)));
  }
  const Dataset ds = testing::MakeDataset(Task::Nli(), examples);
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  const auto r = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                   InstructionId::kI4, FastConfig(), stub);
  EXPECT_EQ(r.negatives.size(), 6u);
  EXPECT_EQ(r.skipped.size(), 3u);
  EXPECT_EQ(r.ManifestJson().at("skipped").size(), 3u);
}

TEST(GenerateNegativesTest, WarmCacheMakesNoCalls) {
  testing::TempDir dir("cache");
  const Dataset ds = SentimentSet(6);
  GenerationConfig cfg = FastConfig();
  cfg.cache_dir = dir.path();
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  FakeClient counting([&](const CompletionRequest& r, int) { return stub.Complete(r); });
  const auto first = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                       InstructionId::kI4, cfg, counting);
  EXPECT_EQ(counting.calls(), 6);
  const auto second = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                        InstructionId::kI4, cfg, counting);
  EXPECT_EQ(counting.calls(), 6);
  EXPECT_EQ(second.stats.cache_hits, 6u);
  EXPECT_EQ(second.stats.client_calls, 0u);
  EXPECT_EQ(SerializeNegatives(first.negatives, ds.task),
            SerializeNegatives(second.negatives, ds.task));
}

TEST(GenerateNegativesTest, CacheKeyDistinguishesSettings) {
  GenerationConfig a = FastConfig();
  GenerationConfig b = a;
  b.temperature = 0.7;
  EXPECT_NE(ResponseCache::Key("x", InstructionId::kI4, a),
            ResponseCache::Key("x", InstructionId::kI4, b));
  EXPECT_NE(ResponseCache::Key("x", InstructionId::kI4, a),
            ResponseCache::Key("x", InstructionId::kI3, a));
}

TEST(GenerateNegativesTest, OutputOrderIgnoresCompletionOrder) {
  const Dataset ds = SentimentSet(12);
  GenerationConfig cfg = FastConfig();
  cfg.concurrency_limit = 4;
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  std::mutex mu;
  FakeClient slow([&](const CompletionRequest& r, int n) {
    std::this_thread::sleep_for(std::chrono::milliseconds((n * 7) % 13));
    std::lock_guard lock(mu);
    return stub.Complete(r);
  });
  const auto r = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                   InstructionId::kI4, cfg, slow);
  ASSERT_EQ(r.negatives.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(r.negatives[i].source_id, ds.examples[i].id);
  }
}

TEST(GenerateNegativesTest, FailureCeiling) {
  const Dataset ds = SentimentSet(10);
  FakeClient flaky([](const CompletionRequest& r, int) -> std::string {
    if (r.prompt.find("number 3") != std::string::npos) return "";
    return "fine";
  });
  GenerationConfig cfg = FastConfig();
  cfg.concurrency_limit = 1;
  EXPECT_THROW(GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                 InstructionId::kI1, cfg, flaky),
               GenerationError);
  cfg.max_failure_rate = 0.2;
  const auto r = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                   InstructionId::kI1, cfg, flaky);
  EXPECT_EQ(r.negatives.size(), 9u);
  ASSERT_EQ(r.failed.size(), 1u);
  EXPECT_EQ(r.failed[0].source_id, "s3");
}

TEST(SerializeNegativesTest, RoundTrip) {
  const Dataset ds = SentimentSet(4);
  StubCompletionClient stub = StubCompletionClient::FromTsv(kAntonyms);
  const auto r = GenerateNegatives(ds, TagAll(ds), testing::ContentWordPartition(),
                                   InstructionId::kI2, FastConfig(), stub);
  const std::string text = SerializeNegatives(r.negatives, ds.task);
  const auto back = ParseNegatives(text, ds.task);
  EXPECT_EQ(SerializeNegatives(back, ds.task), text);
  EXPECT_EQ(back[0].instruction, InstructionId::kI2);
  EXPECT_EQ(back[0].provenance, Provenance::kStub);
}

// Local server that mimics the chat completions endpoint.
class ChatServer {
 public:
  ChatServer() {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   last_body = req.body;
                   last_auth = req.get_header_value("Authorization");
                   res.status = status;
                   res.set_content(reply, "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  int status = 200;
  std::string reply;
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpClientTest, SendsChatRequestAndReadsContent) {
  ChatServer server;
  server.reply = R"({"choices":[{"message":{"role":"assistant","content":"A dull film."}}]})";
  HttpCompletionClient client(server.base(), "secret", std::chrono::seconds(5));
  EXPECT_EQ(client.Complete({"gpt-4o-mini", "Please make it a negative sentence.", 0.1, 1.0}),
            "A dull film.");
  const auto body = nlohmann::json::parse(server.last_body);
  EXPECT_EQ(body.at("model"), "gpt-4o-mini");
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(body.at("top_p").get<double>(), 1.0);
  EXPECT_EQ(body.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(server.last_auth, "Bearer secret");
}

TEST(HttpClientTest, RateLimitIsTransient) {
  ChatServer server;
  server.status = 429;
  HttpCompletionClient client(server.base(), "k", std::chrono::seconds(5));
  EXPECT_THROW(client.Complete({"m", "p", 0.1, 1.0}), TransientError);
  server.status = 503;
  EXPECT_THROW(client.Complete({"m", "p", 0.1, 1.0}), TransientError);
}

TEST(HttpClientTest, ClientErrorIsPermanent) {
  ChatServer server;
  server.status = 400;
  server.reply = R"({"error":"bad request"})";
  HttpCompletionClient client(server.base(), "k", std::chrono::seconds(5));
  try {
    client.Complete({"m", "p", 0.1, 1.0});
    FAIL() << "expected an error";
  } catch (const TransientError&) {
    FAIL() << "400 must not be retried";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("400"), std::string::npos);
  }
}

TEST(HttpClientTest, UnreachableServerIsTransient) {
  HttpCompletionClient client("http://127.0.0.1:1/v1", "k", std::chrono::seconds(2));
  EXPECT_THROW(client.Complete({"m", "p", 0.1, 1.0}), TransientError);
}

TEST(HttpClientTest, MalformedBodyIsError) {
  EXPECT_THROW(HttpCompletionClient::ParseResponseBody("{\"choices\": []}"), Error);
}

}  // namespace
}  // namespace salad
