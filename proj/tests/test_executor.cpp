#include <gtest/gtest.h>

#include "support.hpp"
#include "toolrag/executor.hpp"

using namespace toolrag;
using testing_support::FakeTransport;
using testing_support::fixture_env;
using testing_support::TempDir;

namespace {

struct Harness {
  Registry registry = testing_support::bundled_registry();
  LogicalClock clock;
  Executor executor;

  explicit Harness(ExecutionEnv env = fixture_env(), std::shared_ptr<Transport> network = nullptr)
      : executor(std::move(env), std::move(network), clock) {}

  ToolOutcome run(const std::string& tool, nlohmann::json args) {
    CallCheck check = validate_call(registry, {tool, std::move(args)});
    EXPECT_TRUE(check.ok()) << check.error_text;
    return executor.execute(registry.at(tool), *check.call);
  }
};

}  // namespace

TEST(Executor, FixtureBinding) {
  Harness h;
  ToolOutcome outcome = h.run("interaction_checker", {{"drug_name", "warfarin"}});
  EXPECT_EQ(outcome.status, OutcomeStatus::kOk);
  EXPECT_NE(outcome.payload.find("amiodarone"), std::string::npos);
  EXPECT_EQ(outcome.payload_bytes, outcome.payload.size());
  EXPECT_FALSE(outcome.fingerprint.empty());
}

TEST(Executor, MissingFixtureIsExecutionError) {
  Harness h;
  ToolOutcome outcome = h.run("pharmacogenomic_markers", {{"drug_name", "metformin"}});
  EXPECT_EQ(outcome.status, OutcomeStatus::kExecutionError);
  EXPECT_NE(outcome.payload.find("NotFound"), std::string::npos);
}

TEST(Executor, FixturePathCannotEscapeRoot) {
  Harness h;
  ToolOutcome outcome = h.run("interaction_checker", {{"drug_name", "../../registry"}});
  EXPECT_EQ(outcome.status, OutcomeStatus::kExecutionError);
  EXPECT_NE(outcome.payload.find("escapes"), std::string::npos);
}

TEST(Executor, HttpBindingExtractsPointer) {
  Harness h;
  ToolOutcome outcome = h.run("fda_boxed_warning", {{"drug_name", "warfarin"}});
  ASSERT_EQ(outcome.status, OutcomeStatus::kOk) << outcome.payload;
  EXPECT_NE(outcome.payload.find("BLEEDING"), std::string::npos);
  EXPECT_EQ(h.executor.upstream_calls(), 0u);
}

TEST(Executor, OpenFdaFieldOnlyReturnsRequestedField) {
  Harness h;
  ToolOutcome boxed = h.run("openfda_label_field", {{"drug_name", "Coumadin"}, {"field", "boxed_warning"}});
  ASSERT_EQ(boxed.status, OutcomeStatus::kOk) << boxed.payload;
  ToolOutcome interactions =
      h.run("openfda_label_field", {{"drug_name", "Coumadin"}, {"field", "drug_interactions"}});
  ASSERT_EQ(interactions.status, OutcomeStatus::kOk) << interactions.payload;
  EXPECT_NE(boxed.payload, interactions.payload);
  EXPECT_EQ(boxed.payload.find("CYP2C9"), std::string::npos);
}

TEST(Executor, OpenFdaNotFoundAndUnknownField) {
  Harness h;
  ToolOutcome missing = h.run("openfda_label_field", {{"drug_name", "Zzqx"}, {"field", "boxed_warning"}});
  EXPECT_EQ(missing.status, OutcomeStatus::kExecutionError);
  EXPECT_NE(missing.payload.find("NotFound"), std::string::npos);
  try {
    h.executor.openfda_label_field("x", "not_a_field");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownField);
  }
}

TEST(Executor, DailyMedPicksNewestExactLabel) {
  Harness h;
  DailyMedResult result = h.executor.dailymed_lookup("warfarin");
  EXPECT_TRUE(result.document.valid());
  EXPECT_EQ(result.document.set_id, "5e0f0a10-0000-4000-8000-00000000a102");
  EXPECT_EQ(result.document.version, 12);
  EXPECT_TRUE(result.ambiguous);
  bool has_warning = false;
  for (const auto& s : result.document.sections) has_warning |= s.title.find("WARNING") != std::string::npos;
  EXPECT_TRUE(has_warning);
}

TEST(Executor, DailyMedErrors) {
  Harness h;
  for (const char* name : {"zzqx", "   ", "notcaptured"}) {
    try {
      h.executor.dailymed_lookup(name);
      FAIL() << name;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kNotFound || e.code() == ErrorCode::kPrecondition) << e.what();
    }
  }
}

TEST(Executor, LiveModeCachesWithinTtl) {
  auto network = std::make_shared<FakeTransport>();
  network->serve_fixtures(testing_support::data_dir() / "fixtures" / "http");
  ExecutionEnv env = fixture_env();
  env.mode = FetchMode::kLive;
  env.cache_ttl_ms = 5;
  Harness h(env, network);
  EXPECT_EQ(h.run("rxnorm_concept_id", {{"drug_name", "warfarin"}}).status, OutcomeStatus::kOk);
  EXPECT_EQ(h.run("rxnorm_concept_id", {{"drug_name", "warfarin"}}).status, OutcomeStatus::kOk);
  EXPECT_EQ(network->calls(), 1u);
  for (int i = 0; i < 10; ++i) h.clock.now_ms();
  h.run("rxnorm_concept_id", {{"drug_name", "warfarin"}});
  EXPECT_EQ(network->calls(), 2u);
  EXPECT_EQ(h.executor.upstream_calls(), 2u);
}

TEST(Executor, RecordModeWritesFixtures) {
  TempDir dir;
  auto network = std::make_shared<FakeTransport>();
  network->serve_fixtures(testing_support::data_dir() / "fixtures" / "http");
  ExecutionEnv env = fixture_env();
  env.mode = FetchMode::kRecord;
  env.http_fixture_dir = dir.path();
  Harness h(env, network);
  EXPECT_EQ(h.run("dailymed_get_spl", {{"drug_name", "warfarin"}}).status, OutcomeStatus::kOk);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 2u);
}

TEST(Executor, FixturesOnlyMissIsExecutionError) {
  Harness h;
  ToolOutcome outcome = h.run("rxnorm_concept_id", {{"drug_name", "metformin"}});
  EXPECT_EQ(outcome.status, OutcomeStatus::kExecutionError);
  EXPECT_NE(outcome.payload.find("fixture missing"), std::string::npos);
  EXPECT_EQ(h.executor.upstream_calls(), 0u);
}

TEST(Executor, UnknownBuiltinIsExecutionError) {
  Harness h;
  ToolSpec spec = testing_support::make_tool("ghost", "Ghost tool.");
  spec.binding = BuiltinBinding{"no.such.handler"};
  ValidatedCall call{"ghost", {{"drug_name", "x"}}, "fp"};
  EXPECT_EQ(h.executor.execute(spec, call).status, OutcomeStatus::kExecutionError);
}

TEST(Executor, ExpandTemplate) {
  nlohmann::json args{{"drug_name", "a b"}, {"n", 3}};
  EXPECT_EQ(expand_template("x/{drug_name}/{n}/{missing}", args, true), "x/a%20b/3/");
  EXPECT_EQ(expand_template("{drug_name}.txt", args, false), "a b.txt");
  EXPECT_THROW(expand_template("{oops", args, false), Error);
}

TEST(Executor, ApiKeyPresenceNeverStoresValues) {
  ExecutionEnv env;
  env.openfda_api_key_env = "TOOLRAG_TEST_ABSENT_KEY";
  auto presence = env.api_key_presence();
  ASSERT_EQ(presence.count("TOOLRAG_TEST_ABSENT_KEY"), 1u);
  EXPECT_FALSE(presence.at("TOOLRAG_TEST_ABSENT_KEY"));
}

TEST(ToolOutcome, JsonRoundTrip) {
  ToolOutcome outcome{OutcomeStatus::kCached, "payload", 3, "abc", 7, true};
  EXPECT_EQ(ToolOutcome::from_json(outcome.to_json()), outcome);
}
