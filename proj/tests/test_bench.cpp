#include <gtest/gtest.h>

#include "support.hpp"
#include "toolrag/bench.hpp"
#include "toolrag/synthetic.hpp"

using namespace toolrag;
using testing_support::TempDir;

namespace {

struct BenchRig {
  Registry registry = testing_support::bundled_registry();
  Retriever retriever = Retriever::build(registry, {});
  LogicalClock clock;
  Executor executor{testing_support::fixture_env(), nullptr, clock};
  std::vector<Question> questions = generate_dataset(parse_dataset_shape("unit:6/4/2"), 11);

  BenchOutcome run(const std::vector<BenchSetting>& settings, const ScriptLibrary& library,
                   const std::filesystem::path& out, std::size_t workers = 1, bool resume = true,
                   std::optional<std::filesystem::path> frozen = std::nullopt) {
    AdapterFactory factory = [&library](const BenchSetting& setting, const Question& q) {
      std::vector<std::string> keys{setting.label() + ":" + q.id, q.id};
      return std::unique_ptr<LlmAdapter>(library.session(std::span<const std::string>(keys)));
    };
    BenchDeps deps{registry, &retriever, executor, factory, library.model_id()};
    BenchOptions options;
    options.settings = settings;
    options.workers = workers;
    options.out_dir = out;
    options.resume = resume;
    options.frozen_traces_dir = frozen;
    options.effective_config = {{"note", "unit"}};
    return run_bench(questions, deps, options);
  }

  ScriptLibrary script(const std::vector<BenchSetting>& settings, double fraction) {
    FunctionCall call{"interaction_checker", {{"drug_name", "warfarin"}}};
    return ScriptLibrary::parse(
        generate_oracle_script(questions, settings, PermutationSpec{}, fraction, 5, call, "oracle-model").dump());
  }
};

}  // namespace

TEST(Settings, MatrixPutsAgenticFirstAndDedups) {
  auto m = settings_matrix({SessionMode::kNoRetrieval, SessionMode::kAgentic, SessionMode::kAgentic}, {false, true});
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m[0].mode, SessionMode::kAgentic);
  EXPECT_EQ(m[1].label(), "agentic-permuted");
  EXPECT_EQ(m[3].label(), "no_retrieval-permuted");
}

TEST(Bench, PerfectOracleScoresOne) {
  BenchRig rig;
  TempDir dir;
  auto settings = settings_matrix({SessionMode::kAgentic, SessionMode::kNoRetrieval}, {false, true});
  BenchOutcome outcome = rig.run(settings, rig.script(settings, 1.0), dir.path());
  EXPECT_EQ(outcome.sessions_run, rig.questions.size() * settings.size());
  ASSERT_EQ(outcome.report.rows.size(), settings.size() * 3);
  for (const auto& row : outcome.report.rows) {
    EXPECT_EQ(row.accuracy, 1.0) << row.setting << " " << row.style;
    EXPECT_EQ(row.rel_delta, 0.0);
    EXPECT_EQ(row.model, "oracle-model");
  }
  EXPECT_EQ(outcome.report.rows[0].style, "MC");
  EXPECT_EQ(outcome.report.rows[1].style, "OEMC");
  EXPECT_EQ(outcome.report.rows[2].style, "OE");
  EXPECT_EQ(outcome.report.config["note"], "unit");
  EXPECT_TRUE(std::filesystem::exists(dir / "traces/agentic" / (rig.questions[0].id + ".jsonl")));
}

TEST(Bench, ResumeSkipsCachedQuestions) {
  BenchRig rig;
  TempDir dir;
  auto settings = settings_matrix({SessionMode::kAgentic}, {false});
  auto library = rig.script(settings, 0.5);
  BenchOutcome first = rig.run(settings, library, dir.path());
  BenchOutcome second = rig.run(settings, library, dir.path());
  EXPECT_EQ(second.sessions_run, 0u);
  EXPECT_EQ(second.resumed, rig.questions.size());
  EXPECT_EQ(second.results, first.results);
  BenchOutcome fresh = rig.run(settings, library, dir.path(), 1, false);
  EXPECT_EQ(fresh.sessions_run, rig.questions.size());
}

TEST(Bench, WorkerCountDoesNotChangeResults) {
  BenchRig rig;
  TempDir a, b;
  auto settings = settings_matrix({SessionMode::kAgentic, SessionMode::kNoRetrieval}, {false});
  auto library = rig.script(settings, 0.6);
  BenchOutcome serial = rig.run(settings, library, a.path(), 1);
  BenchOutcome parallel = rig.run(settings, library, b.path(), 4);
  EXPECT_EQ(serial.results, parallel.results);
  EXPECT_EQ(serial.report.rows, parallel.report.rows);
}

TEST(Bench, FixedRetrievalReusesAgenticContext) {
  BenchRig rig;
  TempDir dir;
  auto settings = settings_matrix({SessionMode::kAgentic, SessionMode::kFixedRetrieval}, {false});
  BenchOutcome outcome = rig.run(settings, rig.script(settings, 1.0), dir.path());
  for (const auto& r : outcome.results) {
    EXPECT_FALSE(r.unparseable) << r.setting << " " << r.question_id << " " << r.error;
  }
  AgentTrace fixed = read_trace_file(dir / "traces/fixed_retrieval" / (rig.questions[0].id + ".jsonl"));
  EXPECT_EQ(fixed.count("context"), rig.questions[0].style == QuestionStyle::kOEMC ? 2u : 1u);
  EXPECT_NE(freeze_context(fixed).find("[interaction_checker]"), std::string::npos);
}

TEST(Bench, FixedRetrievalWithoutContextSourceIsConfigError) {
  BenchRig rig;
  TempDir dir;
  auto settings = settings_matrix({SessionMode::kFixedRetrieval}, {false});
  try {
    rig.run(settings, rig.script(settings, 1.0), dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(Bench, MissingFrozenContextIsUnparseable) {
  BenchRig rig;
  TempDir dir, frozen;
  auto settings = settings_matrix({SessionMode::kFixedRetrieval}, {false});
  BenchOutcome outcome = rig.run(settings, rig.script(settings, 1.0), dir.path(), 1, true, frozen.path());
  for (const auto& r : outcome.results) {
    EXPECT_TRUE(r.unparseable);
    EXPECT_FALSE(r.error.empty());
  }
}

TEST(Bench, ExhaustedScriptMarksUnparseable) {
  BenchRig rig;
  TempDir dir;
  auto settings = settings_matrix({SessionMode::kAgentic}, {false});
  BenchOutcome outcome = rig.run(settings, ScriptLibrary::parse("[]"), dir.path());
  for (const auto& r : outcome.results) EXPECT_TRUE(r.unparseable);
  for (const auto& row : outcome.report.rows) EXPECT_EQ(row.unparseable, row.n);
}

TEST(Bench, EmptySettingsIsConfigError) {
  BenchRig rig;
  TempDir dir;
  try {
    rig.run({}, ScriptLibrary::parse("[]"), dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(Bench, PermutedAccuracyTracksScript) {
  BenchRig rig;
  TempDir dir;
  auto settings = settings_matrix({SessionMode::kNoRetrieval}, {false, true});
  BenchOutcome outcome = rig.run(settings, rig.script(settings, 0.0), dir.path());
  for (const auto& row : outcome.report.rows) {
    if (row.style != "OE") {
      EXPECT_EQ(row.accuracy, 0.0) << row.setting;
    }
  }
}

TEST(QuestionResult, JsonRoundTrip) {
  QuestionResult r{"q", "agentic", QuestionStyle::kOEMC, "raw", "B", false, true, "", 3};
  EXPECT_EQ(QuestionResult::from_json(r.to_json()), r);
}
