#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "toolrag/error.hpp"
#include "toolrag/report.hpp"

using namespace toolrag;

namespace {

ReportRow row(std::string setting, double accuracy, std::size_t n = 10) {
  return {"m", std::move(setting), "MC", false, n, accuracy, 0.0, 0};
}

}  // namespace

TEST(Deltas, BestRowIsZeroOthersNegative) {
  std::vector<ReportRow> rows{row("agentic", 0.8), row("no_retrieval", 0.6)};
  compute_deltas(rows);
  EXPECT_EQ(rows[0].rel_delta, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].rel_delta, -0.25);
}

TEST(Deltas, MatchOracleOnRandomRows) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ReportRow> rows;
    std::vector<double> acc;
    std::size_t n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      acc.push_back(static_cast<double>(rng() % 101) / 100.0);
      rows.push_back(row("s" + std::to_string(i), acc.back()));
    }
    compute_deltas(rows);
    auto expected = oracle::rel_deltas(acc);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_DOUBLE_EQ(rows[i].rel_delta, expected[i]);
      EXPECT_LE(rows[i].rel_delta, 0.0);
    }
  }
}

TEST(Deltas, AllZeroAccuracy) {
  std::vector<ReportRow> rows{row("a", 0.0), row("b", 0.0)};
  compute_deltas(rows);
  EXPECT_EQ(rows[0].rel_delta, 0.0);
  EXPECT_EQ(rows[1].rel_delta, 0.0);
}

TEST(Csv, RoundTripIsExact) {
  std::vector<ReportRow> rows{row("agentic", 1.0 / 3.0), row("fixed_retrieval, \"quoted\"", 0.1)};
  rows[1].permuted = true;
  rows[1].unparseable = 2;
  compute_deltas(rows);
  std::string csv = report_to_csv(rows);
  EXPECT_EQ(csv.substr(0, kReportCsvHeader.size()), kReportCsvHeader);
  EXPECT_EQ(parse_report_csv(csv), rows);
}

TEST(Csv, RetrievalRoundTrip) {
  std::vector<RetrievalRow> rows{{"bm25", 10, 100, 0.97, 0.8125}, {"dense-hash", 5, 100, 1.0, 1.0}};
  EXPECT_EQ(parse_retrieval_csv(retrieval_to_csv(rows)), rows);
}

TEST(Csv, RecordsHandleQuotesAndNewlines) {
  auto records = parse_csv_records("a,\"b,c\",\"d\"\"e\"\r\n\"multi\nline\",x\n");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(records[1][0], "multi\nline");
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
}

TEST(Csv, BadHeaderIsSchemaError) {
  try {
    parse_report_csv("wrong,header\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
  }
}

TEST(Report, JsonRoundTripKeepsConfig) {
  EvalReport report;
  report.rows = {row("agentic", 0.5)};
  report.retrieval = {{"bm25", 10, 4, 0.75, 0.5}};
  report.config = {{"k", 10}, {"retriever", "bm25"}};
  EXPECT_EQ(report_from_json(to_json(report)), report);
}

TEST(Report, EmitWritesFiles) {
  testing_support::TempDir dir;
  EvalReport report;
  report.rows = {row("agentic", 0.5)};
  report.config = {{"seed", 7}};
  ReportFiles files = emit_report(report, dir.path());
  EXPECT_TRUE(std::filesystem::exists(files.csv));
  EXPECT_TRUE(std::filesystem::exists(files.json));
  EXPECT_TRUE(files.retrieval_csv.empty());
  EXPECT_EQ(testing_support::read_file(files.csv).find("seed"), std::string::npos);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(testing_support::read_file(files.json))), report);
  EXPECT_THROW(emit_report(EvalReport{}, dir.path()), Error);
}

TEST(RetrievalMetrics, RecallAndMrr) {
  std::map<std::string, RankedTools> rankings;
  rankings["q1"].entries = {{"a", 3}, {"b", 2}, {"c", 1}};
  rankings["q2"].entries = {{"c", 3}, {"a", 2}, {"b", 1}};
  rankings["q3"].entries = {{"x", 1}};
  GoldTools gold{{"q1", {"a"}}, {"q2", {"b"}}, {"q3", {}}};
  RetrievalRow at3 = retrieval_metrics(rankings, gold, 3, "bm25");
  EXPECT_EQ(at3.n, 2u);
  EXPECT_DOUBLE_EQ(at3.recall, 1.0);
  EXPECT_DOUBLE_EQ(at3.mrr, (1.0 + 1.0 / 3.0) / 2.0);
  RetrievalRow at1 = retrieval_metrics(rankings, gold, 1, "bm25");
  EXPECT_DOUBLE_EQ(at1.recall, 0.5);
  EXPECT_THROW(retrieval_metrics(rankings, GoldTools{{"q3", {}}}, 3, "bm25"), Error);
}

TEST(RetrievalMetrics, FromTracesUsesFirstRetrievalStep) {
  RankedTools first;
  first.entries = {{"gold_tool", 1}};
  RankedTools second;
  second.entries = {{"other", 1}};
  AgentTrace trace{"s", "q", {{RetrievalStep{first}, 1}, {RetrievalStep{second}, 2}}};
  RetrievalRow r = retrieval_recall_at_k({trace}, {{"q", {"gold_tool"}}}, 1);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  AgentTrace none{"s", "q", {{TerminationStep{}, 1}}};
  try {
    retrieval_recall_at_k({none}, {{"q", {"gold_tool"}}}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoRetrievalSteps);
  }
}

TEST(Report, ShippedCsvsMatchSchema) {
  auto reports = testing_support::data_dir() / "reports";
  auto rows = parse_report_csv(testing_support::read_file(reports / "report.csv"));
  EXPECT_FALSE(rows.empty());
  for (const char* name : {"lexical_retrieval.csv", "paraphrase_retrieval.csv"}) {
    EXPECT_FALSE(parse_retrieval_csv(testing_support::read_file(reports / name)).empty()) << name;
  }
}
