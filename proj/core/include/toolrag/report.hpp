#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/retrieval.hpp"
#include "toolrag/trace.hpp"

namespace toolrag {

/// One (model, setting, style, permuted) cell. 0 <= accuracy <= 1 and
/// rel_delta = (accuracy - max accuracy) / max accuracy, stored as a fraction.
struct ReportRow {
  std::string model;
  std::string setting;
  std::string style;
  bool permuted = false;
  std::size_t n = 0;
  double accuracy = 0.0;
  double rel_delta = 0.0;
  std::size_t unparseable = 0;

  bool operator==(const ReportRow&) const = default;
};

struct RetrievalRow {
  std::string backend;
  std::size_t k = 10;
  std::size_t n = 0;
  double recall = 0.0;
  double mrr = 0.0;

  bool operator==(const RetrievalRow&) const = default;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<RetrievalRow> retrieval;
  nlohmann::json config = nlohmann::json::object();  // effective configuration, JSON form only

  bool operator==(const EvalReport&) const = default;
};

/// Recomputes rel_delta against the max-accuracy row. The arg-max row gets
/// exactly 0 and all others <= 0; a zero maximum makes every delta 0.
void compute_deltas(std::vector<ReportRow>& rows);

inline constexpr std::string_view kReportCsvHeader = "model,setting,style,permuted,n,accuracy,rel_delta,unparseable";
inline constexpr std::string_view kRetrievalCsvHeader = "backend,k,n,recall,mrr";

/// RFC 4180 CSV with the fixed column order above. Doubles are written in
/// shortest round-trip form so parsing restores them exactly.
std::string report_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(std::string_view csv);  // throws ParseError, SchemaError
std::string retrieval_to_csv(const std::vector<RetrievalRow>& rows);
std::vector<RetrievalRow> parse_retrieval_csv(std::string_view csv);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& node);

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::filesystem::path retrieval_csv;  // empty when there are no retrieval rows
};

/// Writes <stem>.csv and <stem>.json (plus <stem>_retrieval.csv) under `dir`.
/// Throws Precondition for an empty report and IoError on write failure.
ReportFiles emit_report(const EvalReport& report, const std::filesystem::path& dir, std::string_view stem = "report");

/// Splits RFC 4180 records; quoted fields may hold commas, quotes, newlines.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view csv);
std::string csv_escape(std::string_view field);

using GoldTools = std::map<std::string, std::set<std::string>>;  // query id -> gold tool names

/// recall@k = share of queries with a gold tool in the top k; MRR counts
/// 1/rank within the top k and 0 otherwise. Queries without gold tools are
/// skipped. Throws Precondition when nothing is annotated.
RetrievalRow retrieval_metrics(const std::map<std::string, RankedTools>& rankings, const GoldTools& gold,
                               std::size_t k, std::string backend);

/// Same metric over the first Retrieval step of each trace. Throws
/// NoRetrievalSteps for an annotated trace without one.
RetrievalRow retrieval_recall_at_k(const std::vector<AgentTrace>& traces, const GoldTools& gold, std::size_t k);

}  // namespace toolrag
