#include "toolrag/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

void compute_deltas(std::vector<ReportRow>& rows) {
  double best = 0.0;
  for (const auto& row : rows) best = std::max(best, row.accuracy);
  for (auto& row : rows) row.rel_delta = best > 0.0 ? (row.accuracy - best) / best : 0.0;
}

std::string csv_escape(std::string_view field) {
  bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view csv) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    char c = csv[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ParseError("csv: quote inside unquoted field", line, i);
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      field.clear();
      record.clear();
      field_started = false;
      ++line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError("csv: unterminated quoted field", line, csv.size());
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

namespace {

template <typename T>
T parse_number(const std::string& field, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kSchemaError, "csv: bad " + std::string(column) + " value '" + field + "'");
  }
  return value;
}

std::vector<std::vector<std::string>> checked_records(std::string_view csv, std::string_view header) {
  auto records = parse_csv_records(csv);
  if (records.empty()) throw Error(ErrorCode::kSchemaError, "csv: missing header");
  std::string got;
  for (std::size_t i = 0; i < records[0].size(); ++i) got += (i ? "," : "") + records[0][i];
  if (got != header) throw Error(ErrorCode::kSchemaError, "csv: expected header '" + std::string(header) + "', got '" + got + "'");
  std::size_t columns = records[0].size();
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != columns) {
      throw Error(ErrorCode::kSchemaError, "csv: row " + std::to_string(i) + " has " +
                                               std::to_string(records[i].size()) + " fields");
    }
  }
  records.erase(records.begin());
  return records;
}

}  // namespace

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out(kReportCsvHeader);
  out += "\n";
  for (const auto& row : rows) {
    out += csv_escape(row.model) + "," + csv_escape(row.setting) + "," + csv_escape(row.style) + "," +
           (row.permuted ? "true" : "false") + "," + std::to_string(row.n) + "," + text::format_double(row.accuracy) +
           "," + text::format_double(row.rel_delta) + "," + std::to_string(row.unparseable) + "\n";
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
  std::vector<ReportRow> rows;
  for (const auto& r : checked_records(csv, kReportCsvHeader)) {
    ReportRow row;
    row.model = r[0];
    row.setting = r[1];
    row.style = r[2];
    if (r[3] != "true" && r[3] != "false") throw Error(ErrorCode::kSchemaError, "csv: bad permuted value '" + r[3] + "'");
    row.permuted = r[3] == "true";
    row.n = parse_number<std::size_t>(r[4], "n");
    row.accuracy = parse_number<double>(r[5], "accuracy");
    row.rel_delta = parse_number<double>(r[6], "rel_delta");
    row.unparseable = parse_number<std::size_t>(r[7], "unparseable");
    if (row.accuracy < 0.0 || row.accuracy > 1.0) throw Error(ErrorCode::kSchemaError, "csv: accuracy out of range");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string retrieval_to_csv(const std::vector<RetrievalRow>& rows) {
  std::string out(kRetrievalCsvHeader);
  out += "\n";
  for (const auto& row : rows) {
    out += csv_escape(row.backend) + "," + std::to_string(row.k) + "," + std::to_string(row.n) + "," +
           text::format_double(row.recall) + "," + text::format_double(row.mrr) + "\n";
  }
  return out;
}

std::vector<RetrievalRow> parse_retrieval_csv(std::string_view csv) {
  std::vector<RetrievalRow> rows;
  for (const auto& r : checked_records(csv, kRetrievalCsvHeader)) {
    rows.push_back({r[0], parse_number<std::size_t>(r[1], "k"), parse_number<std::size_t>(r[2], "n"),
                    parse_number<double>(r[3], "recall"), parse_number<double>(r[4], "mrr")});
  }
  return rows;
}

json to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"model", r.model}, {"setting", r.setting}, {"style", r.style}, {"permuted", r.permuted},
                    {"n", r.n}, {"accuracy", r.accuracy}, {"rel_delta", r.rel_delta}, {"unparseable", r.unparseable}});
  }
  json retrieval = json::array();
  for (const auto& r : report.retrieval) {
    retrieval.push_back({{"backend", r.backend}, {"k", r.k}, {"n", r.n}, {"recall", r.recall}, {"mrr", r.mrr}});
  }
  return {{"rows", rows}, {"retrieval", retrieval}, {"config", report.config}};
}

EvalReport report_from_json(const json& node) {
  EvalReport report;
  try {
    for (const auto& r : node.at("rows")) {
      report.rows.push_back({r.at("model").get<std::string>(), r.at("setting").get<std::string>(),
                             r.at("style").get<std::string>(), r.at("permuted").get<bool>(),
                             r.at("n").get<std::size_t>(), r.at("accuracy").get<double>(),
                             r.at("rel_delta").get<double>(), r.at("unparseable").get<std::size_t>()});
    }
    if (node.contains("retrieval")) {
      for (const auto& r : node.at("retrieval")) {
        report.retrieval.push_back({r.at("backend").get<std::string>(), r.at("k").get<std::size_t>(),
                                    r.at("n").get<std::size_t>(), r.at("recall").get<double>(),
                                    r.at("mrr").get<double>()});
      }
    }
    if (node.contains("config")) report.config = node.at("config");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("report: ") + e.what());
  }
  return report;
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace

ReportFiles emit_report(const EvalReport& report, const std::filesystem::path& dir, std::string_view stem) {
  if (report.rows.empty() && report.retrieval.empty()) throw Error(ErrorCode::kPrecondition, "empty report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  ReportFiles files;
  std::string base(stem);
  if (!report.rows.empty()) {
    files.csv = dir / (base + ".csv");
    write_file(files.csv, report_to_csv(report.rows));
  }
  if (!report.retrieval.empty()) {
    files.retrieval_csv = dir / (base + "_retrieval.csv");
    write_file(files.retrieval_csv, retrieval_to_csv(report.retrieval));
  }
  files.json = dir / (base + ".json");
  write_file(files.json, to_json(report).dump(2) + "\n");
  return files;
}

RetrievalRow retrieval_metrics(const std::map<std::string, RankedTools>& rankings, const GoldTools& gold,
                               std::size_t k, std::string backend) {
  RetrievalRow row;
  row.backend = std::move(backend);
  row.k = k;
  double hits = 0.0;
  double reciprocal = 0.0;
  for (const auto& [id, ranked] : rankings) {
    auto annotated = gold.find(id);
    if (annotated == gold.end() || annotated->second.empty()) continue;
    ++row.n;
    std::size_t limit = std::min(k, ranked.entries.size());
    for (std::size_t rank = 0; rank < limit; ++rank) {
      if (annotated->second.count(ranked.entries[rank].tool)) {
        hits += 1.0;
        reciprocal += 1.0 / static_cast<double>(rank + 1);
        break;
      }
    }
  }
  if (row.n == 0) throw Error(ErrorCode::kPrecondition, "no annotated queries");
  row.recall = hits / static_cast<double>(row.n);
  row.mrr = reciprocal / static_cast<double>(row.n);
  return row;
}

RetrievalRow retrieval_recall_at_k(const std::vector<AgentTrace>& traces, const GoldTools& gold, std::size_t k) {
  std::map<std::string, RankedTools> rankings;
  std::string backend;
  for (const auto& trace : traces) {
    auto annotated = gold.find(trace.question_id);
    if (annotated == gold.end() || annotated->second.empty()) continue;
    const RetrievalStep* first = nullptr;
    for (const auto& step : trace.steps) {
      if ((first = std::get_if<RetrievalStep>(&step.body)) != nullptr) break;
    }
    if (first == nullptr) throw Error(ErrorCode::kNoRetrievalSteps, "trace for question '" + trace.question_id + "'");
    if (backend.empty()) backend = first->ranked.backend;
    rankings[trace.question_id] = first->ranked;
  }
  return retrieval_metrics(rankings, gold, k, backend);
}

}  // namespace toolrag
