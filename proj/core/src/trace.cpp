#include "toolrag/trace.hpp"

#include <fstream>
#include <sstream>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

std::string_view step_kind(const StepBody& body) {
  struct Visitor {
    std::string_view operator()(const RewriteStep&) const { return "rewrite"; }
    std::string_view operator()(const RetrievalStep&) const { return "retrieval"; }
    std::string_view operator()(const CallRoundStep&) const { return "call_round"; }
    std::string_view operator()(const FeedbackStep&) const { return "feedback"; }
    std::string_view operator()(const ContextStep&) const { return "context"; }
    std::string_view operator()(const TerminationStep&) const { return "termination"; }
  };
  return std::visit(Visitor{}, body);
}

const TerminationStep* AgentTrace::termination() const {
  if (steps.empty()) return nullptr;
  return std::get_if<TerminationStep>(&steps.back().body);
}

std::size_t AgentTrace::count(std::string_view kind) const {
  std::size_t n = 0;
  for (const auto& step : steps) n += step_kind(step.body) == kind ? 1 : 0;
  return n;
}

namespace {

json payload_json(const StepBody& body) {
  struct Visitor {
    json operator()(const RewriteStep& s) const { return {{"text", s.text}}; }
    json operator()(const RetrievalStep& s) const { return to_json(s.ranked); }
    json operator()(const CallRoundStep& s) const {
      json calls = json::array();
      for (const auto& record : s.calls) {
        calls.push_back({{"call", {{"name", record.call.name}, {"arguments", record.call.arguments}}},
                         {"outcome", record.outcome.to_json()}});
      }
      return {{"calls", calls}};
    }
    json operator()(const FeedbackStep& s) const { return {{"text", s.text}}; }
    json operator()(const ContextStep& s) const { return {{"text", s.text}}; }
    json operator()(const TerminationStep& s) const {
      return {{"reason", s.reason == TerminationReason::kFinal ? "final" : "budget_exhausted"},
              {"answer", s.answer}};
    }
  };
  return std::visit(Visitor{}, body);
}

StepBody body_from_json(const std::string& kind, const json& payload) {
  if (kind == "rewrite") return RewriteStep{payload.at("text").get<std::string>()};
  if (kind == "retrieval") return RetrievalStep{ranked_tools_from_json(payload)};
  if (kind == "call_round") {
    CallRoundStep round;
    for (const auto& entry : payload.at("calls")) {
      CallRecord record;
      record.call.name = entry.at("call").at("name").get<std::string>();
      record.call.arguments = entry.at("call").at("arguments");
      record.outcome = ToolOutcome::from_json(entry.at("outcome"));
      round.calls.push_back(std::move(record));
    }
    return round;
  }
  if (kind == "feedback") return FeedbackStep{payload.at("text").get<std::string>()};
  if (kind == "context") return ContextStep{payload.at("text").get<std::string>()};
  if (kind == "termination") {
    std::string reason = payload.at("reason").get<std::string>();
    TerminationStep step;
    step.reason = reason == "final" ? TerminationReason::kFinal : TerminationReason::kBudgetExhausted;
    step.answer = payload.at("answer").get<std::string>();
    return step;
  }
  throw Error(ErrorCode::kSchemaError, "unknown trace step kind '" + kind + "'");
}

}  // namespace

json step_to_json(const AgentTrace& trace, std::size_t index) {
  const TraceStep& step = trace.steps.at(index);
  return {{"session_id", trace.session_id},
          {"question_id", trace.question_id},
          {"step_index", index},
          {"kind", step_kind(step.body)},
          {"payload", payload_json(step.body)},
          {"timestamp", step.timestamp_ms}};
}

std::string to_jsonl(const AgentTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    out += step_to_json(trace, i).dump();
    out += '\n';
  }
  return out;
}

AgentTrace parse_trace_jsonl(std::string_view input) {
  AgentTrace trace;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(input)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      json record = json::parse(line);
      std::string session = record.at("session_id").get<std::string>();
      std::string question = record.at("question_id").get<std::string>();
      if (trace.steps.empty()) {
        trace.session_id = session;
        trace.question_id = question;
      } else if (session != trace.session_id) {
        throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": session id changes mid-file");
      }
      std::size_t index = record.at("step_index").get<std::size_t>();
      if (index != trace.steps.size()) {
        throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": step_index out of order");
      }
      TraceStep step;
      step.body = body_from_json(record.at("kind").get<std::string>(), record.at("payload"));
      step.timestamp_ms = record.at("timestamp").get<std::int64_t>();
      trace.steps.push_back(std::move(step));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("trace: ") + e.what(), line_no, e.byte);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

void append_trace_file(const std::filesystem::path& path, const AgentTrace& trace, std::size_t first_step) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open trace file " + path.string());
  for (std::size_t i = first_step; i < trace.steps.size(); ++i) out << step_to_json(trace, i).dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

AgentTrace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open trace file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_trace_jsonl(buffer.str());
}

}  // namespace toolrag
