#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/executor.hpp"
#include "toolrag/registry.hpp"
#include "toolrag/retrieval.hpp"

namespace toolrag {

struct RewriteStep {
  std::string text;
  bool operator==(const RewriteStep&) const = default;
};

struct RetrievalStep {
  RankedTools ranked;
  bool operator==(const RetrievalStep&) const = default;
};

struct CallRecord {
  FunctionCall call;
  ToolOutcome outcome;
  bool operator==(const CallRecord&) const = default;
};

struct CallRoundStep {
  std::vector<CallRecord> calls;
  bool operator==(const CallRoundStep&) const = default;
};

struct FeedbackStep {
  std::string text;
  bool operator==(const FeedbackStep&) const = default;
};

/// Pre-extracted context a fixed-retrieval session answered from.
struct ContextStep {
  std::string text;
  bool operator==(const ContextStep&) const = default;
};

enum class TerminationReason { kFinal, kBudgetExhausted };

struct TerminationStep {
  TerminationReason reason = TerminationReason::kFinal;
  std::string answer;
  bool operator==(const TerminationStep&) const = default;
};

using StepBody = std::variant<RewriteStep, RetrievalStep, CallRoundStep, FeedbackStep, ContextStep, TerminationStep>;

struct TraceStep {
  StepBody body;
  std::int64_t timestamp_ms = 0;
  bool operator==(const TraceStep&) const = default;
};

std::string_view step_kind(const StepBody& body);

/// Ordered record of one session.
struct AgentTrace {
  std::string session_id;
  std::string question_id;
  std::vector<TraceStep> steps;

  const TerminationStep* termination() const;
  std::size_t count(std::string_view kind) const;

  bool operator==(const AgentTrace&) const = default;
};

/// One JSON object per step: {session_id, question_id, step_index, kind,
/// payload, timestamp}. Keys are emitted sorted, so output is byte-stable.
std::string to_jsonl(const AgentTrace& trace);
nlohmann::json step_to_json(const AgentTrace& trace, std::size_t index);
AgentTrace parse_trace_jsonl(std::string_view text);

/// Append-only writer: each call adds the given steps as new lines.
void append_trace_file(const std::filesystem::path& path, const AgentTrace& trace, std::size_t first_step = 0);
AgentTrace read_trace_file(const std::filesystem::path& path);

}  // namespace toolrag
