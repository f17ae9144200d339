#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolrag/clock.hpp"
#include "toolrag/executor.hpp"
#include "toolrag/llm.hpp"
#include "toolrag/prompts.hpp"
#include "toolrag/registry.hpp"
#include "toolrag/retrieval.hpp"
#include "toolrag/trace.hpp"

namespace toolrag {

enum class SessionMode { kAgentic, kFixedRetrieval, kNoRetrieval };

/// kCached serves the earlier result of an identical successful call;
/// kReject refuses it without executing; kAllow re-executes (no mitigation).
enum class RepeatedCallPolicy { kCached, kReject, kAllow };

std::string_view to_string(SessionMode mode);
std::optional<SessionMode> parse_session_mode(std::string_view text);
std::string_view to_string(RepeatedCallPolicy policy);
std::optional<RepeatedCallPolicy> parse_repeated_call_policy(std::string_view text);

struct SessionConfig {
  RetrievalConfig retrieval;
  std::size_t max_iterations = 10;
  std::size_t max_calls_per_round = 5;
  SessionMode mode = SessionMode::kAgentic;
  std::optional<std::string> frozen_context;  // required in fixed-retrieval mode
  RepeatedCallPolicy repeated_call_policy = RepeatedCallPolicy::kCached;

  void validate() const;  // throws ConfigError
};

struct SessionQuestion {
  std::string id;
  QuestionView view;
};

/// Everything a session talks to. The retriever must be built over the same
/// registry revision; it may be null outside agentic mode.
struct SessionDeps {
  const Registry& registry;
  const Retriever* retriever = nullptr;
  LlmAdapter& llm;
  ToolExecutor& executor;
  Clock& clock;
};

struct SessionResult {
  AgentTrace trace;
  std::string answer;
  bool budget_exhausted = false;
};

/// Adapter failure mid-session. Carries the trace recorded up to that point.
class SessionAborted : public AdapterError {
 public:
  SessionAborted(const AdapterError& cause, AgentTrace partial)
      : AdapterError(cause.what(), cause.retryable()), partial_(std::move(partial)) {}

  const AgentTrace& partial_trace() const { return partial_; }

 private:
  AgentTrace partial_;
};

/// Per-session bookkeeping for repeated-call handling and the safety bound.
struct SessionState {
  std::map<std::string, std::string> succeeded;  // fingerprint -> payload
  std::size_t executed = 0;                      // executor invocations
};

struct RoundResult {
  std::vector<CallRecord> records;
  std::string feedback;
};

/// Validates then executes each call in order; every failure becomes an
/// outcome. The feedback text labels each call with its fingerprint.
RoundResult handle_call_round(std::span<const FunctionCall> calls, const Registry& registry, ToolExecutor& executor,
                              SessionState& state, RepeatedCallPolicy policy, Clock& clock);

/// Runs one session. Throws ConfigError for an invalid configuration and
/// SessionAborted when the model adapter fails.
SessionResult run_session(const SessionQuestion& question, const SessionDeps& deps, const SessionConfig& config,
                          std::string session_id = {});

/// Successful payloads in execution order, each under its tool name; failed
/// calls are dropped. A fixed-retrieval trace yields its input context.
std::string freeze_context(const AgentTrace& trace);

}  // namespace toolrag
