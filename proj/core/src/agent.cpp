#include "toolrag/agent.hpp"

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"
#include "toolrag/turn_parser.hpp"

namespace toolrag {

std::string_view to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::kAgentic: return "agentic";
    case SessionMode::kFixedRetrieval: return "fixed_retrieval";
    case SessionMode::kNoRetrieval: return "no_retrieval";
  }
  return "agentic";
}

std::optional<SessionMode> parse_session_mode(std::string_view text) {
  if (text == "agentic") return SessionMode::kAgentic;
  if (text == "fixed_retrieval" || text == "fixed") return SessionMode::kFixedRetrieval;
  if (text == "no_retrieval" || text == "none") return SessionMode::kNoRetrieval;
  return std::nullopt;
}

std::string_view to_string(RepeatedCallPolicy policy) {
  switch (policy) {
    case RepeatedCallPolicy::kCached: return "cached";
    case RepeatedCallPolicy::kReject: return "reject";
    case RepeatedCallPolicy::kAllow: return "allow";
  }
  return "cached";
}

std::optional<RepeatedCallPolicy> parse_repeated_call_policy(std::string_view text) {
  if (text == "cached") return RepeatedCallPolicy::kCached;
  if (text == "reject") return RepeatedCallPolicy::kReject;
  if (text == "allow") return RepeatedCallPolicy::kAllow;
  return std::nullopt;
}

void SessionConfig::validate() const {
  retrieval.validate();
  if (max_iterations < 1) throw Error(ErrorCode::kConfigError, "max_iterations must be >= 1");
  if (max_calls_per_round < 1) throw Error(ErrorCode::kConfigError, "max_calls_per_round must be >= 1");
  if (mode == SessionMode::kFixedRetrieval && !frozen_context) {
    throw Error(ErrorCode::kConfigError, "fixed_retrieval mode needs a stored context");
  }
}

namespace {

constexpr std::string_view kProtocolReminder =
    "Reply with a JSON list of calls or a line starting with `FINAL ANSWER:`.";

std::string feedback_line(std::size_t index, const CallRecord& record) {
  std::string out = "[call " + std::to_string(index + 1) + "] " + record.call.name +
                    " fingerprint=" + record.outcome.fingerprint + " status=" +
                    std::string(to_string(record.outcome.status)) + "\n";
  out += text::trim(record.outcome.payload);
  out += "\n";
  return out;
}

}  // namespace

RoundResult handle_call_round(std::span<const FunctionCall> calls, const Registry& registry, ToolExecutor& executor,
                              SessionState& state, RepeatedCallPolicy policy, Clock& clock) {
  RoundResult result;
  if (calls.empty()) {
    result.feedback = "ParseFailure: the call list was empty. " + std::string(kProtocolReminder);
    return result;
  }
  for (const auto& call : calls) {
    CallRecord record;
    record.call = call;
    CallCheck check = validate_call(registry, call);
    if (!check.ok()) {
      record.outcome.status = OutcomeStatus::kValidationError;
      record.outcome.payload = check.error_text;
      record.outcome.fingerprint = call_fingerprint(call.name, call.arguments);
    } else {
      const ValidatedCall& validated = *check.call;
      auto previous = state.succeeded.find(validated.fingerprint);
      if (previous != state.succeeded.end() && policy == RepeatedCallPolicy::kCached) {
        record.outcome.status = OutcomeStatus::kCached;
        record.outcome.payload = previous->second;
        record.outcome.fingerprint = validated.fingerprint;
      } else if (previous != state.succeeded.end() && policy == RepeatedCallPolicy::kReject) {
        record.outcome.status = OutcomeStatus::kValidationError;
        record.outcome.payload = "repeated call: an identical call to " + validated.tool +
                                 " already succeeded in this session; reuse its result";
        record.outcome.fingerprint = validated.fingerprint;
      } else {
        std::int64_t start = clock.now_ms();
        record.outcome = executor.execute(registry.at(validated.tool), validated);
        if (record.outcome.latency_ms == 0) record.outcome.latency_ms = clock.now_ms() - start;
        if (record.outcome.fingerprint.empty()) record.outcome.fingerprint = validated.fingerprint;
        ++state.executed;
        if (record.outcome.succeeded()) state.succeeded[validated.fingerprint] = record.outcome.payload;
      }
    }
    record.outcome.payload_bytes = record.outcome.payload.size();
    result.records.push_back(std::move(record));
  }
  for (std::size_t i = 0; i < result.records.size(); ++i) result.feedback += feedback_line(i, result.records[i]);
  return result;
}

SessionResult run_session(const SessionQuestion& question, const SessionDeps& deps, const SessionConfig& config,
                          std::string session_id) {
  config.validate();
  if (session_id.empty()) {
    session_id = "s-" + text::to_hex(text::fnv1a64(question.id + "|" + std::string(to_string(config.mode))));
  }
  SessionResult result;
  AgentTrace& trace = result.trace;
  trace.session_id = std::move(session_id);
  trace.question_id = question.id;
  auto push = [&](StepBody body) { trace.steps.push_back({std::move(body), deps.clock.now_ms()}); };

  try {
    if (config.mode != SessionMode::kAgentic) {
      std::string context;
      if (config.mode == SessionMode::kFixedRetrieval) {
        context = *config.frozen_context;
        push(ContextStep{context});
      }
      std::string raw = deps.llm.complete(build_tq_prompt(context, question.view));
      result.answer = text::trim(raw);
      push(TerminationStep{TerminationReason::kFinal, result.answer});
      return result;
    }

    if (deps.registry.empty()) throw Error(ErrorCode::kConfigError, "agentic mode needs a non-empty registry");
    if (deps.retriever == nullptr) throw Error(ErrorCode::kConfigError, "agentic mode needs a retriever");
    if (deps.retriever->registry_version() != deps.registry.version()) {
      throw Error(ErrorCode::kConfigError, "retriever was built for a different registry revision");
    }

    ModelTurn rewrite_turn = parse_rewrite(deps.llm.complete(build_rewrite_prompt(question.view.text)));
    std::string rewrite = text::trim(question.view.text);
    if (const auto* r = std::get_if<RewriteTurn>(&rewrite_turn.kind)) rewrite = r->text;
    push(RewriteStep{rewrite});

    SessionState state;
    std::vector<std::string> outcomes;
    std::string latest_feedback;
    for (std::size_t iteration = 0; iteration < config.max_iterations; ++iteration) {
      std::string query = latest_feedback.empty() ? rewrite : rewrite + "\n" + latest_feedback;
      RankedTools ranked = retrieve_top_k(*deps.retriever, query, config.retrieval.k);
      std::vector<const ToolSpec*> candidates;
      for (const auto& entry : ranked.entries) candidates.push_back(&deps.registry.at(entry.tool));
      push(RetrievalStep{std::move(ranked)});

      ModelTurn turn = parse_turn(
          deps.llm.complete(build_agent_prompt(question.view, outcomes, candidates, config.max_calls_per_round)));

      if (const auto* final_turn = std::get_if<FinalTurn>(&turn.kind)) {
        result.answer = final_turn->answer;
        push(TerminationStep{TerminationReason::kFinal, result.answer});
        return result;
      }

      std::string feedback;
      if (const auto* calls_turn = std::get_if<CallsTurn>(&turn.kind)) {
        std::span<const FunctionCall> calls(calls_turn->calls);
        std::size_t dropped = 0;
        if (calls.size() > config.max_calls_per_round) {
          dropped = calls.size() - config.max_calls_per_round;
          calls = calls.first(config.max_calls_per_round);
        }
        RoundResult round = handle_call_round(calls, deps.registry, deps.executor, state,
                                              config.repeated_call_policy, deps.clock);
        feedback = std::move(round.feedback);
        if (dropped > 0) {
          feedback += std::to_string(dropped) + " call(s) beyond the limit of " +
                      std::to_string(config.max_calls_per_round) + " per round were not executed.\n";
        }
        if (!round.records.empty()) push(CallRoundStep{std::move(round.records)});
      } else if (const auto* failure = std::get_if<ParseFailure>(&turn.kind)) {
        feedback = "ParseFailure: " + failure->reason + ". " + std::string(kProtocolReminder);
      } else {
        feedback = "ParseFailure: unexpected reply. " + std::string(kProtocolReminder);
      }
      push(FeedbackStep{feedback});
      outcomes.push_back(feedback);
      latest_feedback = std::move(feedback);
    }

    ModelTurn forced = parse_turn(deps.llm.complete(build_forced_final_prompt(question.view, outcomes)));
    if (const auto* final_turn = std::get_if<FinalTurn>(&forced.kind)) {
      result.answer = final_turn->answer;
    } else {
      result.answer = text::trim(forced.raw);
    }
    result.budget_exhausted = true;
    push(TerminationStep{TerminationReason::kBudgetExhausted, result.answer});
    return result;
  } catch (const AdapterError& e) {
    throw SessionAborted(e, trace);
  }
}

std::string freeze_context(const AgentTrace& trace) {
  for (const auto& step : trace.steps) {
    if (const auto* context = std::get_if<ContextStep>(&step.body)) return context->text;
  }
  std::string out;
  for (const auto& step : trace.steps) {
    const auto* round = std::get_if<CallRoundStep>(&step.body);
    if (round == nullptr) continue;
    for (const auto& record : round->calls) {
      if (!record.outcome.succeeded()) continue;
      if (!out.empty()) out += "\n\n";
      out += "[" + record.call.name + "]\n" + text::trim(record.outcome.payload);
    }
  }
  return out;
}

}  // namespace toolrag
