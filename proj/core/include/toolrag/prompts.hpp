#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolrag/llm.hpp"
#include "toolrag/registry.hpp"

namespace toolrag {

/// Line that ends an agentic session with a final answer.
inline constexpr std::string_view kFinalSentinel = "FINAL ANSWER:";

/// Strings that only the agentic template emits. TQ prompts never contain them.
std::span<const std::string_view> agent_scaffold_markers();

/// Question text plus, for MC / OE-MC, exactly four options labelled A-D.
struct QuestionView {
  std::string text;
  std::vector<std::string> options;
};

/// "A. first\nB. second\n..."
std::string render_options(std::span<const std::string> options);
std::string render_question(const QuestionView& question);

/// Asks the model to restate the question as a retrieval intention.
/// Throws Precondition on an empty question.
CompletionRequest build_rewrite_prompt(std::string_view question);

/// Agentic turn: prior outcomes first, then every candidate's name,
/// description and parameter schema, then the output protocol.
CompletionRequest build_agent_prompt(const QuestionView& question, std::span<const std::string> prior_outcomes,
                                     std::span<const ToolSpec* const> candidates,
                                     std::size_t max_calls_per_round = 5);

/// Last call after the iteration budget is spent.
CompletionRequest build_forced_final_prompt(const QuestionView& question,
                                            std::span<const std::string> prior_outcomes);

/// Tool-query layout: retrieved context, then the question, then a short
/// answer instruction. Empty context is the no-retrieval setting.
CompletionRequest build_tq_prompt(std::string_view context, const QuestionView& question);

}  // namespace toolrag
