#include "toolrag/prompts.hpp"

#include <array>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

namespace {

constexpr std::string_view kProtocolMarker = "### AGENT PROTOCOL";
constexpr std::string_view kOutcomesMarker = "### PRIOR TOOL OUTCOMES";
constexpr std::string_view kCandidatesMarker = "### CANDIDATE TOOLS";

constexpr std::array<std::string_view, 4> kMarkers = {kProtocolMarker, kOutcomesMarker, kCandidatesMarker,
                                                      kFinalSentinel};

void require_question(std::string_view question) {
  if (text::trim(question).empty()) throw Error(ErrorCode::kPrecondition, "question text is empty");
}

std::string render_outcomes(std::span<const std::string> prior_outcomes) {
  if (prior_outcomes.empty()) return "(none yet)\n";
  std::string out;
  for (std::size_t i = 0; i < prior_outcomes.size(); ++i) {
    out += "Round " + std::to_string(i + 1) + ":\n" + prior_outcomes[i] + "\n";
  }
  return out;
}

std::string render_tool(const ToolSpec& tool) {
  std::string out = "- name: " + tool.name + "\n  description: " + tool.description + "\n  parameters:";
  if (tool.params.empty()) return out + " none\n";
  out += "\n";
  for (const auto& p : tool.params) {
    out += "    - " + p.name + " (" + std::string(to_string(p.kind));
    if (p.kind == ParamKind::kEnum) {
      out += ": ";
      for (std::size_t i = 0; i < p.values.size(); ++i) out += (i ? "|" : "") + p.values[i];
    }
    out += p.required ? ", required)" : ", optional)";
    if (!p.description.empty()) out += ": " + p.description;
    out += "\n";
  }
  return out;
}

std::string choice_instruction(const QuestionView& question) {
  if (question.options.empty()) return {};
  return " This is a multiple-choice question: end the final answer with a line of the form `ANSWER: <letter>`.";
}

}  // namespace

std::span<const std::string_view> agent_scaffold_markers() { return kMarkers; }

std::string render_options(std::span<const std::string> options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += static_cast<char>('A' + i);
    out += ". " + options[i] + "\n";
  }
  return out;
}

std::string render_question(const QuestionView& question) {
  std::string out = text::trim(question.text);
  if (!question.options.empty()) out += "\n" + render_options(question.options);
  return out;
}

CompletionRequest build_rewrite_prompt(std::string_view question) {
  require_question(question);
  CompletionRequest request;
  request.messages.push_back(
      {Role::kSystem,
       "Restate the user's question as one short statement of the information need. Name the intention "
       "(for example side effects, dosing, interactions, contraindications) and every drug, condition or "
       "population it concerns. Reply with the statement only."});
  request.messages.push_back({Role::kUser, "Question: " + text::trim(question)});
  return request;
}

CompletionRequest build_agent_prompt(const QuestionView& question, std::span<const std::string> prior_outcomes,
                                     std::span<const ToolSpec* const> candidates, std::size_t max_calls_per_round) {
  require_question(question.text);
  CompletionRequest request;
  std::string system = std::string(kProtocolMarker) +
                       "\nYou answer therapeutic questions using the tools listed under the candidate tools "
                       "heading. To call tools, reply with only a JSON list of calls such as "
                       "[{\"name\": \"<tool>\", \"arguments\": {\"<parameter>\": <value>}}], at most " +
                       std::to_string(max_calls_per_round) +
                       " calls per reply, using the parameter names exactly as listed. Tool results will be "
                       "returned to you. When the information is sufficient, reply with a line starting with `" +
                       std::string(kFinalSentinel) + "` followed by your answer." + choice_instruction(question);
  request.messages.push_back({Role::kSystem, std::move(system)});

  std::string user = "Question:\n" + render_question(question) + "\n\n";
  user += std::string(kOutcomesMarker) + "\n" + render_outcomes(prior_outcomes) + "\n";
  user += std::string(kCandidatesMarker) + "\n";
  if (candidates.empty()) user += "(no tools retrieved)\n";
  for (const ToolSpec* tool : candidates) user += render_tool(*tool);
  request.messages.push_back({Role::kUser, std::move(user)});
  return request;
}

CompletionRequest build_forced_final_prompt(const QuestionView& question,
                                            std::span<const std::string> prior_outcomes) {
  require_question(question.text);
  CompletionRequest request;
  request.messages.push_back({Role::kSystem, std::string(kProtocolMarker) +
                                                 "\nThe tool budget for this question is spent. Do not call "
                                                 "tools. Reply with a line starting with `" +
                                                 std::string(kFinalSentinel) + "` followed by your best answer." +
                                                 choice_instruction(question)});
  std::string user = "Question:\n" + render_question(question) + "\n\n";
  user += std::string(kOutcomesMarker) + "\n" + render_outcomes(prior_outcomes);
  request.messages.push_back({Role::kUser, std::move(user)});
  return request;
}

CompletionRequest build_tq_prompt(std::string_view context, const QuestionView& question) {
  require_question(question.text);
  std::string prompt;
  std::string trimmed = text::trim(context);
  if (!trimmed.empty()) prompt += "Retrieved information:\n" + trimmed + "\n\n";
  prompt += "Question:\n" + render_question(question) + "\n\n";
  if (question.options.empty()) {
    prompt += "Answer the question concisely.";
  } else {
    prompt += "Select the correct option and finish with a line of the form `ANSWER: <letter>`.";
  }
  CompletionRequest request;
  request.messages.push_back({Role::kUser, std::move(prompt)});
  return request;
}

}  // namespace toolrag
