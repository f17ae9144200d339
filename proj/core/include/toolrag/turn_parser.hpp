#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "toolrag/registry.hpp"

namespace toolrag {

struct RewriteTurn {
  std::string text;
};
struct CallsTurn {
  std::vector<FunctionCall> calls;
};
struct FinalTurn {
  std::string answer;
};
struct ChoiceTurn {
  char letter = 'A';
};
/// Not an exception: the agent loop turns it into feedback for the model.
struct ParseFailure {
  std::string reason;
};

struct ModelTurn {
  std::string raw;
  std::variant<RewriteTurn, CallsTurn, FinalTurn, ChoiceTurn, ParseFailure> kind;
};

enum class ParseMode { kAgent, kChoice };

/// Extraction order: (1) fenced block or first balanced bracket region that
/// holds {name, arguments} calls, (2) a `FINAL ANSWER:` line, (3) in choice
/// mode an `ANSWER: <letter>` line. Anything else is a ParseFailure.
ModelTurn parse_turn(std::string_view raw, ParseMode mode = ParseMode::kAgent);

ModelTurn parse_rewrite(std::string_view raw);

/// Machine form of a call list; parse_turn(render_calls(c)) yields c.
std::string render_calls(std::span<const FunctionCall> calls);

/// Letter from an `ANSWER: X` line, else the single option letter the text
/// mentions. Throws Unparseable otherwise, and Precondition unless there are
/// exactly four options.
char extract_choice(std::string_view raw, std::span<const std::string> options);

}  // namespace toolrag
