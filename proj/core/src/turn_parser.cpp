#include "toolrag/turn_parser.hpp"

#include <cctype>
#include <optional>
#include <set>

#include "toolrag/error.hpp"
#include "toolrag/prompts.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

namespace {

struct Region {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing bracket
  bool terminated = false;
};

// Matches brackets from `begin`, skipping over JSON string literals.
Region balanced_region(std::string_view s, std::size_t begin) {
  std::string closers;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = begin; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      closers.push_back(c == '[' ? ']' : '}');
    } else if (c == ']' || c == '}') {
      if (closers.empty() || closers.back() != c) return {begin, i + 1, false};
      closers.pop_back();
      if (closers.empty()) return {begin, i + 1, true};
    }
  }
  return {begin, s.size(), false};
}

std::vector<std::string> fenced_blocks(std::string_view raw) {
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  while ((pos = raw.find("```", pos)) != std::string_view::npos) {
    std::size_t body = raw.find('\n', pos + 3);
    if (body == std::string_view::npos) break;
    ++body;
    std::size_t close = raw.find("```", body);
    if (close == std::string_view::npos) {
      blocks.emplace_back(raw.substr(body));
      break;
    }
    blocks.emplace_back(raw.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

std::optional<FunctionCall> to_call(const json& node) {
  if (!node.is_object()) return std::nullopt;
  auto name = node.find("name");
  if (name == node.end() || !name->is_string() || name->get_ref<const std::string&>().empty()) return std::nullopt;
  FunctionCall call;
  call.name = name->get<std::string>();
  auto args = node.find("arguments");
  if (args == node.end() || args->is_null()) return call;
  if (args->is_object()) {
    call.arguments = *args;
    return call;
  }
  if (args->is_string()) {  // OpenAI style: arguments serialized as a string
    try {
      json inner = json::parse(args->get<std::string>());
      if (inner.is_object()) {
        call.arguments = std::move(inner);
        return call;
      }
    } catch (const json::exception&) {
    }
  }
  return std::nullopt;
}

std::optional<std::vector<FunctionCall>> to_calls(const json& node) {
  std::vector<FunctionCall> calls;
  if (node.is_array()) {
    for (const auto& item : node) {
      auto call = to_call(item);
      if (!call) return std::nullopt;
      calls.push_back(std::move(*call));
    }
    return calls;
  }
  if (node.is_object()) {
    if (auto tc = node.find("tool_calls"); tc != node.end()) return to_calls(*tc);
    if (auto call = to_call(node)) {
      calls.push_back(std::move(*call));
      return calls;
    }
  }
  return std::nullopt;
}

struct JsonScan {
  std::optional<std::vector<FunctionCall>> calls;
  std::string failure;  // reason for the first candidate that did not work
};

void try_candidate(std::string_view candidate, JsonScan& scan) {
  std::size_t pos = 0;
  while (!scan.calls) {
    pos = candidate.find_first_of("[{", pos);
    if (pos == std::string_view::npos) return;
    Region region = balanced_region(candidate, pos);
    if (!region.terminated) {
      if (scan.failure.empty()) {
        scan.failure = region.end == candidate.size() ? "unterminated JSON starting at offset " + std::to_string(pos)
                                                      : "mismatched brackets in JSON";
      }
      if (region.end == candidate.size()) return;
      pos = region.end;
      continue;
    }
    std::string_view body = candidate.substr(region.begin, region.end - region.begin);
    try {
      json parsed = json::parse(body);
      scan.calls = to_calls(parsed);
      if (!scan.calls && scan.failure.empty()) {
        scan.failure = "JSON is not a list of {\"name\", \"arguments\"} calls";
      }
    } catch (const json::parse_error& e) {
      if (scan.failure.empty()) scan.failure = std::string("invalid JSON: ") + e.what();
    }
    pos = region.end;
  }
}

JsonScan scan_json(std::string_view raw) {
  JsonScan scan;
  for (const auto& block : fenced_blocks(raw)) {
    try_candidate(block, scan);
    if (scan.calls) return scan;
  }
  try_candidate(raw, scan);
  return scan;
}

std::string strip_markup(std::string_view line) {
  std::string out = text::trim(line);
  std::size_t start = 0;
  while (start < out.size() && (out[start] == '*' || out[start] == '#' || out[start] == '>' || out[start] == ' ')) {
    ++start;
  }
  return out.substr(start);
}

std::optional<std::string> final_answer(std::string_view raw) {
  auto lines = text::split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = strip_markup(lines[i]);
    if (!text::starts_with_icase(line, kFinalSentinel)) continue;
    std::string answer = line.substr(kFinalSentinel.size());
    for (std::size_t j = i + 1; j < lines.size(); ++j) answer += "\n" + lines[j];
    answer = text::trim(answer);
    while (answer.starts_with("**")) answer = text::trim(answer.substr(2));
    return answer;
  }
  return std::nullopt;
}

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// An `ANSWER:` marker (optionally `FINAL ANSWER:`) followed by one option
// letter standing on its own.
std::optional<char> answer_line_letter(std::string_view raw) {
  std::string upper;
  upper.reserve(raw.size());
  for (char c : raw) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  std::size_t pos = 0;
  while ((pos = upper.find("ANSWER", pos)) != std::string::npos) {
    std::size_t i = pos + 6;
    bool word_start = pos == 0 || !is_letter(upper[pos - 1]);
    pos = i;
    if (!word_start) continue;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == '*')) ++i;
    if (i >= raw.size() || raw[i] != ':') continue;
    ++i;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == '*' || raw[i] == '(' || raw[i] == '[')) ++i;
    if (i >= raw.size()) continue;
    char letter = upper[i];
    if (letter < 'A' || letter > 'D') continue;
    if (i + 1 < raw.size() && is_letter(raw[i + 1])) continue;
    // "ANSWER: A patient ..." is prose, not a choice.
    if (i + 2 < raw.size() && raw[i + 1] == ' ' && std::islower(static_cast<unsigned char>(raw[i + 2]))) continue;
    return letter;
  }
  return std::nullopt;
}

bool sentence_start(std::string_view s, std::size_t i) {
  while (i > 0 && s[i - 1] == ' ') --i;
  return i == 0 || s[i - 1] == '\n' || s[i - 1] == '.' || s[i - 1] == '!' || s[i - 1] == '?' || s[i - 1] == ':';
}

// Standalone uppercase option letters; a sentence-initial "A" followed by a
// lowercase word is read as the article.
std::set<char> mentioned_letters(std::string_view s) {
  std::set<char> letters;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c < 'A' || c > 'D') continue;
    bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
    bool right_ok = i + 1 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 1]));
    if (!left_ok || !right_ok) continue;
    if (i > 0 && (s[i - 1] == '\'' || s[i - 1] == '-')) continue;
    if (c == 'A' && sentence_start(s, i) && i + 2 < s.size() && s[i + 1] == ' ' &&
        std::islower(static_cast<unsigned char>(s[i + 2]))) {
      continue;
    }
    letters.insert(c);
  }
  return letters;
}

}  // namespace

ModelTurn parse_turn(std::string_view raw, ParseMode mode) {
  ModelTurn turn;
  turn.raw = std::string(raw);
  JsonScan scan = scan_json(raw);
  if (scan.calls) {
    turn.kind = CallsTurn{std::move(*scan.calls)};
    return turn;
  }
  if (auto answer = final_answer(raw)) {
    turn.kind = FinalTurn{std::move(*answer)};
    return turn;
  }
  if (mode == ParseMode::kChoice) {
    if (auto letter = answer_line_letter(raw)) {
      turn.kind = ChoiceTurn{*letter};
      return turn;
    }
  }
  std::string reason = scan.failure.empty() ? "no function-call JSON and no `" + std::string(kFinalSentinel) +
                                                  "` line found"
                                            : scan.failure;
  turn.kind = ParseFailure{std::move(reason)};
  return turn;
}

ModelTurn parse_rewrite(std::string_view raw) {
  ModelTurn turn;
  turn.raw = std::string(raw);
  std::string text = text::trim(raw);
  for (std::string_view prefix : {"Rewritten query:", "Rewrite:", "Intention:"}) {
    if (text::starts_with_icase(text, prefix)) {
      text = text::trim(std::string_view(text).substr(prefix.size()));
      break;
    }
  }
  if (text.empty()) {
    turn.kind = ParseFailure{"empty rewrite"};
  } else {
    turn.kind = RewriteTurn{std::move(text)};
  }
  return turn;
}

std::string render_calls(std::span<const FunctionCall> calls) {
  json out = json::array();
  for (const auto& call : calls) {
    out.push_back({{"name", call.name}, {"arguments", call.arguments.is_null() ? json::object() : call.arguments}});
  }
  return out.dump();
}

char extract_choice(std::string_view raw, std::span<const std::string> options) {
  if (options.size() != 4) {
    throw Error(ErrorCode::kPrecondition, "expected 4 options, got " + std::to_string(options.size()));
  }
  if (auto letter = answer_line_letter(raw)) return *letter;
  auto letters = mentioned_letters(raw);
  if (letters.size() == 1) return *letters.begin();
  throw Error(ErrorCode::kUnparseable, letters.empty() ? "no option letter found" : "several option letters mentioned");
}

}  // namespace toolrag
