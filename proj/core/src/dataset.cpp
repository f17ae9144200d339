#include "toolrag/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

std::string_view to_string(QuestionStyle style) {
  switch (style) {
    case QuestionStyle::kMC: return "MC";
    case QuestionStyle::kOE: return "OE";
    case QuestionStyle::kOEMC: return "OEMC";
  }
  return "MC";
}

std::optional<QuestionStyle> parse_question_style(std::string_view text) {
  if (text == "MC") return QuestionStyle::kMC;
  if (text == "OE") return QuestionStyle::kOE;
  if (text == "OEMC" || text == "OE-MC") return QuestionStyle::kOEMC;
  return std::nullopt;
}

namespace {

bool is_label(const std::string& s) { return s.size() == 1 && s[0] >= 'A' && s[0] <= 'D'; }

}  // namespace

void Question::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::kSchemaError, "question '" + id + "': " + why); };
  if (id.empty()) throw Error(ErrorCode::kSchemaError, "question without id");
  if (text::trim(prompt).empty()) fail("empty question text");
  if (has_options()) {
    if (options.size() != 4) fail("expected 4 options, got " + std::to_string(options.size()));
    if (gold && !is_label(*gold)) fail("gold must be one of A-D, got '" + *gold + "'");
  } else if (!options.empty()) {
    fail("open-ended questions carry no options");
  }
}

json to_json(const Question& q) {
  json node = {{"id", q.id}, {"style", to_string(q.style)}, {"question", q.prompt}};
  if (q.has_options()) node["options"] = q.options;
  if (q.gold) node["gold"] = *q.gold;
  return node;
}

Question question_from_json(const json& node) {
  Question q;
  try {
    q.id = node.at("id").is_string() ? node.at("id").get<std::string>() : node.at("id").dump();
    std::string style = node.at("style").get<std::string>();
    auto parsed = parse_question_style(style);
    if (!parsed) throw Error(ErrorCode::kSchemaError, "question '" + q.id + "': unknown style '" + style + "'");
    q.style = *parsed;
    q.prompt = node.at("question").get<std::string>();
    if (node.contains("options") && !node.at("options").is_null()) {
      q.options = node.at("options").get<std::vector<std::string>>();
    }
    if (node.contains("gold") && !node.at("gold").is_null()) q.gold = node.at("gold").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, "question '" + q.id + "': " + e.what());
  }
  q.validate();
  return q;
}

std::size_t DatasetManifest::count(QuestionStyle style) const {
  auto it = per_style.find(style);
  return it == per_style.end() ? 0 : it->second;
}

bool DatasetManifest::consistent() const {
  std::size_t total = 0;
  for (const auto& [_, n] : per_style) total += n;
  return total == question_count;
}

DatasetManifest compute_manifest(std::string name, const std::vector<Question>& questions) {
  DatasetManifest manifest;
  manifest.name = std::move(name);
  manifest.question_count = questions.size();
  for (auto style : {QuestionStyle::kMC, QuestionStyle::kOEMC, QuestionStyle::kOE}) manifest.per_style[style] = 0;
  for (const auto& q : questions) ++manifest.per_style[q.style];
  return manifest;
}

Dataset parse_dataset(std::string_view document, std::string name) {
  std::vector<json> records;
  std::string trimmed = text::trim(document);
  try {
    if (!trimmed.empty() && trimmed.front() == '[') {
      for (auto& record : json::parse(trimmed)) records.push_back(std::move(record));
    } else {
      std::size_t line_no = 0;
      for (const auto& line : text::split_lines(document)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
          records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
          throw ParseError(std::string("dataset: ") + e.what(), line_no, e.byte);
        }
      }
    }
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < trimmed.size(); ++i) line += trimmed[i] == '\n';
    throw ParseError(std::string("dataset: ") + e.what(), line, e.byte);
  }

  Dataset dataset;
  std::set<std::string> seen;
  for (const auto& record : records) {
    Question q = question_from_json(record);
    if (!seen.insert(q.id).second) throw Error(ErrorCode::kSchemaError, "duplicate question id '" + q.id + "'");
    dataset.questions.push_back(std::move(q));
  }
  dataset.manifest = compute_manifest(std::move(name), dataset.questions);
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open dataset " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), path.stem().string());
}

std::string dataset_to_json(const std::vector<Question>& questions) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < questions.size(); ++i) {
    out += "  " + to_json(questions[i]).dump();
    out += i + 1 < questions.size() ? ",\n" : "\n";
  }
  return out + "]\n";
}

std::pair<Question, Question> derive_styles(const Question& question) {
  if (question.options.size() != 4) {
    throw Error(ErrorCode::kMissingOptions, "question '" + question.id + "' has no four options");
  }
  if (!question.gold) throw Error(ErrorCode::kMissingGold, "question '" + question.id + "'");
  Question mc = question;
  mc.id = question.id + "-MC";
  mc.style = QuestionStyle::kMC;
  Question oemc = question;
  oemc.id = question.id + "-OEMC";
  oemc.style = QuestionStyle::kOEMC;
  return {std::move(mc), std::move(oemc)};
}

PermutationSpec::PermutationSpec() : source_{1, 3, 0, 2} {}

PermutationSpec::PermutationSpec(std::array<int, 4> source) : source_(source) {
  std::array<bool, 4> seen{};
  for (int s : source_) {
    if (s < 0 || s > 3 || seen[static_cast<std::size_t>(s)]) {
      throw Error(ErrorCode::kPrecondition, "permutation is not a bijection over A-D");
    }
    seen[static_cast<std::size_t>(s)] = true;
  }
}

PermutationSpec PermutationSpec::parse(std::string_view positions) {
  std::string compact;
  for (char c : positions) {
    if (c >= 'A' && c <= 'D') compact.push_back(c);
    else if (c >= 'a' && c <= 'd') compact.push_back(static_cast<char>(c - 'a' + 'A'));
  }
  if (compact.size() != 4) throw Error(ErrorCode::kPrecondition, "permutation needs four labels, got '" + std::string(positions) + "'");
  return PermutationSpec({compact[0] - 'A', compact[1] - 'A', compact[2] - 'A', compact[3] - 'A'});
}

PermutationSpec PermutationSpec::identity() { return PermutationSpec({0, 1, 2, 3}); }

PermutationSpec PermutationSpec::inverse() const {
  std::array<int, 4> inv{};
  for (int i = 0; i < 4; ++i) inv[static_cast<std::size_t>(source_[static_cast<std::size_t>(i)])] = i;
  return PermutationSpec(inv);
}

char PermutationSpec::relocate(char old_label) const {
  int old_index = old_label - 'A';
  if (old_index < 0 || old_index > 3) throw Error(ErrorCode::kPrecondition, "label must be A-D");
  for (int i = 0; i < 4; ++i) {
    if (source_[static_cast<std::size_t>(i)] == old_index) return static_cast<char>('A' + i);
  }
  return old_label;  // unreachable for a bijection
}

std::string PermutationSpec::to_string() const {
  std::string out;
  for (int s : source_) out.push_back(static_cast<char>('A' + s));
  return out;
}

Question permute_options(const Question& question, const PermutationSpec& spec) {
  if (!question.has_options()) {
    throw Error(ErrorCode::kStyleError, "question '" + question.id + "' is open-ended and has no options to permute");
  }
  if (question.options.size() != 4) throw Error(ErrorCode::kMissingOptions, "question '" + question.id + "'");
  Question out = question;
  for (std::size_t i = 0; i < 4; ++i) out.options[i] = question.options[static_cast<std::size_t>(spec.source()[i])];
  if (question.gold && is_label(*question.gold)) out.gold = std::string(1, spec.relocate((*question.gold)[0]));
  return out;
}

ScoreResult score(const std::vector<Prediction>& predictions, const std::vector<Question>& questions) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : questions) by_id.emplace(q.id, &q);
  ScoreResult result;
  for (const auto& p : predictions) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw Error(ErrorCode::kUnknownQuestionId, p.id);
    const Question& q = *it->second;
    if (!q.gold) throw Error(ErrorCode::kMissingGold, q.id);
    ScoredQuestion row;
    row.id = q.id;
    row.style = q.style;
    row.predicted = p.answer;
    row.gold = *q.gold;
    row.unparseable = p.unparseable;
    if (!p.unparseable) {
      row.correct = q.style == QuestionStyle::kOE ? text::normalize_answer(p.answer) == text::normalize_answer(*q.gold)
                                                  : p.answer == *q.gold;
    }
    result.correct += row.correct ? 1 : 0;
    result.unparseable += row.unparseable ? 1 : 0;
    result.rows.push_back(std::move(row));
  }
  result.n = predictions.size();
  result.accuracy = result.n == 0 ? 0.0 : static_cast<double>(result.correct) / static_cast<double>(result.n);
  return result;
}

}  // namespace toolrag
