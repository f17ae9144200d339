#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace toolrag {

enum class QuestionStyle { kMC, kOE, kOEMC };

std::string_view to_string(QuestionStyle style);
std::optional<QuestionStyle> parse_question_style(std::string_view text);

/// One benchmark item. MC and OE-MC carry exactly four options labelled A-D;
/// gold is an option letter for those and reference text for OE.
struct Question {
  std::string id;
  QuestionStyle style = QuestionStyle::kMC;
  std::string prompt;
  std::vector<std::string> options;
  std::optional<std::string> gold;

  bool has_options() const { return style != QuestionStyle::kOE; }
  /// Throws SchemaError naming the question id.
  void validate() const;

  bool operator==(const Question&) const = default;
};

nlohmann::json to_json(const Question& question);
Question question_from_json(const nlohmann::json& node);

struct DatasetManifest {
  std::string name;
  std::size_t question_count = 0;
  std::map<QuestionStyle, std::size_t> per_style;

  std::size_t count(QuestionStyle style) const;
  bool consistent() const;

  bool operator==(const DatasetManifest&) const = default;
};

DatasetManifest compute_manifest(std::string name, const std::vector<Question>& questions);

struct Dataset {
  DatasetManifest manifest;
  std::vector<Question> questions;
};

/// Accepts a JSON list of question records or JSON Lines. Throws ParseError
/// and SchemaError (with the offending question id).
Dataset parse_dataset(std::string_view document, std::string name = "dataset");
Dataset load_dataset(const std::filesystem::path& path);
std::string dataset_to_json(const std::vector<Question>& questions);

/// MC and OE-MC variants of a labelled question; ids gain "-MC" / "-OEMC".
/// Throws MissingOptions and MissingGold.
std::pair<Question, Question> derive_styles(const Question& question);

/// New position i (A..D) holds the option that used to sit at source[i].
/// The default maps [A, B, C, D] to [B, D, A, C].
class PermutationSpec {
 public:
  PermutationSpec();
  /// Throws Precondition unless `source` is a bijection over 0..3.
  explicit PermutationSpec(std::array<int, 4> source);
  /// Parses "BDAC"-style position lists.
  static PermutationSpec parse(std::string_view positions);
  static PermutationSpec identity();

  PermutationSpec inverse() const;
  /// Label an option moves to. `old_label` in A-D.
  char relocate(char old_label) const;
  const std::array<int, 4>& source() const { return source_; }
  std::string to_string() const;

  bool operator==(const PermutationSpec&) const = default;

 private:
  std::array<int, 4> source_;
};

/// Relocates option texts and remaps the gold label so the gold text is
/// unchanged. Throws StyleError for OE questions.
Question permute_options(const Question& question, const PermutationSpec& spec);

struct Prediction {
  std::string id;
  std::string answer;        // option letter for MC/OE-MC, free text for OE
  bool unparseable = false;  // counted as incorrect

  bool operator==(const Prediction&) const = default;
};

struct ScoredQuestion {
  std::string id;
  QuestionStyle style = QuestionStyle::kMC;
  std::string predicted;
  std::string gold;
  bool correct = false;
  bool unparseable = false;
};

struct ScoreResult {
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t unparseable = 0;
  double accuracy = 0.0;
  std::vector<ScoredQuestion> rows;
};

/// accuracy = correct / predictions. OE answers are compared by normalized
/// exact match. Throws MissingGold and UnknownQuestionId.
ScoreResult score(const std::vector<Prediction>& predictions, const std::vector<Question>& questions);

}  // namespace toolrag
