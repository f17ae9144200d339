#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/agent.hpp"
#include "toolrag/dataset.hpp"
#include "toolrag/report.hpp"

namespace toolrag {

struct BenchSetting {
  SessionMode mode = SessionMode::kAgentic;
  bool permuted = false;

  /// Directory-safe id, e.g. "agentic" or "fixed_retrieval-permuted".
  std::string label() const;
  bool operator==(const BenchSetting&) const = default;
};

/// Cartesian product with agentic settings first, so fixed-retrieval runs can
/// freeze the context of an agentic run from the same sweep.
std::vector<BenchSetting> settings_matrix(const std::vector<SessionMode>& modes, const std::vector<bool>& permuted);

struct QuestionResult {
  std::string question_id;
  std::string setting;  // BenchSetting::label()
  QuestionStyle style = QuestionStyle::kMC;
  std::string raw_answer;
  std::string prediction;  // option letter, or answer text for OE
  bool unparseable = false;
  bool budget_exhausted = false;
  std::string error;
  std::size_t adapter_calls = 0;

  nlohmann::json to_json() const;
  static QuestionResult from_json(const nlohmann::json& node);
  bool operator==(const QuestionResult&) const = default;
};

/// Builds the model adapter for one (setting, question) pair; every question
/// gets its own adapter instance.
using AdapterFactory = std::function<std::unique_ptr<LlmAdapter>(const BenchSetting&, const Question&)>;

struct BenchDeps {
  const Registry& registry;
  const Retriever* retriever = nullptr;
  ToolExecutor& executor;
  AdapterFactory adapters;
  std::string model_id;
};

struct BenchOptions {
  std::vector<BenchSetting> settings;
  SessionConfig session;  // mode and frozen context are set per setting
  PermutationSpec permutation;
  std::size_t workers = 1;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> frozen_traces_dir;  // <qid>.jsonl files
  bool resume = true;
  /// Each session gets a fresh LogicalClock, so traces do not depend on
  /// wall time or scheduling.
  bool logical_clock = true;
  nlohmann::json effective_config = nlohmann::json::object();
};

struct BenchOutcome {
  EvalReport report;
  std::vector<QuestionResult> results;  // setting order, then question id
  std::size_t sessions_run = 0;
  std::size_t resumed = 0;
};

/// Runs every question under every setting. Results are cached under
/// out/results/<setting>/<qid>.json and traces written under
/// out/traces/<setting>/<qid>.jsonl; cached questions are not re-run.
/// Adapter failures mark the question unparseable. Throws ConfigError for an
/// empty settings matrix or an invalid session configuration.
BenchOutcome run_bench(const std::vector<Question>& questions, const BenchDeps& deps, const BenchOptions& options);

/// Per (setting, style) rows with deltas, in setting order then MC, OEMC, OE.
std::vector<ReportRow> aggregate_results(const std::vector<QuestionResult>& results,
                                         const std::vector<Question>& questions, std::span<const BenchSetting> settings,
                                         const PermutationSpec& permutation, const std::string& model_id);

/// Script library document answering each (setting, question) correctly with
/// probability `correct_fraction`. Keys are "<setting>:<qid>". When `tool_call`
/// is given, agentic scripts issue it once before answering.
nlohmann::json generate_oracle_script(const std::vector<Question>& questions, std::span<const BenchSetting> settings,
                                      const PermutationSpec& permutation, double correct_fraction, std::uint64_t seed,
                                      const std::optional<FunctionCall>& tool_call = std::nullopt,
                                      const std::string& model_id = "scripted");

}  // namespace toolrag
