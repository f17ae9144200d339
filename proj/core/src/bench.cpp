#include "toolrag/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "toolrag/clock.hpp"
#include "toolrag/error.hpp"
#include "toolrag/prompts.hpp"
#include "toolrag/synthetic.hpp"
#include "toolrag/text.hpp"
#include "toolrag/turn_parser.hpp"

namespace toolrag {

using nlohmann::json;

std::string BenchSetting::label() const {
  std::string out(to_string(mode));
  if (permuted) out += "-permuted";
  return out;
}

std::vector<BenchSetting> settings_matrix(const std::vector<SessionMode>& modes, const std::vector<bool>& permuted) {
  std::vector<BenchSetting> out;
  for (auto mode : modes) {
    for (bool p : permuted) {
      BenchSetting setting{mode, p};
      if (std::find(out.begin(), out.end(), setting) == out.end()) out.push_back(setting);
    }
  }
  std::stable_partition(out.begin(), out.end(), [](const BenchSetting& s) { return s.mode == SessionMode::kAgentic; });
  return out;
}

json QuestionResult::to_json() const {
  return {{"question_id", question_id}, {"setting", setting},       {"style", toolrag::to_string(style)},
          {"raw_answer", raw_answer},   {"prediction", prediction}, {"unparseable", unparseable},
          {"budget_exhausted", budget_exhausted}, {"error", error}, {"adapter_calls", adapter_calls}};
}

QuestionResult QuestionResult::from_json(const json& node) {
  QuestionResult r;
  try {
    r.question_id = node.at("question_id").get<std::string>();
    r.setting = node.at("setting").get<std::string>();
    auto style = parse_question_style(node.at("style").get<std::string>());
    if (!style) throw Error(ErrorCode::kSchemaError, "result: unknown style");
    r.style = *style;
    r.raw_answer = node.at("raw_answer").get<std::string>();
    r.prediction = node.at("prediction").get<std::string>();
    r.unparseable = node.at("unparseable").get<bool>();
    r.budget_exhausted = node.value("budget_exhausted", false);
    r.error = node.value("error", std::string{});
    r.adapter_calls = node.value("adapter_calls", std::size_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("result: ") + e.what());
  }
  return r;
}

namespace {

/// Counts completions for the result record.
class CountingAdapter final : public LlmAdapter {
 public:
  explicit CountingAdapter(LlmAdapter& inner) : inner_(inner) {}
  std::string complete(const CompletionRequest& request) override {
    ++calls;
    return inner_.complete(request);
  }
  std::string id() const override { return inner_.id(); }
  std::size_t calls = 0;

 private:
  LlmAdapter& inner_;
};

std::optional<std::string> read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_trace(const std::filesystem::path& path, const AgentTrace& trace) {
  write_atomic(path, to_jsonl(trace));
}

std::optional<std::string> frozen_context_for(const Question& question, const BenchOptions& options) {
  std::vector<std::filesystem::path> candidates;
  if (options.frozen_traces_dir) candidates.push_back(*options.frozen_traces_dir / (question.id + ".jsonl"));
  for (bool permuted : {false, true}) {
    candidates.push_back(options.out_dir / "traces" / BenchSetting{SessionMode::kAgentic, permuted}.label() /
                         (question.id + ".jsonl"));
  }
  for (const auto& path : candidates) {
    if (!std::filesystem::exists(path)) continue;
    return freeze_context(read_trace_file(path));
  }
  return std::nullopt;
}

QuestionResult run_question(const Question& original, const BenchSetting& setting, const BenchDeps& deps,
                            const BenchOptions& options) {
  const Question question =
      setting.permuted && original.has_options() ? permute_options(original, options.permutation) : original;
  QuestionResult result;
  result.question_id = question.id;
  result.setting = setting.label();
  result.style = question.style;

  SessionConfig config = options.session;
  config.mode = setting.mode;
  config.frozen_context.reset();
  if (setting.mode == SessionMode::kFixedRetrieval) {
    config.frozen_context = frozen_context_for(original, options);
    if (!config.frozen_context) {
      result.unparseable = true;
      result.error = "no frozen context available for question " + question.id;
      return result;
    }
  }

  std::unique_ptr<LlmAdapter> base = deps.adapters(setting, question);
  if (!base) throw Error(ErrorCode::kConfigError, "adapter factory returned no adapter");
  CountingAdapter adapter(*base);
  std::unique_ptr<Clock> clock;
  if (options.logical_clock) clock = std::make_unique<LogicalClock>();
  else clock = std::make_unique<SystemClock>();
  SessionDeps session_deps{deps.registry, deps.retriever, adapter, deps.executor, *clock};

  SessionQuestion session_question{question.id, {question.prompt, {}}};
  if (question.style == QuestionStyle::kMC) session_question.view.options = question.options;
  const std::string session_id = "s-" + text::to_hex(text::fnv1a64(result.setting + "|" + question.id));
  const auto trace_path = options.out_dir / "traces" / result.setting / (question.id + ".jsonl");

  try {
    SessionResult session = run_session(session_question, session_deps, config, session_id);
    write_trace(trace_path, session.trace);
    result.budget_exhausted = session.budget_exhausted;
    result.raw_answer = session.answer;
    switch (question.style) {
      case QuestionStyle::kOE:
        result.prediction = text::trim(session.answer);
        result.unparseable = result.prediction.empty();
        break;
      case QuestionStyle::kMC:
        result.prediction = std::string(1, extract_choice(session.answer, question.options));
        break;
      case QuestionStyle::kOEMC: {
        QuestionView view{question.prompt, question.options};
        std::string context = "Open-ended answer:\n" + text::trim(session.answer);
        result.raw_answer = adapter.complete(build_tq_prompt(context, view));
        result.prediction = std::string(1, extract_choice(result.raw_answer, question.options));
        break;
      }
    }
  } catch (const SessionAborted& e) {
    write_trace(trace_path, e.partial_trace());
    result.unparseable = true;
    result.error = e.what();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    result.unparseable = true;
    result.error = e.what();
  }
  if (result.unparseable) result.prediction.clear();
  result.adapter_calls = adapter.calls;
  return result;
}

}  // namespace

std::vector<ReportRow> aggregate_results(const std::vector<QuestionResult>& results,
                                         const std::vector<Question>& questions, std::span<const BenchSetting> settings,
                                         const PermutationSpec& permutation, const std::string& model_id) {
  std::vector<ReportRow> rows;
  for (const auto& setting : settings) {
    std::vector<Question> graded;
    graded.reserve(questions.size());
    for (const auto& q : questions) {
      graded.push_back(setting.permuted && q.has_options() ? permute_options(q, permutation) : q);
    }
    const std::string label = setting.label();
    for (auto style : {QuestionStyle::kMC, QuestionStyle::kOEMC, QuestionStyle::kOE}) {
      std::vector<Prediction> predictions;
      for (const auto& r : results) {
        if (r.setting != label || r.style != style) continue;
        predictions.push_back({r.question_id, r.prediction, r.unparseable});
      }
      if (predictions.empty()) continue;
      std::sort(predictions.begin(), predictions.end(),
                [](const Prediction& a, const Prediction& b) { return a.id < b.id; });
      ScoreResult scored = score(predictions, graded);
      rows.push_back({model_id, std::string(to_string(setting.mode)), std::string(to_string(style)), setting.permuted,
                      scored.n, scored.accuracy, 0.0, scored.unparseable});
    }
  }
  compute_deltas(rows);
  return rows;
}

BenchOutcome run_bench(const std::vector<Question>& questions, const BenchDeps& deps, const BenchOptions& options) {
  if (options.settings.empty()) throw Error(ErrorCode::kConfigError, "empty settings matrix");
  if (options.workers == 0) throw Error(ErrorCode::kConfigError, "workers must be >= 1");
  if (!deps.adapters) throw Error(ErrorCode::kConfigError, "bench needs an adapter factory");
  {
    SessionConfig probe = options.session;
    probe.mode = SessionMode::kAgentic;
    probe.validate();
  }
  bool has_agentic = std::any_of(options.settings.begin(), options.settings.end(),
                                 [](const BenchSetting& s) { return s.mode == SessionMode::kAgentic; });
  bool has_fixed = std::any_of(options.settings.begin(), options.settings.end(),
                               [](const BenchSetting& s) { return s.mode == SessionMode::kFixedRetrieval; });
  if (has_fixed && !has_agentic && !options.frozen_traces_dir &&
      !std::filesystem::exists(options.out_dir / "traces" / BenchSetting{}.label())) {
    throw Error(ErrorCode::kConfigError, "fixed_retrieval needs frozen traces or an agentic setting in the same run");
  }

  BenchOutcome outcome;
  std::vector<BenchSetting> ordered = options.settings;
  std::stable_partition(ordered.begin(), ordered.end(),
                        [](const BenchSetting& s) { return s.mode == SessionMode::kAgentic; });

  std::map<std::string, QuestionResult> by_key;
  std::mutex mutex;
  std::atomic<std::size_t> sessions_run{0};
  std::atomic<std::size_t> resumed{0};
  for (const auto& setting : ordered) {
    const std::string label = setting.label();
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= questions.size()) return;
        {
          std::lock_guard lock(mutex);
          if (failure) return;
        }
        const Question& q = questions[i];
        const auto cache_path = options.out_dir / "results" / label / (q.id + ".json");
        try {
          QuestionResult result;
          std::optional<std::string> cached = options.resume ? read_text(cache_path) : std::nullopt;
          if (cached) {
            result = QuestionResult::from_json(json::parse(*cached));
            ++resumed;
          } else {
            result = run_question(q, setting, deps, options);
            write_atomic(cache_path, result.to_json().dump(2) + "\n");
            ++sessions_run;
          }
          std::lock_guard lock(mutex);
          by_key[label + "\n" + q.id] = std::move(result);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::size_t threads = std::min(options.workers, std::max<std::size_t>(questions.size(), 1));
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& thread : pool) thread.join();
    }
    if (failure) std::rethrow_exception(failure);
  }

  for (const auto& setting : options.settings) {
    std::vector<const Question*> sorted;
    for (const auto& q : questions) sorted.push_back(&q);
    std::sort(sorted.begin(), sorted.end(), [](const Question* a, const Question* b) { return a->id < b->id; });
    for (const auto* q : sorted) outcome.results.push_back(by_key.at(setting.label() + "\n" + q->id));
  }
  outcome.sessions_run = sessions_run.load();
  outcome.resumed = resumed.load();
  outcome.report.rows =
      aggregate_results(outcome.results, questions, options.settings, options.permutation, deps.model_id);
  outcome.report.config = options.effective_config;
  return outcome;
}

json generate_oracle_script(const std::vector<Question>& questions, std::span<const BenchSetting> settings,
                            const PermutationSpec& permutation, double correct_fraction, std::uint64_t seed,
                            const std::optional<FunctionCall>& tool_call, const std::string& model_id) {
  json by_question = json::object();
  for (const auto& setting : settings) {
    const std::string label = setting.label();
    for (const auto& original : questions) {
      const Question q = setting.permuted && original.has_options() ? permute_options(original, permutation) : original;
      SeededRng rng(text::fnv1a64(std::to_string(seed) + "|" + label + "|" + q.id));
      const bool correct = rng.unit() < correct_fraction;
      const std::string gold = q.gold.value_or("A");
      std::string letter = gold;
      if (q.has_options() && !correct) letter = std::string(1, static_cast<char>('A' + ((gold[0] - 'A' + 1) % 4)));
      std::string open_text;
      if (q.style == QuestionStyle::kOE) open_text = correct ? gold : "no matching label text";
      else open_text = q.options[static_cast<std::size_t>(letter[0] - 'A')];

      json script = json::array();
      const bool agentic = setting.mode == SessionMode::kAgentic;
      if (agentic) {
        script.push_back("Rewritten query: find label information relevant to: " + q.prompt);
        if (tool_call) script.push_back(render_calls(std::span<const FunctionCall>(&*tool_call, 1)));
      }
      switch (q.style) {
        case QuestionStyle::kMC:
          script.push_back(agentic ? "FINAL ANSWER: " + letter : "ANSWER: " + letter);
          break;
        case QuestionStyle::kOE:
          script.push_back(agentic ? "FINAL ANSWER: " + open_text : open_text);
          break;
        case QuestionStyle::kOEMC:
          script.push_back(agentic ? "FINAL ANSWER: " + open_text : open_text);
          script.push_back("ANSWER: " + letter);
          break;
      }
      by_question[label + ":" + q.id] = std::move(script);
    }
  }
  return {{"model", model_id}, {"default", json::array()}, {"by_question", by_question}};
}

}  // namespace toolrag
