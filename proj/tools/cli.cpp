#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "toolrag/agent.hpp"
#include "toolrag/bench.hpp"
#include "toolrag/clock.hpp"
#include "toolrag/dataset.hpp"
#include "toolrag/error.hpp"
#include "toolrag/executor.hpp"
#include "toolrag/llm.hpp"
#include "toolrag/registry.hpp"
#include "toolrag/report.hpp"
#include "toolrag/retrieval.hpp"
#include "toolrag/synthetic.hpp"
#include "toolrag/text.hpp"
#include "toolrag/trace.hpp"

namespace toolrag::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json EffectiveConfig::to_json() const {
  return {{"registry", registry},
          {"dataset", dataset},
          {"adapter", adapter},
          {"model", model},
          {"api_key_env", api_key_env},
          {"modes", modes},
          {"permute", permute},
          {"k", k},
          {"max_iters", max_iters},
          {"max_calls", max_calls},
          {"retriever", retriever},
          {"embedding_dim", embedding_dim},
          {"out", out},
          {"seed", seed},
          {"workers", workers},
          {"fixtures_only", fixtures_only},
          {"record", record},
          {"http_fixtures", http_fixtures},
          {"tool_fixtures", tool_fixtures},
          {"repeated_calls", repeated_calls},
          {"frozen_traces", frozen_traces},
          {"resume", resume}};
}

void EffectiveConfig::apply(const json& node) {
  if (!node.is_object()) throw Error(ErrorCode::kConfigError, "config file must hold a JSON object");
  json merged = to_json();
  for (const auto& [key, value] : node.items()) {
    if (!merged.contains(key)) throw Error(ErrorCode::kConfigError, "unknown config key '" + key + "'");
    merged[key] = value;
  }
  try {
    registry = merged.at("registry").get<std::string>();
    dataset = merged.at("dataset").get<std::string>();
    adapter = merged.at("adapter").get<std::string>();
    model = merged.at("model").get<std::string>();
    api_key_env = merged.at("api_key_env").get<std::string>();
    modes = merged.at("modes").is_string() ? std::vector<std::string>{merged.at("modes").get<std::string>()}
                                           : merged.at("modes").get<std::vector<std::string>>();
    permute = merged.at("permute").get<std::string>();
    k = merged.at("k").get<std::size_t>();
    max_iters = merged.at("max_iters").get<std::size_t>();
    max_calls = merged.at("max_calls").get<std::size_t>();
    retriever = merged.at("retriever").get<std::string>();
    embedding_dim = merged.at("embedding_dim").get<std::size_t>();
    out = merged.at("out").get<std::string>();
    seed = merged.at("seed").get<std::uint64_t>();
    workers = merged.at("workers").get<std::size_t>();
    fixtures_only = merged.at("fixtures_only").get<bool>();
    record = merged.at("record").get<bool>();
    http_fixtures = merged.at("http_fixtures").get<std::string>();
    tool_fixtures = merged.at("tool_fixtures").get<std::string>();
    repeated_calls = merged.at("repeated_calls").get<std::string>();
    frozen_traces = merged.at("frozen_traces").get<std::string>();
    resume = merged.at("resume").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("config: ") + e.what());
  }
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream stream(item);
    std::string part;
    while (std::getline(stream, part, ',')) {
      part = text::trim(part);
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

/// Binds one option per config field; only options present on the command
/// line override the config file.
struct FlagValues {
  std::string config_path;
  EffectiveConfig values;
  std::vector<std::string> modes;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App& app) {
    options["config"] = app.add_option("--config", config_path, "JSON config file; flags override it");
    options["registry"] = app.add_option("--registry", values.registry, "Tool registry JSON file");
    options["dataset"] = app.add_option("--dataset", values.dataset, "Dataset file (JSON list or JSONL)");
    options["adapter"] =
        app.add_option("--adapter", values.adapter, "Model adapter: scripted:<script.json> or http:<endpoint>");
    options["model"] = app.add_option("--model", values.model, "Model name for the http adapter");
    options["api_key_env"] =
        app.add_option("--api-key-env", values.api_key_env, "Environment variable holding the http adapter key");
    options["modes"] = app.add_option("--mode", modes, "Session modes: agentic, fixed_retrieval, no_retrieval")
                           ->delimiter(',');
    options["permute"] = app.add_option("--permute", values.permute, "Option permutation: off, on or both");
    options["k"] = app.add_option("--k", values.k, "Retrieval depth (top-k)");
    options["max_iters"] = app.add_option("--max-iters", values.max_iters, "Agent iteration budget");
    options["max_calls"] = app.add_option("--max-calls", values.max_calls, "Function calls executed per round");
    options["retriever"] = app.add_option("--retriever", values.retriever, "Retrieval backend: bm25, dense, none");
    options["embedding_dim"] =
        app.add_option("--embedding-dim", values.embedding_dim, "Dimension of the hash embedding");
    options["out"] = app.add_option("--out", values.out, "Output directory or file");
    options["seed"] = app.add_option("--seed", values.seed, "Seed for synthetic generation");
    options["workers"] = app.add_option("--workers", values.workers, "Concurrent bench workers");
    options["fixtures_only"] =
        app.add_flag("--fixtures-only", values.fixtures_only, "Serve HTTP from recorded fixtures only; no network");
    options["record"] = app.add_flag("--record", values.record, "Fetch live and record responses as fixtures");
    options["http_fixtures"] =
        app.add_option("--http-fixtures", values.http_fixtures, "Recorded HTTP fixture directory");
    options["tool_fixtures"] =
        app.add_option("--tool-fixtures", values.tool_fixtures, "Root for fixture-bound tools");
    options["repeated_calls"] = app.add_option("--repeated-calls", values.repeated_calls,
                                               "Repeated identical calls: cached, reject or allow");
    options["frozen_traces"] =
        app.add_option("--frozen-traces", values.frozen_traces, "Trace directory supplying fixed-retrieval context");
    options["resume"] = app.add_flag("--resume,!--no-resume", values.resume, "Reuse cached per-question results");
  }

  EffectiveConfig resolve() const {
    EffectiveConfig config;
    if (!config_path.empty()) {
      try {
        config.apply(json::parse(read_text(config_path)));
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what(), 1, e.byte);
      }
    }
    json flags = json::object();
    json given = values.to_json();
    for (const auto& [key, option] : options) {
      if (key == "config" || option->count() == 0) continue;
      flags[key] = key == "modes" ? json(split_list(modes)) : given.at(key);
    }
    config.apply(flags);
    return config;
  }
};

fs::path registry_dir(const EffectiveConfig& config) {
  return config.registry.empty() ? fs::path("data") : fs::path(config.registry).parent_path();
}

ExecutionEnv make_env(const EffectiveConfig& config) {
  if (config.fixtures_only && config.record) throw Error(ErrorCode::kConfigError, "--fixtures-only and --record conflict");
  ExecutionEnv env;
  env.mode = config.fixtures_only ? FetchMode::kFixturesOnly : config.record ? FetchMode::kRecord : FetchMode::kLive;
  env.http_fixture_dir = config.http_fixtures.empty() ? registry_dir(config) / "fixtures" / "http" : fs::path(config.http_fixtures);
  env.tool_fixture_dir = config.tool_fixtures.empty() ? registry_dir(config) / "fixtures" / "tools" : fs::path(config.tool_fixtures);
  return env;
}

std::shared_ptr<Transport> network_for(const EffectiveConfig& config, CliContext& context) {
  if (context.network) return context.network;
  if (config.fixtures_only) return nullptr;
  context.network = std::make_shared<HttplibTransport>();
  return context.network;
}

Registry require_registry(const EffectiveConfig& config) {
  if (config.registry.empty()) throw Error(ErrorCode::kConfigError, "--registry is required");
  return load_registry_file(config.registry);
}

RetrievalConfig retrieval_config(const EffectiveConfig& config) {
  RetrievalConfig retrieval;
  retrieval.backend = parse_retrieval_backend(config.retriever);
  retrieval.k = config.k;
  retrieval.validate();
  return retrieval;
}

SessionConfig session_config(const EffectiveConfig& config) {
  SessionConfig session;
  session.retrieval = retrieval_config(config);
  session.max_iterations = config.max_iters;
  session.max_calls_per_round = config.max_calls;
  auto policy = parse_repeated_call_policy(config.repeated_calls);
  if (!policy) throw Error(ErrorCode::kConfigError, "unknown repeated-call policy '" + config.repeated_calls + "'");
  session.repeated_call_policy = *policy;
  return session;
}

std::vector<SessionMode> parse_modes(const EffectiveConfig& config) {
  std::vector<SessionMode> modes;
  for (const auto& name : config.modes) {
    auto mode = parse_session_mode(name);
    if (!mode) throw Error(ErrorCode::kConfigError, "unknown mode '" + name + "'");
    modes.push_back(*mode);
  }
  return modes;
}

std::vector<bool> parse_permute(const std::string& permute) {
  if (permute == "off") return {false};
  if (permute == "on") return {true};
  if (permute == "both") return {false, true};
  throw Error(ErrorCode::kConfigError, "--permute must be off, on or both, got '" + permute + "'");
}

/// Builds adapters from the --adapter spec. Scripted sessions look up their
/// script by the given keys in order.
class AdapterSource {
 public:
  AdapterSource(const EffectiveConfig& config, CliContext& context) {
    const std::string& spec = config.adapter;
    if (spec.rfind("scripted:", 0) == 0) {
      library_ = ScriptLibrary::load(spec.substr(9));
      model_id_ = library_->model_id();
    } else if (spec.rfind("http:", 0) == 0) {
      HttpAdapterConfig http;
      http.base_url = spec.substr(5);
      http.model = config.model;
      http.api_key_env = config.api_key_env;
      ExecutionEnv env = make_env(config);
      auto store = std::make_shared<FixtureStore>(env.http_fixture_dir);
      transport_ = std::make_shared<ReplayTransport>(network_for(config, context), store, env.mode, clock_);
      http_ = http;
      model_id_ = http.model;
      if (model_id_.empty()) throw Error(ErrorCode::kConfigError, "http adapter needs --model");
    } else {
      throw Error(ErrorCode::kConfigError, "--adapter must be scripted:<path> or http:<endpoint>, got '" + spec + "'");
    }
  }

  std::unique_ptr<LlmAdapter> make(const std::vector<std::string>& keys) const {
    if (library_) return library_->session(std::span<const std::string>(keys));
    return std::make_unique<HttpAdapter>(*http_, transport_);
  }

  const std::string& model_id() const { return model_id_; }

 private:
  std::optional<ScriptLibrary> library_;
  std::optional<HttpAdapterConfig> http_;
  std::shared_ptr<Transport> transport_;
  SystemClock clock_;
  std::string model_id_;
};

std::shared_ptr<const EmbeddingProvider> provider_for(const RetrievalConfig& retrieval, std::size_t dim) {
  return retrieval.backend == RetrievalBackend::kDense ? hash_embedding_provider(dim) : nullptr;
}

int cmd_ask(const EffectiveConfig& config, const std::string& question, const std::vector<std::string>& options,
            CliContext& context) {
  Registry registry = require_registry(config);
  SessionConfig session = session_config(config);
  session.mode = SessionMode::kAgentic;
  Retriever retriever = Retriever::build(registry, session.retrieval, provider_for(session.retrieval, config.embedding_dim));
  AdapterSource adapters(config, context);
  auto llm = adapters.make({"ask"});
  LogicalClock clock;
  Executor executor(make_env(config), network_for(config, context), clock);
  if (!options.empty() && options.size() != 4) throw Error(ErrorCode::kConfigError, "--choices needs exactly 4 options");
  SessionQuestion q{"ask", {question, options}};
  fs::path trace_path = fs::path(config.out) / "ask_trace.jsonl";
  try {
    SessionResult result = run_session(q, {registry, &retriever, *llm, executor, clock}, session);
    write_text(trace_path, to_jsonl(result.trace));
    context.out << result.answer << "\n";
    if (result.budget_exhausted) {
      context.err << "budget exhausted after " << session.max_iterations << " iterations\n";
      return 2;
    }
    return 0;
  } catch (const SessionAborted& e) {
    write_text(trace_path, to_jsonl(e.partial_trace()));
    throw;
  }
}

int cmd_bench(const EffectiveConfig& config, CliContext& context) {
  if (config.dataset.empty()) throw Error(ErrorCode::kConfigError, "--dataset is required");
  Dataset dataset = load_dataset(config.dataset);
  auto modes = parse_modes(config);
  auto permuted = parse_permute(config.permute);
  auto settings = settings_matrix(modes, permuted);
  if (settings.empty()) throw Error(ErrorCode::kConfigError, "empty settings matrix");

  bool agentic = std::any_of(modes.begin(), modes.end(), [](SessionMode m) { return m == SessionMode::kAgentic; });
  Registry registry = config.registry.empty() ? Registry() : load_registry_file(config.registry);
  if (agentic && registry.empty()) throw Error(ErrorCode::kConfigError, "agentic mode needs --registry");
  SessionConfig session = session_config(config);
  std::optional<Retriever> retriever;
  if (!registry.empty()) {
    retriever = Retriever::build(registry, session.retrieval, provider_for(session.retrieval, config.embedding_dim));
  }

  AdapterSource adapters(config, context);
  SystemClock clock;
  Executor executor(make_env(config), network_for(config, context), clock);
  BenchDeps deps{registry, retriever ? &*retriever : nullptr, executor,
                 [&](const BenchSetting& setting, const Question& q) {
                   return adapters.make({setting.label() + ":" + q.id, q.id});
                 },
                 adapters.model_id()};
  BenchOptions options;
  options.settings = settings;
  options.session = session;
  options.workers = config.workers;
  options.out_dir = config.out;
  if (!config.frozen_traces.empty()) options.frozen_traces_dir = fs::path(config.frozen_traces);
  options.resume = config.resume;
  options.effective_config = config.to_json();

  BenchOutcome outcome = run_bench(dataset.questions, deps, options);
  ReportFiles files = emit_report(outcome.report, config.out, "report");
  context.out << report_to_csv(outcome.report.rows);
  context.err << "sessions run: " << outcome.sessions_run << ", resumed: " << outcome.resumed
              << ", report: " << files.csv.string() << "\n";
  return 0;
}

int cmd_retrievers(const EffectiveConfig& config, const std::string& corpus_path,
                   const std::vector<std::string>& backends, CliContext& context) {
  if (corpus_path.empty()) throw Error(ErrorCode::kConfigError, "--corpus is required");
  SyntheticCorpus corpus = load_corpus_file(corpus_path);
  std::vector<std::string> names = split_list(backends);
  if (names.empty()) throw Error(ErrorCode::kConfigError, "--backends is empty");
  EvalReport report;
  for (const auto& name : names) {
    RetrievalConfig retrieval;
    retrieval.backend = parse_retrieval_backend(name);
    retrieval.k = config.k;
    Retriever retriever = Retriever::build(corpus.registry, retrieval, provider_for(retrieval, config.embedding_dim));
    std::map<std::string, RankedTools> rankings;
    for (const auto& q : corpus.queries) rankings[q.id] = retrieve_top_k(retriever, q.text, config.k);
    report.retrieval.push_back(retrieval_metrics(rankings, corpus.gold(), config.k, retriever.backend_id()));
  }
  json echoed = config.to_json();
  echoed["corpus"] = corpus_path;
  echoed["backends"] = names;
  report.config = echoed;
  emit_report(report, config.out, "retrievers");
  context.out << retrieval_to_csv(report.retrieval);
  return 0;
}

int cmd_registry_validate(const EffectiveConfig& config, CliContext& context) {
  Registry registry = require_registry(config);
  context.out << "ok: " << registry.size() << " tools\n";
  for (const auto& warning : registry.lint()) context.out << "warning: " << warning << "\n";
  return 0;
}

int cmd_record(const EffectiveConfig& config, const std::string& manifest, const std::vector<std::string>& drugs,
               CliContext& context) {
  ExecutionEnv env = make_env(config);
  if (manifest.empty() && drugs.empty()) throw Error(ErrorCode::kConfigError, "record-fixtures needs --import or --drug");
  if (!manifest.empty()) {
    std::size_t written = import_captured_responses(manifest, FixtureStore(env.http_fixture_dir));
    context.out << "imported " << written << " fixtures into " << env.http_fixture_dir.string() << "\n";
  }
  if (!drugs.empty()) {
    if (config.fixtures_only) throw Error(ErrorCode::kConfigError, "recording needs network access");
    env.mode = FetchMode::kRecord;
    SystemClock clock;
    Executor executor(env, network_for(config, context), clock);
    for (const auto& drug : drugs) {
      DailyMedResult result = executor.dailymed_lookup(drug);
      context.out << "recorded " << drug << ": set id " << result.document.set_id << ", version "
                  << result.document.version << ", " << result.document.sections.size() << " sections\n";
    }
  }
  return 0;
}

int cmd_trace_inspect(const std::string& path, bool freeze, CliContext& context) {
  AgentTrace trace = read_trace_file(path);
  if (freeze) {
    context.out << freeze_context(trace) << "\n";
    return 0;
  }
  context.out << "session: " << trace.session_id << "\n";
  context.out << "question: " << trace.question_id << "\n";
  context.out << "steps: " << trace.steps.size() << "\n";
  for (std::string_view kind : {"rewrite", "retrieval", "call_round", "feedback", "context", "termination"}) {
    if (std::size_t n = trace.count(kind)) context.out << "  " << kind << ": " << n << "\n";
  }
  std::size_t calls = 0;
  std::map<std::string, std::size_t> statuses;
  for (const auto& step : trace.steps) {
    if (const auto* round = std::get_if<CallRoundStep>(&step.body)) {
      for (const auto& record : round->calls) {
        ++calls;
        ++statuses[std::string(to_string(record.outcome.status))];
      }
    }
  }
  context.out << "calls: " << calls;
  for (const auto& [status, n] : statuses) context.out << " " << status << "=" << n;
  context.out << "\n";
  if (const auto* end = trace.termination()) {
    context.out << "termination: " << (end->reason == TerminationReason::kFinal ? "final" : "budget_exhausted") << "\n";
    context.out << "answer: " << end->answer << "\n";
  } else {
    context.out << "termination: none (partial trace)\n";
  }
  return 0;
}

int cmd_gen_dataset(const EffectiveConfig& config, const std::string& shape_text, const std::string& script_out,
                    double correct_fraction, const std::string& tool_call, CliContext& context) {
  DatasetShape shape = parse_dataset_shape(shape_text);
  auto questions = generate_dataset(shape, config.seed);
  fs::path out = config.out == "out" ? fs::path("out") / (shape.name + ".json") : fs::path(config.out);
  write_text(out, dataset_to_json(questions));
  DatasetManifest manifest = compute_manifest(shape.name, questions);
  context.out << manifest.name << ": " << manifest.question_count << " questions (MC "
              << manifest.count(QuestionStyle::kMC) << ", OEMC " << manifest.count(QuestionStyle::kOEMC) << ", OE "
              << manifest.count(QuestionStyle::kOE) << ") -> " << out.string() << "\n";
  if (!script_out.empty()) {
    std::optional<FunctionCall> call;
    if (!tool_call.empty()) {
      try {
        json node = json::parse(tool_call);
        call = FunctionCall{node.at("name").get<std::string>(), node.value("arguments", json::object())};
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kConfigError, std::string("--tool-call: ") + e.what());
      }
    }
    auto settings = settings_matrix(parse_modes(config), parse_permute(config.permute));
    json script = generate_oracle_script(questions, settings, PermutationSpec(), correct_fraction, config.seed, call);
    write_text(script_out, script.dump(2) + "\n");
    context.out << "script -> " << script_out << "\n";
  }
  return 0;
}

int cmd_gen_corpus(const EffectiveConfig& config, const std::string& kind, std::size_t tools, std::size_t queries,
                   CliContext& context) {
  SyntheticCorpus corpus;
  if (kind == "lexical") corpus = generate_lexical_corpus(tools, queries, config.seed);
  else if (kind == "paraphrase") corpus = generate_paraphrase_corpus(tools, queries, config.seed);
  else throw Error(ErrorCode::kConfigError, "--kind must be lexical or paraphrase, got '" + kind + "'");
  fs::path out = config.out == "out" ? fs::path("out") / (kind + "_corpus.json") : fs::path(config.out);
  write_text(out, corpus_to_json(corpus).dump(2) + "\n");
  context.out << kind << " corpus: " << corpus.registry.size() << " tools, " << corpus.queries.size()
              << " queries -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliContext& context) {
  CLI::App app{"Tool-retrieval agent harness for drug-label question answering"};
  app.name("toolrag");
  app.require_subcommand(1);
  FlagValues flags;
  flags.add(app);

  auto* ask = app.add_subcommand("ask", "Answer one question agentically; exit 2 when the budget runs out");
  std::string question;
  std::vector<std::string> choices;
  ask->add_option("question", question, "Question text")->required();
  ask->add_option("--choices", choices, "Four answer options (comma separated)")->delimiter(',');

  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep over modes x permutation");

  auto* retrievers = app.add_subcommand("retrievers", "Compare retrieval backends on an annotated corpus");
  std::string corpus_path;
  std::vector<std::string> backends = {"bm25", "dense-hash", "none"};
  retrievers->add_option("--corpus", corpus_path, "Annotated corpus from gen-corpus")->required();
  retrievers->add_option("--backends", backends, "Backends to compare")->delimiter(',');

  auto* validate = app.add_subcommand("registry-validate", "Load and lint a tool registry");

  auto* record = app.add_subcommand("record-fixtures", "Import captured responses or record DailyMed lookups");
  std::string import_manifest;
  std::vector<std::string> drugs;
  record->add_option("--import", import_manifest, "Capture manifest to import into the fixture store");
  record->add_option("--drug", drugs, "Drug name to look up live and record");

  auto* inspect = app.add_subcommand("trace-inspect", "Summarize a trace file or print its frozen context");
  std::string trace_path;
  bool freeze = false;
  inspect->add_option("trace", trace_path, "Trace JSONL file")->required();
  inspect->add_flag("--freeze", freeze, "Print the frozen context used by fixed-retrieval runs");

  auto* gen_dataset = app.add_subcommand("gen-dataset", "Generate a seeded synthetic dataset");
  std::string shape = "validation";
  std::string script_out;
  double correct_fraction = 0.75;
  std::string tool_call;
  gen_dataset->add_option("--shape", shape, "validation, test1, test2 or name:MC/OEMC/OE");
  gen_dataset->add_option("--script-out", script_out, "Also write a scripted-adapter file for the sweep");
  gen_dataset->add_option("--correct-fraction", correct_fraction, "Share of scripted answers that are correct")
      ->check(CLI::Range(0.0, 1.0));
  gen_dataset->add_option("--tool-call", tool_call, "JSON call issued once by agentic scripts");

  auto* gen_corpus = app.add_subcommand("gen-corpus", "Generate an annotated retrieval corpus");
  std::string kind = "lexical";
  std::size_t corpus_tools = 60;
  std::size_t corpus_queries = 100;
  gen_corpus->add_option("--kind", kind, "lexical or paraphrase");
  gen_corpus->add_option("--tools", corpus_tools, "Number of tools");
  gen_corpus->add_option("--queries", corpus_queries, "Number of queries");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, context.out, context.err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, context.out, context.err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, context.out, context.err);
    return 1;
  }

  try {
    EffectiveConfig config = flags.resolve();
    if (ask->parsed()) return cmd_ask(config, question, choices, context);
    if (bench->parsed()) return cmd_bench(config, context);
    if (retrievers->parsed()) return cmd_retrievers(config, corpus_path, backends, context);
    if (validate->parsed()) return cmd_registry_validate(config, context);
    if (record->parsed()) return cmd_record(config, import_manifest, drugs, context);
    if (inspect->parsed()) return cmd_trace_inspect(trace_path, freeze, context);
    if (gen_dataset->parsed()) return cmd_gen_dataset(config, shape, script_out, correct_fraction, tool_call, context);
    if (gen_corpus->parsed()) return cmd_gen_corpus(config, kind, corpus_tools, corpus_queries, context);
  } catch (const std::exception& e) {
    context.err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace toolrag::cli
