// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria with self-contradictory targets print UNATTAINABLE.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "support.hpp"
#include "toolrag/dataset.hpp"
#include "toolrag/executor.hpp"
#include "toolrag/report.hpp"
#include "toolrag/retrieval.hpp"
#include "toolrag/synthetic.hpp"

using namespace toolrag;
namespace ts = testing_support;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

/// A criterion whose stated targets contradict each other. Reported, never
/// counted as a pass.
struct Unattainable {
  std::string detail;
};

/// Accumulates the first failure message; later checks are still evaluated.
struct Checker {
  bool ok = true;
  std::string failure;
  void expect(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      failure = message;
    }
  }
  Verdict verdict(const std::string& detail) const { return {ok, ok ? detail : failure}; }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Verdict bm25_matches_oracle() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  Checker c;
  std::size_t corpora = 0, queries = 0;
  double worst = 0.0;
  for (; corpora < 250; ++corpora) {
    auto docs = oracle::random_docs(rng, 50);
    Registry registry = ts::registry_from_docs(docs);
    Bm25Index index = Bm25Index::build(registry);
    Retriever retriever = Retriever::build(registry, {});
    for (int q = 0; q < 6; ++q, ++queries) {
      std::string query = oracle::random_query(rng, docs);
      auto expected = oracle::bm25_scores(docs, query);
      auto actual = index.score_all(query);
      c.expect(actual.size() == expected.size(), "score vector size differs");
      for (std::size_t i = 0; i < std::min(actual.size(), expected.size()); ++i) {
        worst = std::max(worst, std::abs(actual[i] - expected[i]));
      }
      auto ranked = retriever.rank_all(query);
      auto oracle_rank = oracle::rank(docs, expected);
      c.expect(oracle::top_names(ranked, ranked.size()) == oracle::top_names(oracle_rank, oracle_rank.size()),
               "ranking differs for query '" + query + "'");
    }
  }
  double elapsed = seconds_since(start);
  c.expect(worst <= 1e-9, "max score difference " + std::to_string(worst));
  c.expect(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
  std::ostringstream detail;
  detail << corpora << " corpora, " << queries << " queries, max |diff| " << worst << ", " << elapsed << " s";
  return c.verdict(detail.str());
}

Verdict top_k_contract() {
  std::mt19937_64 rng(5);
  Checker c;
  std::size_t cases = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto docs = oracle::random_docs(rng, 30);
    Registry registry = ts::registry_from_docs(docs);
    Retriever retriever = Retriever::build(registry, {});
    std::string query = oracle::random_query(rng, docs);
    auto oracle_rank = oracle::rank(docs, oracle::bm25_scores(docs, query));
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{10}, std::size_t{100}}) {
      ++cases;
      RankedTools top = retrieve_top_k(retriever, query, k);
      c.expect(top.entries.size() == std::min(k, docs.size()), "wrong top-k size");
      c.expect(top.k == k, "k not recorded");
      c.expect(oracle::top_names(top.entries, k) == oracle::top_names(oracle_rank, k), "top-k set/order differs");
      for (std::size_t i = 1; i < top.entries.size(); ++i) {
        const auto& a = top.entries[i - 1];
        const auto& b = top.entries[i];
        c.expect(a.score > b.score || (a.score == b.score && a.tool < b.tool), "entries not sorted");
      }
    }
    c.expect(retrieve_top_k(retriever, query, RetrievalConfig{}).entries.size() == std::min<std::size_t>(10, docs.size()),
             "default k is not 10");
  }
  return c.verdict(std::to_string(cases) + " (corpus, k) cases");
}

Verdict permutation_suite() {
  Checker c;
  std::mt19937_64 rng(99);
  std::vector<std::array<int, 4>> all;
  std::array<int, 4> source{0, 1, 2, 3};
  do all.push_back(source);
  while (std::next_permutation(source.begin(), source.end()));
  std::vector<PermutationSpec> specs{PermutationSpec{}};
  std::shuffle(all.begin(), all.end(), rng);
  for (const auto& s : all) {
    if (specs.size() == 10) break;
    if (PermutationSpec(s) != PermutationSpec{}) specs.emplace_back(s);
  }
  c.expect(PermutationSpec{}.to_string() == "BDAC", "default permutation is not BDAC");

  auto questions = generate_dataset(parse_dataset_shape("perm:500/500/0"), 3);
  std::vector<Prediction> predictions;
  for (const auto& q : questions) {
    predictions.push_back({q.id, std::string(1, static_cast<char>('A' + rng() % 4)), false});
  }
  double base = score(predictions, questions).accuracy;
  for (const auto& spec : specs) {
    std::vector<Question> permuted;
    std::vector<Prediction> moved;
    for (std::size_t i = 0; i < questions.size(); ++i) {
      permuted.push_back(permute_options(questions[i], spec));
      c.expect(permute_options(permuted.back(), spec.inverse()) == questions[i],
               "inverse is not identity for " + spec.to_string());
      moved.push_back({predictions[i].id, std::string(1, spec.relocate(predictions[i].answer[0])), false});
    }
    c.expect(score(moved, permuted).accuracy == base, "accuracy changed under " + spec.to_string());
  }
  return c.verdict(std::to_string(questions.size()) + " questions x " + std::to_string(specs.size()) +
                   " bijections, accuracy " + std::to_string(base));
}

Verdict manifests() {
  Checker c;
  std::ostringstream detail;
  struct Expected {
    DatasetShape shape;
    std::size_t total, mc, oemc, oe;
  };
  // test1 keeps its per-style counts; their sum (2079) is checked here and the
  // stated total of 2097 is reported separately.
  for (const auto& e : {Expected{validation_shape(), 459, 183, 230, 46}, Expected{test1_shape(), 2079, 663, 1274, 142},
                        Expected{test2_shape(), 2491, 779, 1474, 238}}) {
    DatasetManifest m = compute_manifest(e.shape.name, generate_dataset(e.shape, 7));
    c.expect(m.question_count == e.total && m.count(QuestionStyle::kMC) == e.mc &&
                 m.count(QuestionStyle::kOEMC) == e.oemc && m.count(QuestionStyle::kOE) == e.oe && m.consistent(),
             "manifest mismatch for " + e.shape.name);
    detail << e.shape.name << "=" << m.question_count << " ";
  }
  return c.verdict(detail.str());
}

Unattainable test1_stated_total() {
  DatasetShape shape = test1_shape();
  return {"per-style counts " + std::to_string(shape.mc) + "/" + std::to_string(shape.oemc) + "/" +
          std::to_string(shape.oe) + " sum to " + std::to_string(shape.total()) +
          ", so a total of 2097 cannot hold simultaneously; per-style counts are kept"};
}

Verdict golden_traces() {
  Checker c;
  for (const auto& name : ts::scenario_names()) {
    auto path = ts::golden_path(name);
    if (!std::filesystem::exists(path)) {
      c.expect(false, "missing golden file " + path.string());
      continue;
    }
    std::string first = to_jsonl(ts::run_scenario(name).result.trace);
    std::string second = to_jsonl(ts::run_scenario(name).result.trace);
    c.expect(first == second, name + " is not reproducible");
    c.expect(first == ts::read_file(path), name + " differs from golden file");
  }
  return c.verdict(std::to_string(ts::scenario_names().size()) + " scenarios byte-identical");
}

Verdict repeated_call_policy() {
  Checker c;
  const std::string call = R"([{"name": "interaction_checker", "arguments": {"drug_name": "warfarin"}}])";
  Registry registry = ts::bundled_registry();
  Retriever retriever = Retriever::build(registry, {});
  auto count_for = [&](RepeatedCallPolicy policy) {
    ts::CountingExecutor executor;
    LogicalClock clock;
    ScriptedAdapter adapter({"Rewritten query: warfarin", call, call, "FINAL ANSWER: B"});
    SessionConfig config;
    config.repeated_call_policy = policy;
    run_session(ts::scenario_question(), {registry, &retriever, adapter, executor, clock}, config);
    return executor.count();
  };
  std::size_t cached = count_for(RepeatedCallPolicy::kCached);
  std::size_t allow = count_for(RepeatedCallPolicy::kAllow);
  c.expect(cached == 1, "cached policy executed " + std::to_string(cached) + " times");
  c.expect(allow == 2, "allow policy executed " + std::to_string(allow) + " times");
  return c.verdict("cached=" + std::to_string(cached) + " allow=" + std::to_string(allow));
}

Verdict validation_feedback() {
  Checker c;
  auto run = ts::run_scenario("malformed_param_feedback");
  c.expect(run.requests.size() >= 3, "session ended early");
  if (run.requests.size() >= 3) {
    std::string next = run.requests[2].flatten();
    c.expect(next.find("UnknownParam(drugname)") != std::string::npos, "unknown parameter not reported");
    c.expect(next.find("MissingRequiredParam(drug_name)") != std::string::npos, "expected parameter not named");
  }
  c.expect(run.result.answer == "B", "session did not finish with the scripted answer");
  return c.verdict("next prompt names drugname and drug_name");
}

Verdict fixtures_only_sweep() {
  Checker c;
  ts::TempDir dir;
  auto network = std::make_shared<ts::FakeTransport>();
  auto run = [&](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    cli::CliContext context{out, err, network};
    int code = cli::run_cli(args, context);
    c.expect(code == 0, "exit " + std::to_string(code) + ": " + err.str());
    return out.str();
  };
  std::string data = (dir / "sweep.json").string();
  std::string script = (dir / "sweep_script.json").string();
  std::string registry = (ts::data_dir() / "registry.json").string();
  run({"gen-dataset", "--shape", "sweep:8/8/4", "--out", data, "--script-out", script, "--mode",
       "agentic,fixed_retrieval,no_retrieval", "--tool-call",
       R"({"name": "dailymed_get_spl", "arguments": {"drug_name": "warfarin"}})"});
  auto start = std::chrono::steady_clock::now();
  std::string csv = run({"bench", "--registry", registry, "--dataset", data, "--adapter", "scripted:" + script,
                         "--mode", "agentic,fixed_retrieval,no_retrieval", "--fixtures-only", "--out",
                         (dir / "out").string()});
  double elapsed = seconds_since(start);
  c.expect(network->calls() == 0, std::to_string(network->calls()) + " network calls");
  c.expect(elapsed < 60.0, "sweep took " + std::to_string(elapsed) + " s");
  std::size_t rows = 0, sessions = 0;
  try {
    for (const auto& row : parse_report_csv(csv)) {
      ++rows;
      sessions += row.n;
      c.expect(row.unparseable == 0, row.setting + "/" + row.style + " has unparseable answers");
    }
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  c.expect(sessions == 60, "expected 60 sessions, got " + std::to_string(sessions));
  std::ostringstream detail;
  detail << "20 questions x 3 modes, " << rows << " rows, 0 network calls, " << elapsed << " s";
  return c.verdict(detail.str());
}

Verdict dailymed_fixture_and_replay() {
  Checker c;
  auto network = std::make_shared<ts::FakeTransport>();
  network->serve_fixtures(ts::data_dir() / "fixtures" / "http");
  auto record_into = [&](const std::filesystem::path& dir) {
    ExecutionEnv env = ts::fixture_env();
    env.mode = FetchMode::kRecord;
    env.http_fixture_dir = dir;
    LogicalClock clock;
    Executor recorder(env, network, clock);
    return recorder.dailymed_lookup("warfarin");
  };
  ts::TempDir first, second;
  DailyMedResult live = record_into(first.path());
  record_into(second.path());

  ExecutionEnv replay_env = ts::fixture_env();
  replay_env.http_fixture_dir = first.path();
  LogicalClock clock;
  Executor replayer(replay_env, nullptr, clock);
  DailyMedResult replayed = replayer.dailymed_lookup("warfarin");

  bool has_warning = false;
  for (const auto& s : replayed.document.sections) has_warning |= s.title.find("WARNING") != std::string::npos;
  c.expect(replayed.document.valid(), "replayed document is invalid");
  c.expect(has_warning, "no warnings section");
  c.expect(replayed.document == live.document, "replayed document differs from recorded one");
  c.expect(replayer.upstream_calls() == 0, "replay touched the network");
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(first.path())) {
    ++files;
    auto again = second / entry.path().filename().string();
    c.expect(std::filesystem::exists(again) && ts::read_file(again) == ts::read_file(entry.path()),
             "re-recorded fixture " + entry.path().filename().string() + " is not byte-identical");
  }
  c.expect(files >= 2, "expected listing and document fixtures");
  return c.verdict("set id " + replayed.document.set_id + " v" + std::to_string(replayed.document.version) + ", " +
                   std::to_string(replayed.document.sections.size()) + " sections, " + std::to_string(files) +
                   " recorded fixtures byte-identical across recordings");
}

double recall_at(const SyntheticCorpus& corpus, const Retriever& retriever,
                 const std::function<std::vector<double>(const std::string&)>& oracle_scores, std::size_t k,
                 Checker& c) {
  auto docs = ts::docs_from_registry(corpus.registry);
  std::size_t hits = 0;
  for (const auto& q : corpus.queries) {
    RankedTools top = retrieve_top_k(retriever, q.text, k);
    c.expect(oracle::equivalent_rankings(retriever.rank_all(q.text), oracle::rank(docs, oracle_scores(q.text))),
             "ranking differs from brute force for " + q.id);
    auto names = oracle::top_names(top.entries, k);
    if (std::find(names.begin(), names.end(), q.gold_tools.front()) != names.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(corpus.queries.size());
}

Verdict retrieval_backends() {
  Checker c;
  const std::size_t k = 10;
  auto provider = hash_embedding_provider(kDefaultEmbeddingDimension);
  RetrievalConfig dense_config;
  dense_config.backend = RetrievalBackend::kDense;

  SyntheticCorpus para = generate_paraphrase_corpus(60, 100, 7);
  auto para_docs = ts::docs_from_registry(para.registry);
  double para_bm25 = recall_at(para, Retriever::build(para.registry, {}),
                               [&](const std::string& q) { return oracle::bm25_scores(para_docs, q); }, k, c);
  double para_dense = recall_at(para, Retriever::build(para.registry, dense_config, provider),
                                [&](const std::string& q) { return oracle::dense_scores(para_docs, q, *provider); }, k, c);

  SyntheticCorpus lex = generate_lexical_corpus(60, 100, 7);
  auto lex_docs = ts::docs_from_registry(lex.registry);
  double lex_bm25 = recall_at(lex, Retriever::build(lex.registry, {}),
                              [&](const std::string& q) { return oracle::bm25_scores(lex_docs, q); }, k, c);

  c.expect(para_dense >= para_bm25, "dense recall below BM25 on paraphrase corpus");
  c.expect(lex_bm25 == 1.0, "BM25 recall@10 on lexical corpus is " + std::to_string(lex_bm25));
  std::ostringstream detail;
  detail << "paraphrase recall@10 dense " << para_dense << " >= bm25 " << para_bm25 << "; lexical bm25 " << lex_bm25;
  return c.verdict(detail.str());
}

Verdict report_deltas() {
  Checker c;
  std::vector<ReportRow> rows{{"m", "agentic", "MC", false, 10, 0.8, 0.0, 0},
                              {"m", "no_retrieval", "MC", false, 10, 0.6, 0.0, 0}};
  compute_deltas(rows);
  c.expect(rows[0].rel_delta == 0.0, "best row delta is not 0");
  c.expect(std::abs(rows[1].rel_delta + 0.25) < 1e-12, "second row delta is " + std::to_string(rows[1].rel_delta));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ReportRow> random_rows;
    for (int i = 0; i < 5; ++i) {
      random_rows.push_back({"m", "s" + std::to_string(i), "MC", false, 10, static_cast<double>(rng() % 11) / 10.0,
                             0.0, 0});
    }
    compute_deltas(random_rows);
    bool best_zero = false;
    for (const auto& r : random_rows) {
      c.expect(r.rel_delta <= 0.0, "positive delta");
      best_zero |= r.rel_delta == 0.0;
    }
    c.expect(best_zero, "no row with delta exactly 0");
  }
  return c.verdict("0.8/0.6 -> 0/-0.25; best row exactly 0 in 200 random tables");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"bm25_oracle", bm25_matches_oracle},
      {"top_k_contract", top_k_contract},
      {"permutation_invariance", permutation_suite},
      {"dataset_manifests", manifests},
      {"golden_traces", golden_traces},
      {"repeated_call_policy", repeated_call_policy},
      {"validation_feedback", validation_feedback},
      {"fixtures_only_sweep", fixtures_only_sweep},
      {"dailymed_fixture_replay", dailymed_fixture_and_replay},
      {"retrieval_backends", retrieval_backends},
      {"report_deltas", report_deltas},
  };
  int failures = 0;
  std::cout << "UNATTAINABLE dataset_manifest_test1_total: " << test1_stated_total().detail << "\n";
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.ok ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
    if (!v.ok) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
