#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "support.hpp"
#include "toolrag/synthetic.hpp"

using namespace toolrag;

TEST(SeededRng, KnownSequenceIsStable) {
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  SeededRng r(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LT(r.index(7), 7u);
    double u = r.unit();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_THROW(r.index(0), Error);
}

TEST(Shapes, ManifestCountsMatchShapes) {
  for (const auto& shape : {validation_shape(), test1_shape(), test2_shape()}) {
    auto qs = generate_dataset(shape, 7);
    DatasetManifest m = compute_manifest(shape.name, qs);
    EXPECT_EQ(m.question_count, shape.total());
    EXPECT_EQ(m.count(QuestionStyle::kMC), shape.mc);
    EXPECT_EQ(m.count(QuestionStyle::kOEMC), shape.oemc);
    EXPECT_EQ(m.count(QuestionStyle::kOE), shape.oe);
    EXPECT_TRUE(m.consistent());
  }
  EXPECT_EQ(validation_shape().total(), 459u);
  // Per-style counts are authoritative; they sum to 2079.
  EXPECT_EQ(test1_shape().total(), 2079u);
  EXPECT_EQ(test2_shape().total(), 2491u);
}

TEST(Shapes, ParseCustom) {
  DatasetShape s = parse_dataset_shape("demo:3/2/1");
  EXPECT_EQ(s.name, "demo");
  EXPECT_EQ(s.total(), 6u);
  for (const char* bad : {"demo", "demo:1/2", "demo:1/2/x", ":1/2/3", "demo:1/2/3/4"}) {
    EXPECT_THROW(parse_dataset_shape(bad), Error) << bad;
  }
}

TEST(Generate, DeterministicAndValid) {
  auto a = generate_dataset(parse_dataset_shape("d:20/10/5"), 3);
  auto b = generate_dataset(parse_dataset_shape("d:20/10/5"), 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, generate_dataset(parse_dataset_shape("d:20/10/5"), 4));
  std::set<std::string> ids;
  for (const auto& q : a) {
    EXPECT_NO_THROW(q.validate()) << q.id;
    EXPECT_TRUE(ids.insert(q.id).second);
  }
}

TEST(Corpus, LexicalQueriesShareOnlyGoldWords) {
  SyntheticCorpus corpus = generate_lexical_corpus(20, 30, 1);
  EXPECT_EQ(corpus.registry.size(), 20u);
  EXPECT_EQ(corpus.queries.size(), 30u);
  for (const auto& q : corpus.queries) {
    auto q_tokens = oracle::tokenize(q.text);
    std::set<std::string> qset(q_tokens.begin(), q_tokens.end());
    for (const auto& tool : corpus.registry.tools()) {
      std::size_t shared = 0;
      for (const auto& t : oracle::tokenize(tool.description)) shared += qset.count(t);
      if (tool.name == q.gold_tools.front()) {
        EXPECT_GE(shared, 3u);
      } else {
        EXPECT_EQ(shared, 0u) << q.text << " vs " << tool.description;
      }
    }
  }
}

TEST(Corpus, ParaphraseSharesAtMostOneToken) {
  SyntheticCorpus corpus = generate_paraphrase_corpus(20, 30, 1);
  for (const auto& q : corpus.queries) {
    auto q_tokens = oracle::tokenize(q.text);
    std::set<std::string> qset(q_tokens.begin(), q_tokens.end());
    auto d = oracle::tokenize(corpus.registry.at(q.gold_tools.front()).description);
    std::set<std::string> shared;
    for (const auto& t : d) {
      if (qset.count(t)) shared.insert(t);
    }
    EXPECT_LE(shared.size(), 1u) << q.text;
  }
}

TEST(Corpus, JsonRoundTripAndFile) {
  SyntheticCorpus corpus = generate_lexical_corpus(5, 4, 9);
  testing_support::TempDir dir;
  testing_support::write_file(dir / "c.json", corpus_to_json(corpus).dump());
  SyntheticCorpus back = load_corpus_file(dir / "c.json");
  EXPECT_EQ(back.queries, corpus.queries);
  EXPECT_EQ(corpus_to_json(back), corpus_to_json(corpus));
  EXPECT_EQ(back.gold().at("lex-0001").size(), 1u);
}
