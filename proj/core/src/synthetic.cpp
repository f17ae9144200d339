#include "toolrag/synthetic.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

std::size_t SeededRng::index(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kPrecondition, "SeededRng::index needs n > 0");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

double SeededRng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

DatasetShape validation_shape() { return {"validation", 183, 230, 46}; }
DatasetShape test1_shape() { return {"test1", 663, 1274, 142}; }
DatasetShape test2_shape() { return {"test2", 779, 1474, 238}; }

DatasetShape parse_dataset_shape(std::string_view text) {
  if (text == "validation") return validation_shape();
  if (text == "test1") return test1_shape();
  if (text == "test2") return test2_shape();
  auto colon = text.find(':');
  auto bad = [&] {
    return Error(ErrorCode::kConfigError,
                 "dataset shape must be validation, test1, test2 or name:MC/OEMC/OE, got '" + std::string(text) + "'");
  };
  if (colon == std::string_view::npos || colon == 0) throw bad();
  DatasetShape shape;
  shape.name = std::string(text.substr(0, colon));
  std::array<std::size_t*, 3> fields{&shape.mc, &shape.oemc, &shape.oe};
  std::string_view rest = text.substr(colon + 1);
  for (std::size_t i = 0; i < 3; ++i) {
    auto slash = rest.find('/');
    std::string_view part = rest.substr(0, slash);
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), *fields[i]);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) throw bad();
    if ((i < 2) == (slash == std::string_view::npos)) throw bad();
    rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
  }
  return shape;
}

namespace {

constexpr std::array<std::string_view, 16> kDrugs = {
    "warfarin",   "metformin", "lisinopril", "atorvastatin", "amiodarone", "levothyroxine", "sertraline", "omeprazole",
    "amlodipine", "digoxin",   "lithium",    "methotrexate", "clopidogrel", "gabapentin",   "tramadol",   "prednisone"};

constexpr std::array<std::string_view, 8> kTopics = {"boxed warning",  "contraindication", "renal dose adjustment",
                                                     "major interaction", "pregnancy category", "overdose management",
                                                     "monitoring parameter", "hepatic precaution"};

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string pseudo_word(SeededRng& rng, std::size_t syllables) {
  std::string word;
  for (std::size_t i = 0; i < syllables; ++i) {
    word += kConsonants[rng.index(kConsonants.size())];
    word += kVowels[rng.index(kVowels.size())];
  }
  return word;
}

/// `count` distinct pseudo-words that avoid `taken` and each other.
std::vector<std::string> unique_words(SeededRng& rng, std::size_t count, std::size_t syllables,
                                      std::set<std::string>& taken) {
  std::vector<std::string> words;
  while (words.size() < count) {
    std::string word = pseudo_word(rng, syllables);
    if (taken.insert(word).second) words.push_back(std::move(word));
  }
  return words;
}

std::string pad(std::size_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  return std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

std::vector<Question> generate_dataset(const DatasetShape& shape, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<QuestionStyle> styles;
  styles.insert(styles.end(), shape.mc, QuestionStyle::kMC);
  styles.insert(styles.end(), shape.oemc, QuestionStyle::kOEMC);
  styles.insert(styles.end(), shape.oe, QuestionStyle::kOE);
  rng.shuffle(styles);

  std::set<std::string> taken;
  std::vector<Question> questions;
  questions.reserve(styles.size());
  const std::size_t width = std::max<std::size_t>(4, std::to_string(styles.size()).size());
  for (std::size_t i = 0; i < styles.size(); ++i) {
    Question q;
    q.id = shape.name + "-" + pad(i + 1, width);
    q.style = styles[i];
    std::string drug(kDrugs[rng.index(kDrugs.size())]);
    std::string topic(kTopics[rng.index(kTopics.size())]);
    q.prompt = "A patient is starting " + drug + ". Which " + topic + " applies according to the " + drug + " label?";
    auto answers = unique_words(rng, 4, 3, taken);
    if (q.style == QuestionStyle::kOE) {
      q.gold = answers[0];
    } else {
      q.options = answers;
      q.gold = std::string(1, static_cast<char>('A' + rng.index(4)));
    }
    questions.push_back(std::move(q));
  }
  return questions;
}

GoldTools SyntheticCorpus::gold() const {
  GoldTools gold;
  for (const auto& q : queries) gold[q.id] = std::set<std::string>(q.gold_tools.begin(), q.gold_tools.end());
  return gold;
}

json corpus_to_json(const SyntheticCorpus& corpus) {
  json tools = json::array();
  for (const auto& tool : corpus.registry.tools()) tools.push_back(to_json(tool));
  json queries = json::array();
  for (const auto& q : corpus.queries) queries.push_back({{"id", q.id}, {"text", q.text}, {"gold", q.gold_tools}});
  return {{"tools", tools}, {"queries", queries}};
}

SyntheticCorpus corpus_from_json(const json& node) {
  SyntheticCorpus corpus;
  try {
    corpus.registry = load_registry(json{{"tools", node.at("tools")}}.dump());
    for (const auto& q : node.at("queries")) {
      corpus.queries.push_back({q.at("id").get<std::string>(), q.at("text").get<std::string>(),
                                q.value("gold", std::vector<std::string>{})});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("corpus: ") + e.what());
  }
  return corpus;
}

SyntheticCorpus load_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open corpus " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return corpus_from_json(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("corpus: ") + e.what(), 1, e.byte);
  }
}

namespace {

ToolSpec synthetic_tool(std::size_t index, std::string description) {
  ToolSpec spec;
  spec.name = "syn_tool_" + pad(index + 1, 4);
  spec.description = std::move(description);
  spec.params.push_back({"query", ParamKind::kString, true, "Free-text lookup key.", {}});
  spec.binding = BuiltinBinding{"echo"};
  return spec;
}

}  // namespace

SyntheticCorpus generate_lexical_corpus(std::size_t tools, std::size_t queries, std::uint64_t seed) {
  if (tools == 0) throw Error(ErrorCode::kPrecondition, "corpus needs at least one tool");
  SeededRng rng(seed);
  // Template words never appear in queries; query fillers never appear in descriptions.
  std::set<std::string> taken = {"returns", "records", "for", "a", "request", "supports", "and", "filters",
                                 "find", "the", "please", "lookup", "with"};
  std::vector<std::vector<std::string>> words;
  SyntheticCorpus corpus;
  for (std::size_t t = 0; t < tools; ++t) {
    auto own = unique_words(rng, 5, 3, taken);
    corpus.registry = register_tool(corpus.registry,
                                    synthetic_tool(t, "Returns " + own[0] + " " + own[1] + " records for a " + own[2] +
                                                          " request. Supports " + own[3] + " and " + own[4] +
                                                          " filters."));
    words.push_back(std::move(own));
  }
  for (std::size_t i = 0; i < queries; ++i) {
    std::size_t gold = rng.index(tools);
    std::vector<std::string> picked = words[gold];
    rng.shuffle(picked);
    picked.resize(3 + rng.index(3));
    std::string text = "find the";
    for (const auto& w : picked) text += " " + w;
    text += " lookup please";
    corpus.queries.push_back({"lex-" + pad(i + 1, 4), text, {corpus.registry.tools()[gold].name}});
  }
  return corpus;
}

SyntheticCorpus generate_paraphrase_corpus(std::size_t tools, std::size_t queries, std::uint64_t seed) {
  if (tools == 0) throw Error(ErrorCode::kPrecondition, "corpus needs at least one tool");
  SeededRng rng(seed);
  std::set<std::string> taken;
  std::vector<std::vector<std::string>> roots;
  SyntheticCorpus corpus;
  // Descriptions and queries use disjoint affixes and fillers; "drug" is the
  // single token a query may share with its gold description.
  for (std::size_t t = 0; t < tools; ++t) {
    auto own = unique_words(rng, 3, 3, taken);
    corpus.registry =
        register_tool(corpus.registry, synthetic_tool(t, "Computes " + own[0] + "ation and " + own[1] + "ed " +
                                                             own[2] + "ity values for a drug."));
    roots.push_back(std::move(own));
  }
  for (std::size_t i = 0; i < queries; ++i) {
    std::size_t gold = rng.index(tools);
    const auto& r = roots[gold];
    std::string text = "how is " + r[0] + "ing of " + r[1] + "s " + r[2] + "ous drug";
    corpus.queries.push_back({"para-" + pad(i + 1, 4), text, {corpus.registry.tools()[gold].name}});
  }
  return corpus;
}

}  // namespace toolrag
