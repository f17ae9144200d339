#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/dataset.hpp"
#include "toolrag/registry.hpp"
#include "toolrag/report.hpp"

namespace toolrag {

/// Seeded generator whose output is identical on every platform: the engine
/// is fully specified and index draws avoid std distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n > 0.
  std::size_t index(std::size_t n);
  /// Uniform in [0, 1).
  double unit();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

struct DatasetShape {
  std::string name;
  std::size_t mc = 0;
  std::size_t oemc = 0;
  std::size_t oe = 0;

  std::size_t total() const { return mc + oemc + oe; }
};

DatasetShape validation_shape();  // 459: 183 MC, 230 OE-MC, 46 OE
DatasetShape test1_shape();       // 2097: 663, 1274, 142
DatasetShape test2_shape();       // 2491: 779, 1474, 238
/// Accepts "validation", "test1", "test2" or "name:MC/OEMC/OE" counts.
DatasetShape parse_dataset_shape(std::string_view text);

/// Labelled questions with the requested style counts, in seeded order.
std::vector<Question> generate_dataset(const DatasetShape& shape, std::uint64_t seed);

struct AnnotatedQuery {
  std::string id;
  std::string text;
  std::vector<std::string> gold_tools;

  bool operator==(const AnnotatedQuery&) const = default;
};

struct SyntheticCorpus {
  Registry registry;
  std::vector<AnnotatedQuery> queries;

  GoldTools gold() const;
};

/// {"tools": [...registry records...], "queries": [{id, text, gold: [..]}]}.
nlohmann::json corpus_to_json(const SyntheticCorpus& corpus);
SyntheticCorpus corpus_from_json(const nlohmann::json& node);
SyntheticCorpus load_corpus_file(const std::filesystem::path& path);

/// Every tool owns unique pseudo-words; each query carries three or more
/// of its gold tool's words and no other description token.
SyntheticCorpus generate_lexical_corpus(std::size_t tools, std::size_t queries, std::uint64_t seed);

/// Queries use morphological variants of the gold tool's root words and
/// share at most one token with its description.
SyntheticCorpus generate_paraphrase_corpus(std::size_t tools, std::size_t queries, std::uint64_t seed);

}  // namespace toolrag
