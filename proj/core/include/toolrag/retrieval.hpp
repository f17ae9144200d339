#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/registry.hpp"
#include "toolrag/transport.hpp"

namespace toolrag {

enum class RetrievalBackend { kBm25, kDense, kNone };

/// Accepts "bm25", "dense" / "dense-hash" and "none". Throws UnknownBackend.
RetrievalBackend parse_retrieval_backend(std::string_view name);

inline constexpr std::size_t kDefaultEmbeddingDimension = 512;

struct RetrievalConfig {
  RetrievalBackend backend = RetrievalBackend::kBm25;
  std::size_t k = 10;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;

  void validate() const;  // throws ConfigError
};

struct RankedEntry {
  std::string tool;
  double score = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

/// Top-k result: score descending, ties by ascending tool name.
struct RankedTools {
  std::string query;
  std::vector<RankedEntry> entries;
  std::string backend;
  std::size_t k = 0;

  bool operator==(const RankedTools&) const = default;
};

nlohmann::json to_json(const RankedTools& ranked);
RankedTools ranked_tools_from_json(const nlohmann::json& node);

/// Okapi BM25 over tool descriptions (names are not indexed).
class Bm25Index {
 public:
  /// Throws EmptyCorpus for an empty registry.
  static Bm25Index build(const Registry& registry, double k1 = 1.2, double b = 0.75);

  double score(std::string_view query, std::string_view tool) const;  // throws UnknownTool
  /// Scores for every document, in registry order.
  std::vector<double> score_all(std::string_view query) const;

  std::size_t document_count() const { return names_.size(); }
  double average_length() const { return average_length_; }
  std::size_t document_length(std::size_t doc) const { return lengths_[doc]; }
  std::size_t document_frequency(const std::string& term) const;
  const std::vector<std::string>& names() const { return names_; }
  std::uint64_t registry_version() const { return registry_version_; }

 private:
  double score_document(const std::vector<std::string>& query_terms, std::size_t doc) const;
  double idf(const std::string& term) const;

  std::uint64_t registry_version_ = 0;
  double k1_ = 1.2;
  double b_ = 0.75;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<std::unordered_map<std::string, std::size_t>> term_freqs_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::size_t> doc_freqs_;
  double average_length_ = 0.0;
};

/// dot(u, v) / (|u| |v|). Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;
  /// Same text yields the same vector for the lifetime of the provider.
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const;
};

/// Feature-hashing embedder: each token and each of its boundary-marked
/// character trigrams is hashed into a bucket, then the vector is L2
/// normalized. Text without tokens embeds to the zero vector.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension, double subword_weight = 0.5);

  std::size_t dimension() const override { return dimension_; }
  std::string id() const override { return "hash"; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
  double subword_weight_;
};

/// Throws Precondition when dimension < 8.
std::shared_ptr<const EmbeddingProvider> hash_embedding_provider(std::size_t dimension);

/// Remote embedder: POST {texts:[...]} -> {vectors:[[...]]}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::size_t dimension, std::shared_ptr<Transport> transport,
                        RetryPolicy retry = {});

  std::size_t dimension() const override { return dimension_; }
  std::string id() const override { return "http"; }
  std::vector<double> embed(std::string_view text) const override;
  std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::string endpoint_;
  std::size_t dimension_;
  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
};

/// Description embeddings precomputed at build time; queries embedded per call.
class DenseIndex {
 public:
  static DenseIndex build(const Registry& registry, std::shared_ptr<const EmbeddingProvider> provider);

  std::vector<double> score_all(std::string_view query) const;
  const std::vector<std::string>& names() const { return names_; }
  const EmbeddingProvider& provider() const { return *provider_; }

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> vectors_;
};

/// Backend state for one registry revision. Immutable after build.
class Retriever {
 public:
  static Retriever build(const Registry& registry, const RetrievalConfig& config,
                         std::shared_ptr<const EmbeddingProvider> provider = nullptr);

  /// Full ranking over the corpus (empty for the none backend).
  std::vector<RankedEntry> rank_all(std::string_view query) const;
  std::string backend_id() const;
  std::uint64_t registry_version() const { return registry_version_; }
  const RetrievalConfig& config() const { return config_; }

 private:
  RetrievalConfig config_;
  std::uint64_t registry_version_ = 0;
  std::optional<Bm25Index> bm25_;
  std::optional<DenseIndex> dense_;
};

/// Throws BackendUnavailable when the embedding provider fails.
RankedTools retrieve_top_k(const Retriever& retriever, std::string_view query, std::size_t k);
RankedTools retrieve_top_k(const Retriever& retriever, std::string_view query, const RetrievalConfig& config);

/// Sorts by score descending then name ascending.
void sort_ranking(std::vector<RankedEntry>& entries);

}  // namespace toolrag
