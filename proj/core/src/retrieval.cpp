#include "toolrag/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

void RetrievalConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kConfigError, "retrieval k must be >= 1");
  if (!(bm25_k1 >= 0.0)) throw Error(ErrorCode::kConfigError, "bm25_k1 must be >= 0");
  if (!(bm25_b >= 0.0 && bm25_b <= 1.0)) throw Error(ErrorCode::kConfigError, "bm25_b must be within [0, 1]");
}

json to_json(const RankedTools& ranked) {
  json entries = json::array();
  for (const auto& e : ranked.entries) entries.push_back({{"tool", e.tool}, {"score", e.score}});
  return {{"query", ranked.query}, {"backend", ranked.backend}, {"k", ranked.k}, {"entries", entries}};
}

RankedTools ranked_tools_from_json(const json& node) {
  RankedTools ranked;
  ranked.query = node.at("query").get<std::string>();
  ranked.backend = node.at("backend").get<std::string>();
  ranked.k = node.at("k").get<std::size_t>();
  for (const auto& e : node.at("entries")) {
    ranked.entries.push_back({e.at("tool").get<std::string>(), e.at("score").get<double>()});
  }
  return ranked;
}

void sort_ranking(std::vector<RankedEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tool < b.tool;
  });
}

// ---------------------------------------------------------------------------
// BM25

Bm25Index Bm25Index::build(const Registry& registry, double k1, double b) {
  if (registry.empty()) throw Error(ErrorCode::kEmptyCorpus, "registry has no tools to index");
  Bm25Index index;
  index.registry_version_ = registry.version();
  index.k1_ = k1;
  index.b_ = b;
  std::size_t total = 0;
  for (const auto& entry : registry.corpus()) {
    std::unordered_map<std::string, std::size_t> freqs;
    auto tokens = text::tokenize(entry.description);
    for (auto& token : tokens) ++freqs[token];
    for (const auto& [term, _] : freqs) ++index.doc_freqs_[term];
    index.by_name_.emplace(std::string(entry.name), index.names_.size());
    index.names_.emplace_back(entry.name);
    index.lengths_.push_back(tokens.size());
    index.term_freqs_.push_back(std::move(freqs));
    total += tokens.size();
  }
  index.average_length_ = static_cast<double>(total) / static_cast<double>(index.names_.size());
  return index;
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
  auto it = doc_freqs_.find(term);
  return it == doc_freqs_.end() ? 0 : it->second;
}

double Bm25Index::idf(const std::string& term) const {
  double n = static_cast<double>(names_.size());
  double df = static_cast<double>(document_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score_document(const std::vector<std::string>& query_terms, std::size_t doc) const {
  const auto& freqs = term_freqs_[doc];
  double length_norm = 1.0 - b_ + b_ * static_cast<double>(lengths_[doc]) / average_length_;
  double total = 0.0;
  for (const auto& term : query_terms) {
    auto it = freqs.find(term);
    if (it == freqs.end()) continue;
    double tf = static_cast<double>(it->second);
    total += idf(term) * tf * (k1_ + 1.0) / (tf + k1_ * length_norm);
  }
  return total;
}

double Bm25Index::score(std::string_view query, std::string_view tool) const {
  auto it = by_name_.find(std::string(tool));
  if (it == by_name_.end()) throw Error(ErrorCode::kUnknownTool, std::string(tool));
  return score_document(text::tokenize(query), it->second);
}

std::vector<double> Bm25Index::score_all(std::string_view query) const {
  auto terms = text::tokenize(query);
  std::vector<double> scores(names_.size());
  for (std::size_t doc = 0; doc < names_.size(); ++doc) scores[doc] = score_document(terms, doc);
  return scores;
}

// ---------------------------------------------------------------------------
// Dense

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::kZeroVector, "cosine similarity of an all-zero vector");
  double cosine = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(cosine, -1.0, 1.0);
}

std::vector<std::vector<double>> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension, double subword_weight)
    : dimension_(dimension), subword_weight_(subword_weight) {
  if (dimension < 8) throw Error(ErrorCode::kPrecondition, "hash embedding dimension must be >= 8");
}

std::vector<double> HashEmbeddingProvider::embed(std::string_view input) const {
  std::vector<double> vec(dimension_, 0.0);
  for (const auto& token : text::tokenize(input)) {
    vec[text::fnv1a64(token) % dimension_] += 1.0;
    if (subword_weight_ > 0.0) {
      std::string marked = "<" + token + ">";
      for (std::size_t i = 0; i + 3 <= marked.size(); ++i) {
        std::string gram = "#" + marked.substr(i, 3);
        vec[text::fnv1a64(gram) % dimension_] += subword_weight_;
      }
    }
  }
  double norm = 0.0;
  for (double x : vec) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : vec) x /= norm;
  }
  return vec;
}

std::shared_ptr<const EmbeddingProvider> hash_embedding_provider(std::size_t dimension) {
  return std::make_shared<HashEmbeddingProvider>(dimension);
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, std::size_t dimension,
                                             std::shared_ptr<Transport> transport, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), dimension_(dimension), transport_(std::move(transport)), retry_(retry) {
  if (dimension_ == 0) throw Error(ErrorCode::kPrecondition, "embedding dimension must be positive");
}

std::vector<double> HttpEmbeddingProvider::embed(std::string_view text) const {
  std::string single(text);
  return embed_batch(std::span<const std::string>(&single, 1)).front();
}

std::vector<std::vector<double>> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  HttpRequest request = HttpRequest::from_url("POST", endpoint_);
  request.headers["Content-Type"] = "application/json";
  request.body = json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();
  HttpResponse response = send_with_retry(*transport_, request, retry_);
  if (!response.success()) {
    throw Error(ErrorCode::kUpstreamError, "embedding endpoint returned status " + std::to_string(response.status));
  }
  std::vector<std::vector<double>> vectors;
  try {
    vectors = json::parse(response.body).at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUpstreamError, std::string("malformed embedding response: ") + e.what());
  }
  if (vectors.size() != texts.size()) throw Error(ErrorCode::kUpstreamError, "embedding count mismatch");
  for (const auto& v : vectors) {
    if (v.size() != dimension_) {
      throw Error(ErrorCode::kUpstreamError, "embedding dimension " + std::to_string(v.size()) + ", expected " +
                                                 std::to_string(dimension_));
    }
  }
  return vectors;
}

DenseIndex DenseIndex::build(const Registry& registry, std::shared_ptr<const EmbeddingProvider> provider) {
  if (!provider) throw Error(ErrorCode::kConfigError, "dense retrieval needs an embedding provider");
  if (registry.empty()) throw Error(ErrorCode::kEmptyCorpus, "registry has no tools to index");
  DenseIndex index;
  index.provider_ = std::move(provider);
  std::vector<std::string> descriptions;
  for (const auto& entry : registry.corpus()) {
    index.names_.emplace_back(entry.name);
    descriptions.emplace_back(entry.description);
  }
  index.vectors_ = index.provider_->embed_batch(descriptions);
  return index;
}

namespace {

bool is_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

std::vector<double> DenseIndex::score_all(std::string_view query) const {
  std::vector<double> q = provider_->embed(query);
  std::vector<double> scores(names_.size(), 0.0);
  // A query or description without tokens has no direction; it scores 0
  // against everything instead of failing the whole retrieval.
  if (is_zero(q)) return scores;
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    if (!is_zero(vectors_[i])) scores[i] = cosine_similarity(q, vectors_[i]);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Retriever

RetrievalBackend parse_retrieval_backend(std::string_view name) {
  if (name == "bm25") return RetrievalBackend::kBm25;
  if (name == "dense" || name == "dense-hash") return RetrievalBackend::kDense;
  if (name == "none") return RetrievalBackend::kNone;
  throw Error(ErrorCode::kUnknownBackend, std::string(name));
}

Retriever Retriever::build(const Registry& registry, const RetrievalConfig& config,
                           std::shared_ptr<const EmbeddingProvider> provider) {
  config.validate();
  Retriever retriever;
  retriever.config_ = config;
  retriever.registry_version_ = registry.version();
  switch (config.backend) {
    case RetrievalBackend::kBm25:
      retriever.bm25_ = Bm25Index::build(registry, config.bm25_k1, config.bm25_b);
      break;
    case RetrievalBackend::kDense:
      try {
        retriever.dense_ = DenseIndex::build(registry, std::move(provider));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kEmptyCorpus || e.code() == ErrorCode::kConfigError) throw;
        throw Error(ErrorCode::kBackendUnavailable, e.what());
      }
      break;
    case RetrievalBackend::kNone:
      break;
  }
  return retriever;
}

std::string Retriever::backend_id() const {
  switch (config_.backend) {
    case RetrievalBackend::kBm25: return "bm25";
    case RetrievalBackend::kDense: return "dense-" + dense_->provider().id();
    case RetrievalBackend::kNone: return "none";
  }
  return "none";
}

std::vector<RankedEntry> Retriever::rank_all(std::string_view query) const {
  std::vector<RankedEntry> entries;
  const std::vector<std::string>* names = nullptr;
  std::vector<double> scores;
  if (bm25_) {
    scores = bm25_->score_all(query);
    names = &bm25_->names();
  } else if (dense_) {
    try {
      scores = dense_->score_all(query);
    } catch (const Error& e) {
      throw Error(ErrorCode::kBackendUnavailable, e.what());
    }
    names = &dense_->names();
  } else {
    return entries;
  }
  entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) entries.push_back({(*names)[i], scores[i]});
  sort_ranking(entries);
  return entries;
}

RankedTools retrieve_top_k(const Retriever& retriever, std::string_view query, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kConfigError, "retrieval k must be >= 1");
  RankedTools ranked;
  ranked.query = std::string(query);
  ranked.backend = retriever.backend_id();
  ranked.k = k;
  ranked.entries = retriever.rank_all(query);
  if (ranked.entries.size() > k) ranked.entries.resize(k);
  return ranked;
}

RankedTools retrieve_top_k(const Retriever& retriever, std::string_view query, const RetrievalConfig& config) {
  config.validate();
  return retrieve_top_k(retriever, query, config.k);
}

}  // namespace toolrag
