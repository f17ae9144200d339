#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toolrag/clock.hpp"
#include "toolrag/error.hpp"

namespace toolrag {

/// A request in canonical form: query parameters are kept as already-encoded
/// (key, value) pairs and sorted, so equal requests render to equal URLs.
struct HttpRequest {
  std::string method = "GET";
  std::string url;  // scheme://host[:port]/path, no query string
  std::vector<std::pair<std::string, std::string>> query;
  std::map<std::string, std::string> headers;
  std::string body;

  /// Splits `full_url` into url + query and canonicalizes.
  static HttpRequest from_url(std::string method, const std::string& full_url);

  void add_param(std::string key, std::string encoded_value);
  void canonicalize();
  std::string full_url() const;

  /// Hash over method, canonical URL and body. Credential parameters
  /// (api_key) are excluded so recorded fixtures never depend on secrets.
  std::string fingerprint() const;
  std::string summary() const;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  bool replayed = false;
  bool stale = false;
  std::int64_t fetched_at_ms = 0;

  bool success() const { return status >= 200 && status < 300; }
};

/// Network-level failure (DNS, connect, timeout). Always retryable.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error(ErrorCode::kUpstreamError, "network: " + message) {}
};

class FixtureMissingError : public Error {
 public:
  explicit FixtureMissingError(const std::string& summary)
      : Error(ErrorCode::kNotFound, "fixture missing for " + summary) {}
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport. One connection per request.
class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(std::chrono::milliseconds timeout = std::chrono::seconds(30)) : timeout_(timeout) {}
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::chrono::milliseconds timeout_;
};

/// Directory of recorded responses, one JSON file per request fingerprint:
/// {request: {method, url, body}, status, body, fetched_at_ms}.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path directory) : directory_(std::move(directory)) {}

  const std::filesystem::path& directory() const { return directory_; }
  std::filesystem::path path_for(const HttpRequest& request) const;

  std::optional<HttpResponse> load(const HttpRequest& request) const;
  void save(const HttpRequest& request, const HttpResponse& response) const;  // throws CacheIoError

 private:
  std::filesystem::path directory_;
  mutable std::mutex write_mutex_;
};

enum class FetchMode { kLive, kFixturesOnly, kRecord };

std::string_view to_string(FetchMode mode);

/// Routes requests through a fixture store according to `mode`. In
/// kFixturesOnly the inner transport is never touched.
class ReplayTransport final : public Transport {
 public:
  ReplayTransport(std::shared_ptr<Transport> inner, std::shared_ptr<FixtureStore> store, FetchMode mode,
                  Clock& clock)
      : inner_(std::move(inner)), store_(std::move(store)), mode_(mode), clock_(clock) {}

  HttpResponse send(const HttpRequest& request) override;

 private:
  std::shared_ptr<Transport> inner_;
  std::shared_ptr<FixtureStore> store_;
  FetchMode mode_;
  Clock& clock_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

/// Retries on TransportError and 5xx; any 4xx is returned immediately.
/// Returns the last 5xx response when attempts run out; rethrows the last
/// transport error otherwise.
HttpResponse send_with_retry(Transport& transport, const HttpRequest& request, const RetryPolicy& policy);

/// Imports responses captured outside the store. The manifest is a JSON list
/// of {method, url, status, body_file, fetched_at_ms?}; body files resolve
/// relative to the manifest. Returns the number of fixtures written.
/// Throws IoError, ParseError and SchemaError.
std::size_t import_captured_responses(const std::filesystem::path& manifest, const FixtureStore& store);

}  // namespace toolrag
