#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "toolrag/clock.hpp"
#include "toolrag/registry.hpp"
#include "toolrag/spl.hpp"
#include "toolrag/transport.hpp"

namespace toolrag {

enum class OutcomeStatus { kOk, kValidationError, kExecutionError, kCached };

std::string_view to_string(OutcomeStatus status);

struct ToolOutcome {
  OutcomeStatus status = OutcomeStatus::kOk;
  std::string payload;  // result text for ok/cached, error detail otherwise
  std::int64_t latency_ms = 0;
  std::string fingerprint;
  std::size_t payload_bytes = 0;
  bool stale = false;

  bool succeeded() const { return status == OutcomeStatus::kOk || status == OutcomeStatus::kCached; }
  nlohmann::json to_json() const;
  static ToolOutcome from_json(const nlohmann::json& node);

  bool operator==(const ToolOutcome&) const = default;
};

/// Anything that can run a validated call. Never throws; failures come back
/// as execution_error outcomes.
class ToolExecutor {
 public:
  virtual ~ToolExecutor() = default;
  virtual ToolOutcome execute(const ToolSpec& spec, const ValidatedCall& call) = 0;
};

struct ExecutionEnv {
  FetchMode mode = FetchMode::kLive;
  RetryPolicy retry;
  std::filesystem::path http_fixture_dir;  // recorded HTTP responses
  std::filesystem::path tool_fixture_dir;  // files served by fixture bindings
  std::int64_t cache_ttl_ms = 60 * 60 * 1000;
  std::string openfda_api_key_env = "OPENFDA_API_KEY";
  std::string dailymed_base_url = "https://dailymed.nlm.nih.gov/dailymed/services/v2";
  std::string openfda_label_url = "https://api.fda.gov/drug/label.json";

  /// Environment-variable name -> whether it is set. Values are never stored.
  std::map<std::string, bool> api_key_presence() const;
};

/// openFDA drug label fields accepted by openfda_label_field.
std::span<const std::string_view> openfda_label_fields();

struct DailyMedResult {
  SplDocument document;
  bool ambiguous = false;  // several candidate labels; selection rule applied
};

class Executor final : public ToolExecutor {
 public:
  using BuiltinHandler = std::function<std::string(Executor&, const ValidatedCall&)>;

  /// `network` may be null when mode is kFixturesOnly.
  Executor(ExecutionEnv env, std::shared_ptr<Transport> network, Clock& clock);

  ToolOutcome execute(const ToolSpec& spec, const ValidatedCall& call) override;

  /// Handlers must be registered before the executor is shared.
  void register_builtin(std::string id, BuiltinHandler handler);

  /// Mode-aware fetch: in-memory TTL cache, then the fixture store or the
  /// network (with retries). Throws CacheIoError, FixtureMissingError,
  /// TransportError.
  HttpResponse cache_roundtrip(const HttpRequest& request);

  /// Name -> set id listing -> SPL document. Throws Precondition, NotFound,
  /// UpstreamError.
  DailyMedResult dailymed_lookup(std::string_view drug_name);

  /// Only the requested field of the first matching label. Throws
  /// UnknownField, NotFound, UpstreamError.
  std::string openfda_label_field(std::string_view search, std::string_view field);

  const ExecutionEnv& env() const { return env_; }
  /// Requests that reached the network transport.
  std::size_t upstream_calls() const { return counter_->count.load(); }

 private:
  struct CountingTransport final : Transport {
    std::shared_ptr<Transport> inner;
    std::atomic<std::size_t> count{0};
    HttpResponse send(const HttpRequest& request) override;
  };

  struct CacheEntry {
    HttpResponse response;
    std::int64_t fetched_at_ms = 0;
  };

  std::string run_http(const HttpBinding& binding, const ValidatedCall& call);
  std::string run_fixture(const FixtureBinding& binding, const ValidatedCall& call);

  ExecutionEnv env_;
  Clock& clock_;
  std::shared_ptr<CountingTransport> counter_;
  std::shared_ptr<FixtureStore> store_;
  std::shared_ptr<ReplayTransport> replay_;
  std::unordered_map<std::string, BuiltinHandler> builtins_;
  std::mutex cache_mutex_;
  std::unordered_map<std::string, CacheEntry> cache_;
};

/// Replaces `{param}` placeholders with argument values; `encode` applies
/// URL percent-encoding. Placeholders without an argument expand to "".
/// Throws ConfigError on an unclosed brace.
std::string expand_template(std::string_view pattern, const nlohmann::json& arguments, bool encode);

}  // namespace toolrag
