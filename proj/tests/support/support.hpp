#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "toolrag/agent.hpp"
#include "toolrag/executor.hpp"
#include "toolrag/registry.hpp"
#include "toolrag/transport.hpp"

#ifndef TOOLRAG_SOURCE_DIR
#error "TOOLRAG_SOURCE_DIR must point at the repository root"
#endif

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(TOOLRAG_SOURCE_DIR); }
inline fs::path data_dir() { return source_dir() / "data"; }
inline fs::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("toolrag-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& child) const { return path_ / child; }

 private:
  fs::path path_;
};

/// In-memory network. Routes by request fingerprint; unknown requests get
/// 404 unless `fallback` holds a fixture for them. Counts every send.
class FakeTransport final : public toolrag::Transport {
 public:
  toolrag::HttpResponse send(const toolrag::HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    ++calls_;
    seen_.push_back(request);
    if (transport_failures_ > 0) {
      --transport_failures_;
      throw toolrag::TransportError("simulated connection reset");
    }
    if (!status_queue_.empty()) {
      int status = status_queue_.front();
      status_queue_.erase(status_queue_.begin());
      return {status, "server error"};
    }
    auto it = routes_.find(request.fingerprint());
    if (it != routes_.end()) return it->second;
    if (fallback_) {
      if (auto hit = fallback_->load(request)) {
        hit->replayed = false;
        hit->stale = false;
        return *hit;
      }
    }
    return {404, "{\"error\":\"not found\"}"};
  }

  void route(const toolrag::HttpRequest& request, toolrag::HttpResponse response) {
    routes_[request.fingerprint()] = std::move(response);
  }
  void route(const std::string& method, const std::string& url, int status, std::string body) {
    route(toolrag::HttpRequest::from_url(method, url), {status, std::move(body)});
  }
  void serve_fixtures(const fs::path& dir) { fallback_ = std::make_unique<toolrag::FixtureStore>(dir); }
  void fail_next(int n) { transport_failures_ = n; }
  void queue_status(int status) { status_queue_.push_back(status); }

  std::size_t calls() const { return calls_.load(); }
  const std::vector<toolrag::HttpRequest>& seen() const { return seen_; }

 private:
  std::mutex mutex_;
  std::atomic<std::size_t> calls_{0};
  std::vector<toolrag::HttpRequest> seen_;
  std::map<std::string, toolrag::HttpResponse> routes_;
  std::unique_ptr<toolrag::FixtureStore> fallback_;
  int transport_failures_ = 0;
  std::vector<int> status_queue_;
};

/// Executor stub returning "<tool> result for <args>" and counting calls.
class CountingExecutor final : public toolrag::ToolExecutor {
 public:
  toolrag::ToolOutcome execute(const toolrag::ToolSpec& spec, const toolrag::ValidatedCall& call) override {
    ++count_;
    toolrag::ToolOutcome outcome;
    outcome.status = toolrag::OutcomeStatus::kOk;
    outcome.payload = spec.name + " result for " + call.arguments.dump();
    outcome.latency_ms = 1;
    return outcome;
  }
  std::size_t count() const { return count_; }

 private:
  std::size_t count_ = 0;
};

inline toolrag::ToolSpec make_tool(std::string name, std::string description,
                                   std::vector<toolrag::ParamSpec> params = {}) {
  toolrag::ToolSpec spec;
  spec.name = std::move(name);
  spec.description = std::move(description);
  if (params.empty()) params.push_back({"drug_name", toolrag::ParamKind::kString, true, "Drug name.", {}});
  spec.params = std::move(params);
  spec.binding = toolrag::BuiltinBinding{"echo"};
  return spec;
}

inline toolrag::Registry registry_from_docs(const std::vector<oracle::Doc>& docs) {
  toolrag::Registry registry;
  for (const auto& d : docs) registry = toolrag::register_tool(registry, make_tool(d.name, d.text));
  return registry;
}

inline std::vector<oracle::Doc> docs_from_registry(const toolrag::Registry& registry) {
  std::vector<oracle::Doc> docs;
  for (const auto& t : registry.tools()) docs.push_back({t.name, t.description});
  return docs;
}

inline toolrag::Registry bundled_registry() { return toolrag::load_registry_file(data_dir() / "registry.json"); }

/// Execution environment that serves everything from the bundled fixtures.
inline toolrag::ExecutionEnv fixture_env() {
  toolrag::ExecutionEnv env;
  env.mode = toolrag::FetchMode::kFixturesOnly;
  env.http_fixture_dir = data_dir() / "fixtures" / "http";
  env.tool_fixture_dir = data_dir() / "fixtures" / "tools";
  env.retry.initial_backoff = std::chrono::milliseconds(0);
  return env;
}

}  // namespace testing_support
