#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/transport.hpp"

namespace toolrag::cli {

/// Flags > config file > defaults. Paths are kept as given.
struct EffectiveConfig {
  std::string registry;
  std::string dataset;
  std::string adapter;  // "scripted:<path>" or "http:<base url>"
  std::string model;
  std::string api_key_env = "TOOLRAG_LLM_API_KEY";
  std::vector<std::string> modes = {"agentic"};
  std::string permute = "off";  // off | on | both
  std::size_t k = 10;
  std::size_t max_iters = 10;
  std::size_t max_calls = 5;
  std::string retriever = "bm25";
  std::size_t embedding_dim = 512;
  std::string out = "out";
  std::uint64_t seed = 7;
  std::size_t workers = 1;
  bool fixtures_only = false;
  bool record = false;
  std::string http_fixtures;  // default: <registry dir>/fixtures/http
  std::string tool_fixtures;  // default: <registry dir>/fixtures/tools
  std::string repeated_calls = "cached";
  std::string frozen_traces;
  bool resume = true;

  nlohmann::json to_json() const;
  /// Overlays keys present in `node`. Throws ConfigError on unknown keys.
  void apply(const nlohmann::json& node);
};

/// Streams and the network seam. A null `network` means a real HTTP client
/// is created on first use outside fixtures-only mode.
struct CliContext {
  std::ostream& out;
  std::ostream& err;
  std::shared_ptr<Transport> network;
};

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage/config/parse errors, 2 budget exhausted.
int run_cli(const std::vector<std::string>& args, CliContext& context);

}  // namespace toolrag::cli
