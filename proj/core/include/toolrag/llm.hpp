#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolrag/transport.hpp"

namespace toolrag {

enum class Role { kSystem, kUser, kAssistant, kTool };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;

  /// Throws Precondition on an empty message list, empty user/system
  /// content, negative temperature or non-positive max_tokens.
  void validate() const;
  nlohmann::json to_json() const;
  /// Full prompt text, messages joined in order. Handy for assertions.
  std::string flatten() const;

  bool operator==(const CompletionRequest&) const = default;
};

/// Completion backend. complete() throws AdapterError.
class LlmAdapter {
 public:
  virtual ~LlmAdapter() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Replays a fixed list of responses in order. Scoped to one session.
class ScriptedAdapter final : public LlmAdapter {
 public:
  explicit ScriptedAdapter(std::vector<std::string> script, std::string model_id = "scripted");

  std::string complete(const CompletionRequest& request) override;
  std::string id() const override { return model_id_; }

  std::size_t calls() const { return calls_; }
  std::size_t remaining() const { return script_.size(); }
  const std::vector<CompletionRequest>& requests() const { return requests_; }

 private:
  std::deque<std::string> script_;
  std::string model_id_;
  std::size_t calls_ = 0;
  std::vector<CompletionRequest> requests_;
};

/// Script file: {"model": "...", "default": [..], "by_question": {"id": [..]}}.
/// Every session gets a fresh copy of its own list, so sessions never
/// interleave.
class ScriptLibrary {
 public:
  static ScriptLibrary parse(std::string_view document);
  static ScriptLibrary load(const std::filesystem::path& path);

  std::unique_ptr<ScriptedAdapter> session(const std::string& question_id) const;
  /// First key with a script wins; falls back to the default script.
  std::unique_ptr<ScriptedAdapter> session(std::span<const std::string> keys) const;
  std::size_t script_count() const { return by_question_.size(); }
  const std::string& model_id() const { return model_id_; }

 private:
  std::string model_id_ = "scripted";
  std::vector<std::string> default_script_;
  std::map<std::string, std::vector<std::string>> by_question_;
};

struct HttpAdapterConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env;  // name of the variable holding the bearer token
  RetryPolicy retry;
};

/// Chat-completions style adapter: POST {model, messages:[{role,content}],
/// temperature, max_tokens} -> {text}. OpenAI-shaped
/// {choices:[{message:{content}}]} responses are accepted too. Record/replay
/// is handled by handing it a ReplayTransport.
class HttpAdapter final : public LlmAdapter {
 public:
  HttpAdapter(HttpAdapterConfig config, std::shared_ptr<Transport> transport);

  std::string complete(const CompletionRequest& request) override;
  std::string id() const override { return config_.model; }

  HttpRequest to_http(const CompletionRequest& request) const;

 private:
  HttpAdapterConfig config_;
  std::shared_ptr<Transport> transport_;
};

}  // namespace toolrag
