#include "toolrag/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
    case Role::kTool: return "tool";
  }
  return "user";
}

void CompletionRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::kPrecondition, "completion request has no messages");
  for (const auto& m : messages) {
    if ((m.role == Role::kUser || m.role == Role::kSystem) && m.content.empty()) {
      throw Error(ErrorCode::kPrecondition, std::string(to_string(m.role)) + " message content is empty");
    }
  }
  if (temperature < 0.0) throw Error(ErrorCode::kPrecondition, "temperature must be >= 0");
  if (max_tokens <= 0) throw Error(ErrorCode::kPrecondition, "max_tokens must be positive");
}

json CompletionRequest::to_json() const {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return {{"messages", msgs}, {"temperature", temperature}, {"max_tokens", max_tokens}};
}

std::string CompletionRequest::flatten() const {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "\n\n";
    out += m.content;
  }
  return out;
}

ScriptedAdapter::ScriptedAdapter(std::vector<std::string> script, std::string model_id)
    : script_(script.begin(), script.end()), model_id_(std::move(model_id)) {}

std::string ScriptedAdapter::complete(const CompletionRequest& request) {
  request.validate();
  ++calls_;
  requests_.push_back(request);
  if (script_.empty()) throw AdapterError("script exhausted", false);
  std::string next = std::move(script_.front());
  script_.pop_front();
  return next;
}

ScriptLibrary ScriptLibrary::parse(std::string_view document) {
  ScriptLibrary library;
  try {
    json root = json::parse(document);
    if (root.is_array()) {
      library.default_script_ = root.get<std::vector<std::string>>();
      return library;
    }
    library.model_id_ = root.value("model", std::string("scripted"));
    if (root.contains("default")) library.default_script_ = root.at("default").get<std::vector<std::string>>();
    if (root.contains("by_question")) {
      library.by_question_ = root.at("by_question").get<std::map<std::string, std::vector<std::string>>>();
    }
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("script: ") + e.what(), 1, e.byte);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("script: ") + e.what());
  }
  return library;
}

ScriptLibrary ScriptLibrary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open script " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::unique_ptr<ScriptedAdapter> ScriptLibrary::session(const std::string& question_id) const {
  auto it = by_question_.find(question_id);
  const auto& script = it == by_question_.end() ? default_script_ : it->second;
  return std::make_unique<ScriptedAdapter>(script, model_id_);
}

std::unique_ptr<ScriptedAdapter> ScriptLibrary::session(std::span<const std::string> keys) const {
  for (const auto& key : keys) {
    auto it = by_question_.find(key);
    if (it != by_question_.end()) return std::make_unique<ScriptedAdapter>(it->second, model_id_);
  }
  return std::make_unique<ScriptedAdapter>(default_script_, model_id_);
}

HttpAdapter::HttpAdapter(HttpAdapterConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.base_url.empty()) throw Error(ErrorCode::kConfigError, "http adapter needs a base URL");
  if (config_.model.empty()) throw Error(ErrorCode::kConfigError, "http adapter needs a model name");
}

HttpRequest HttpAdapter::to_http(const CompletionRequest& request) const {
  HttpRequest http = HttpRequest::from_url("POST", config_.base_url);
  json body = request.to_json();
  body["model"] = config_.model;
  http.body = body.dump();
  http.headers["Content-Type"] = "application/json";
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
      http.headers["Authorization"] = std::string("Bearer ") + key;
    }
  }
  return http;
}

std::string HttpAdapter::complete(const CompletionRequest& request) {
  request.validate();
  HttpRequest http = to_http(request);
  HttpResponse response;
  try {
    response = send_with_retry(*transport_, http, config_.retry);
  } catch (const FixtureMissingError& e) {
    throw AdapterError(e.what(), false);
  } catch (const Error& e) {
    throw AdapterError(e.what(), true);
  }
  if (!response.success()) {
    throw AdapterError("model endpoint returned status " + std::to_string(response.status),
                       response.status >= 500 || response.status == 429);
  }
  try {
    json doc = json::parse(response.body);
    if (doc.contains("text")) return doc.at("text").get<std::string>();
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw AdapterError(std::string("malformed model response: ") + e.what(), false);
  }
}

}  // namespace toolrag
