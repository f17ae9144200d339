#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace toolrag {

enum class ParamKind { kString, kInteger, kNumber, kBoolean, kEnum };

std::string_view to_string(ParamKind kind);
std::optional<ParamKind> parse_param_kind(std::string_view text);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kString;
  bool required = false;
  std::string description;
  std::vector<std::string> values;  // enum kinds only
};

struct BuiltinBinding {
  std::string handler;
};

/// `url_template` holds `{param}` placeholders; `extract` is a JSON pointer into
/// the response body selecting the payload ("" keeps the whole body).
struct HttpBinding {
  std::string url_template;
  std::string method = "GET";
  std::string extract;
};

/// `file` is relative to the fixture root and may contain `{param}` placeholders.
struct FixtureBinding {
  std::string file;
};

using Binding = std::variant<BuiltinBinding, HttpBinding, FixtureBinding>;

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  Binding binding;

  const ParamSpec* find_param(std::string_view param) const;
};

/// One model-emitted call. Argument keys are unique by construction.
struct FunctionCall {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();

  bool operator==(const FunctionCall&) const = default;
};

/// Canonical fingerprint of (name, arguments). Keys are sorted, so
/// {a:1,b:2} and {b:2,a:1} hash identically.
std::string call_fingerprint(std::string_view name, const nlohmann::json& arguments);

struct ValidatedCall {
  std::string tool;
  nlohmann::json arguments;  // coerced to declared kinds
  std::string fingerprint;
};

enum class ViolationKind { kUnknownTool, kUnknownParam, kMissingRequiredParam, kTypeMismatch };

struct Violation {
  ViolationKind kind;
  std::string subject;  // tool name for kUnknownTool, parameter name otherwise
  std::string expected;
  std::string got;

  std::string to_string() const;
};

/// Outcome of validate_call. Exactly one of `call` / `violations` is populated.
struct CallCheck {
  std::optional<ValidatedCall> call;
  std::vector<Violation> violations;
  std::string error_text;  // fed back to the model verbatim

  bool ok() const { return call.has_value(); }
};

struct CorpusEntry {
  std::string_view name;
  std::string_view description;
};

/// An immutable registry revision. Copies share storage; register_tool
/// produces a new revision and leaves the old one untouched, so sessions can
/// keep the revision they started with.
class Registry {
 public:
  Registry();

  std::size_t size() const { return tools_->size(); }
  bool empty() const { return tools_->empty(); }
  std::uint64_t version() const { return version_; }

  /// Registration (file) order.
  const std::vector<ToolSpec>& tools() const { return *tools_; }
  const ToolSpec* find(std::string_view name) const;
  const ToolSpec& at(std::string_view name) const;  // throws UnknownTool

  /// (name, description) pairs, derived on demand.
  std::vector<CorpusEntry> corpus() const;

  /// Descriptions above two sentences. Warnings only.
  std::vector<std::string> lint() const;

 private:
  friend Registry register_tool(const Registry& registry, ToolSpec spec);

  std::shared_ptr<const std::vector<ToolSpec>> tools_;
  std::shared_ptr<const std::unordered_map<std::string, std::size_t>> index_;
  std::uint64_t version_ = 0;
};

/// Field-level reasons a spec is invalid; empty when valid.
std::vector<std::string> check_spec(const ToolSpec& spec);

/// Throws DuplicateName or InvalidSpecError.
Registry register_tool(const Registry& registry, ToolSpec spec);

/// Parses the registry document format. Throws ParseError (with line/column)
/// on malformed text and InvalidSpecError aggregated across all tools.
Registry load_registry(std::string_view document);
Registry load_registry_file(const std::filesystem::path& path);

ToolSpec tool_spec_from_json(const nlohmann::json& node);
nlohmann::json to_json(const ToolSpec& spec);

/// Deterministic and side-effect free. Reports every violation, not the first.
CallCheck validate_call(const Registry& registry, const FunctionCall& call);

}  // namespace toolrag
