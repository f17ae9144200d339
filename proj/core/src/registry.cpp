#include "toolrag/registry.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::kString: return "string";
    case ParamKind::kInteger: return "integer";
    case ParamKind::kNumber: return "number";
    case ParamKind::kBoolean: return "boolean";
    case ParamKind::kEnum: return "enum";
  }
  return "string";
}

std::optional<ParamKind> parse_param_kind(std::string_view text) {
  if (text == "string") return ParamKind::kString;
  if (text == "integer") return ParamKind::kInteger;
  if (text == "number") return ParamKind::kNumber;
  if (text == "boolean") return ParamKind::kBoolean;
  if (text == "enum") return ParamKind::kEnum;
  return std::nullopt;
}

const ParamSpec* ToolSpec::find_param(std::string_view param) const {
  for (const auto& p : params) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

std::string call_fingerprint(std::string_view name, const json& arguments) {
  // json objects are key-sorted, so dump() is already canonical.
  json canonical = {{"arguments", arguments.is_null() ? json::object() : arguments}, {"name", name}};
  return text::to_hex(text::fnv1a64(canonical.dump()));
}

std::string Violation::to_string() const {
  switch (kind) {
    case ViolationKind::kUnknownTool: return "UnknownTool(" + subject + ")";
    case ViolationKind::kUnknownParam: return "UnknownParam(" + subject + ")";
    case ViolationKind::kMissingRequiredParam: return "MissingRequiredParam(" + subject + ")";
    case ViolationKind::kTypeMismatch:
      return "TypeMismatch(" + subject + ", expected " + expected + ", got " + got + ")";
  }
  return subject;
}

Registry::Registry()
    : tools_(std::make_shared<const std::vector<ToolSpec>>()),
      index_(std::make_shared<const std::unordered_map<std::string, std::size_t>>()) {}

const ToolSpec* Registry::find(std::string_view name) const {
  auto it = index_->find(std::string(name));
  return it == index_->end() ? nullptr : &(*tools_)[it->second];
}

const ToolSpec& Registry::at(std::string_view name) const {
  if (const ToolSpec* spec = find(name)) return *spec;
  throw Error(ErrorCode::kUnknownTool, std::string(name));
}

std::vector<CorpusEntry> Registry::corpus() const {
  std::vector<CorpusEntry> out;
  out.reserve(tools_->size());
  for (const auto& tool : *tools_) out.push_back({tool.name, tool.description});
  return out;
}

std::vector<std::string> Registry::lint() const {
  std::vector<std::string> warnings;
  for (const auto& tool : *tools_) {
    std::size_t sentences = text::count_sentences(tool.description);
    if (sentences > 2) {
      warnings.push_back("tool '" + tool.name + "': description has " + std::to_string(sentences) +
                         " sentences (expected at most 2)");
    }
  }
  return warnings;
}

std::vector<std::string> check_spec(const ToolSpec& spec) {
  std::vector<std::string> reasons;
  if (spec.name.empty()) reasons.push_back("name: must be non-empty");
  if (text::trim(spec.description).empty()) reasons.push_back("description: must be non-empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.params.size(); ++i) {
    const auto& param = spec.params[i];
    std::string where = "params[" + std::to_string(i) + "]";
    if (param.name.empty()) {
      reasons.push_back(where + ".name: must be non-empty");
    } else if (!seen.insert(param.name).second) {
      reasons.push_back(where + ".name: duplicate parameter '" + param.name + "'");
    }
    if (param.kind == ParamKind::kEnum && param.values.empty()) {
      reasons.push_back(where + ".values: enum parameter needs at least one value");
    }
  }
  std::visit(
      [&](const auto& binding) {
        using T = std::decay_t<decltype(binding)>;
        if constexpr (std::is_same_v<T, BuiltinBinding>) {
          if (binding.handler.empty()) reasons.push_back("binding.handler: must be non-empty");
        } else if constexpr (std::is_same_v<T, HttpBinding>) {
          if (binding.url_template.empty()) reasons.push_back("binding.url_template: must be non-empty");
          if (binding.method != "GET" && binding.method != "POST") {
            reasons.push_back("binding.method: expected GET or POST, got '" + binding.method + "'");
          }
          if (!binding.extract.empty() && binding.extract.front() != '/') {
            reasons.push_back("binding.extract: must be a JSON pointer starting with '/'");
          }
        } else {
          if (binding.file.empty()) reasons.push_back("binding.file: must be non-empty");
        }
      },
      spec.binding);
  return reasons;
}

Registry register_tool(const Registry& registry, ToolSpec spec) {
  if (registry.find(spec.name) != nullptr) throw Error(ErrorCode::kDuplicateName, spec.name);
  if (auto reasons = check_spec(spec); !reasons.empty()) throw InvalidSpecError(std::move(reasons));

  auto tools = std::make_shared<std::vector<ToolSpec>>(*registry.tools_);
  auto index = std::make_shared<std::unordered_map<std::string, std::size_t>>(*registry.index_);
  index->emplace(spec.name, tools->size());
  tools->push_back(std::move(spec));

  Registry next;
  next.tools_ = std::move(tools);
  next.index_ = std::move(index);
  next.version_ = registry.version_ + 1;
  return next;
}

namespace {

// Structural problems are collected rather than thrown so that one bad tool
// reports all of its fields at once.
std::string string_field(const json& node, const char* key, std::vector<std::string>& reasons,
                         const std::string& where, bool required = true) {
  auto it = node.find(key);
  if (it == node.end()) {
    if (required) reasons.push_back(where + key + ": missing");
    return {};
  }
  if (!it->is_string()) {
    reasons.push_back(where + key + ": expected string");
    return {};
  }
  return it->get<std::string>();
}

ToolSpec parse_tool(const json& node, std::vector<std::string>& reasons) {
  ToolSpec spec;
  if (!node.is_object()) {
    reasons.push_back("tool entry: expected object");
    return spec;
  }
  spec.name = string_field(node, "name", reasons, "");
  spec.description = string_field(node, "description", reasons, "");

  if (auto params = node.find("params"); params != node.end()) {
    if (!params->is_array()) {
      reasons.push_back("params: expected list");
    } else {
      for (std::size_t i = 0; i < params->size(); ++i) {
        const json& p = (*params)[i];
        std::string where = "params[" + std::to_string(i) + "].";
        if (!p.is_object()) {
          reasons.push_back(where.substr(0, where.size() - 1) + ": expected object");
          continue;
        }
        ParamSpec param;
        param.name = string_field(p, "name", reasons, where);
        std::string kind = string_field(p, "kind", reasons, where);
        if (auto parsed = parse_param_kind(kind)) {
          param.kind = *parsed;
        } else if (!kind.empty()) {
          reasons.push_back(where + "kind: unknown kind '" + kind + "'");
        }
        if (auto req = p.find("required"); req != p.end()) {
          if (req->is_boolean()) {
            param.required = req->get<bool>();
          } else {
            reasons.push_back(where + "required: expected boolean");
          }
        }
        param.description = string_field(p, "description", reasons, where, false);
        if (auto values = p.find("values"); values != p.end()) {
          if (!values->is_array()) {
            reasons.push_back(where + "values: expected list");
          } else {
            for (const auto& v : *values) {
              if (v.is_string()) {
                param.values.push_back(v.get<std::string>());
              } else {
                reasons.push_back(where + "values: expected strings");
              }
            }
          }
        }
        spec.params.push_back(std::move(param));
      }
    }
  }

  auto binding = node.find("binding");
  if (binding == node.end() || !binding->is_object()) {
    reasons.push_back("binding: missing or not an object");
    spec.binding = BuiltinBinding{};
    return spec;
  }
  std::string type = string_field(*binding, "type", reasons, "binding.");
  if (type == "builtin") {
    spec.binding = BuiltinBinding{string_field(*binding, "handler", reasons, "binding.")};
  } else if (type == "http") {
    HttpBinding http;
    http.url_template = string_field(*binding, "url_template", reasons, "binding.");
    if (binding->contains("method")) http.method = string_field(*binding, "method", reasons, "binding.");
    http.extract = string_field(*binding, "extract", reasons, "binding.", false);
    spec.binding = std::move(http);
  } else if (type == "fixture") {
    spec.binding = FixtureBinding{string_field(*binding, "file", reasons, "binding.")};
  } else {
    if (!type.empty()) reasons.push_back("binding.type: unknown type '" + type + "'");
    spec.binding = BuiltinBinding{};
  }
  return spec;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view document, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t limit = byte == 0 ? 0 : std::min(byte - 1, document.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (document[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ToolSpec tool_spec_from_json(const json& node) {
  std::vector<std::string> reasons;
  ToolSpec spec = parse_tool(node, reasons);
  if (!reasons.empty()) throw InvalidSpecError(std::move(reasons));
  return spec;
}

json to_json(const ToolSpec& spec) {
  json params = json::array();
  for (const auto& p : spec.params) {
    json entry = {{"name", p.name},
                  {"kind", to_string(p.kind)},
                  {"required", p.required},
                  {"description", p.description}};
    if (p.kind == ParamKind::kEnum) entry["values"] = p.values;
    params.push_back(std::move(entry));
  }
  json binding = std::visit(
      [](const auto& b) -> json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BuiltinBinding>) {
          return {{"type", "builtin"}, {"handler", b.handler}};
        } else if constexpr (std::is_same_v<T, HttpBinding>) {
          return {{"type", "http"}, {"url_template", b.url_template}, {"method", b.method}, {"extract", b.extract}};
        } else {
          return {{"type", "fixture"}, {"file", b.file}};
        }
      },
      spec.binding);
  return {{"name", spec.name}, {"description", spec.description}, {"params", params}, {"binding", binding}};
}

Registry load_registry(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    auto [line, column] = line_column(document, e.byte);
    throw ParseError(e.what(), line, column);
  }
  if (!root.is_object() || !root.contains("tools") || !root["tools"].is_array()) {
    throw ParseError("registry document needs a top-level 'tools' list", 1, 1);
  }

  Registry registry;
  std::vector<std::string> aggregated;
  for (std::size_t i = 0; i < root["tools"].size(); ++i) {
    std::vector<std::string> reasons;
    ToolSpec spec = parse_tool(root["tools"][i], reasons);
    std::string label = spec.name.empty() ? "tools[" + std::to_string(i) + "]" : "tool '" + spec.name + "'";
    if (reasons.empty()) {
      for (auto& r : check_spec(spec)) reasons.push_back(std::move(r));
    }
    if (!reasons.empty()) {
      for (const auto& r : reasons) aggregated.push_back(label + ": " + r);
      continue;
    }
    if (!aggregated.empty()) continue;  // keep scanning for errors, stop building
    registry = register_tool(registry, std::move(spec));
  }
  if (!aggregated.empty()) throw InvalidSpecError(std::move(aggregated));
  return registry;
}

Registry load_registry_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open registry file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_registry(buffer.str());
}

namespace {

std::string json_kind_name(const json& value) {
  switch (value.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "boolean";
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return "integer";
    case json::value_t::number_float: return "number";
    case json::value_t::string: return "string";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    default: return "unknown";
  }
}

std::optional<std::int64_t> parse_integer(const std::string& s) {
  std::string t = text::trim(s);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return value;
}

std::optional<double> parse_number(const std::string& s) {
  std::string t = text::trim(s);
  double value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string expected_name(const ParamSpec& param) {
  if (param.kind != ParamKind::kEnum) return std::string(to_string(param.kind));
  std::string out = "one of {";
  for (std::size_t i = 0; i < param.values.size(); ++i) {
    if (i) out += ", ";
    out += param.values[i];
  }
  return out + "}";
}

// Numeric strings coerce to numeric kinds; everything else is strict.
std::optional<json> coerce(const ParamSpec& param, const json& value) {
  switch (param.kind) {
    case ParamKind::kString:
      if (value.is_string()) return std::optional<json>(std::in_place, value);
      return std::nullopt;
    case ParamKind::kInteger:
      if (value.is_number_integer()) return std::optional<json>(std::in_place, value);
      if (value.is_string()) {
        if (auto parsed = parse_integer(value.get<std::string>())) return json(*parsed);
      }
      return std::nullopt;
    case ParamKind::kNumber:
      if (value.is_number()) return std::optional<json>(std::in_place, value);
      if (value.is_string()) {
        if (auto parsed = parse_number(value.get<std::string>())) return json(*parsed);
      }
      return std::nullopt;
    case ParamKind::kBoolean:
      if (value.is_boolean()) return std::optional<json>(std::in_place, value);
      return std::nullopt;
    case ParamKind::kEnum:
      if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        for (const auto& allowed : param.values) {
          if (allowed == s) return std::optional<json>(std::in_place, value);
        }
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::string describe_expected(const ToolSpec& spec) {
  std::string out;
  for (const auto& p : spec.params) {
    if (!out.empty()) out += ", ";
    out += p.name + " (" + expected_name(p) + (p.required ? ", required" : ", optional") + ")";
  }
  return out.empty() ? "none" : out;
}

}  // namespace

CallCheck validate_call(const Registry& registry, const FunctionCall& call) {
  CallCheck check;
  const ToolSpec* spec = registry.find(call.name);
  if (spec == nullptr) {
    check.violations.push_back({ViolationKind::kUnknownTool, call.name, {}, {}});
    check.error_text = "invalid call: " + check.violations.front().to_string() + "; no tool named '" + call.name +
                       "' is registered";
    return check;
  }

  json coerced = json::object();
  const json& args = call.arguments.is_object() ? call.arguments : json::object();
  for (const auto& [key, value] : args.items()) {
    const ParamSpec* param = spec->find_param(key);
    if (param == nullptr) {
      check.violations.push_back({ViolationKind::kUnknownParam, key, {}, {}});
      continue;
    }
    if (auto converted = coerce(*param, value)) {
      coerced[key] = std::move(*converted);
    } else {
      check.violations.push_back({ViolationKind::kTypeMismatch, key, expected_name(*param), json_kind_name(value)});
    }
  }
  for (const auto& param : spec->params) {
    if (param.required && !args.contains(param.name)) {
      check.violations.push_back({ViolationKind::kMissingRequiredParam, param.name, {}, {}});
    }
  }

  if (!check.violations.empty()) {
    std::string text = "invalid call to " + spec->name + ": ";
    for (std::size_t i = 0; i < check.violations.size(); ++i) {
      if (i) text += "; ";
      text += check.violations[i].to_string();
    }
    text += ". Expected parameters: " + describe_expected(*spec);
    check.error_text = std::move(text);
    return check;
  }

  ValidatedCall validated;
  validated.tool = spec->name;
  validated.fingerprint = call_fingerprint(spec->name, coerced);
  validated.arguments = std::move(coerced);
  check.call = std::move(validated);
  return check;
}

}  // namespace toolrag
