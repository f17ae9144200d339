#include "toolrag/executor.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

using nlohmann::json;

std::string_view to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::kOk: return "ok";
    case OutcomeStatus::kValidationError: return "validation_error";
    case OutcomeStatus::kExecutionError: return "execution_error";
    case OutcomeStatus::kCached: return "cached";
  }
  return "ok";
}

json ToolOutcome::to_json() const {
  return {{"status", to_string(status)},
          {"payload", payload},
          {"latency_ms", latency_ms},
          {"fingerprint", fingerprint},
          {"payload_bytes", payload_bytes},
          {"stale", stale}};
}

ToolOutcome ToolOutcome::from_json(const json& node) {
  ToolOutcome outcome;
  std::string status = node.at("status").get<std::string>();
  if (status == "ok") {
    outcome.status = OutcomeStatus::kOk;
  } else if (status == "validation_error") {
    outcome.status = OutcomeStatus::kValidationError;
  } else if (status == "execution_error") {
    outcome.status = OutcomeStatus::kExecutionError;
  } else if (status == "cached") {
    outcome.status = OutcomeStatus::kCached;
  } else {
    throw Error(ErrorCode::kSchemaError, "unknown outcome status '" + status + "'");
  }
  outcome.payload = node.at("payload").get<std::string>();
  outcome.latency_ms = node.at("latency_ms").get<std::int64_t>();
  outcome.fingerprint = node.at("fingerprint").get<std::string>();
  outcome.payload_bytes = node.at("payload_bytes").get<std::size_t>();
  outcome.stale = node.value("stale", false);
  return outcome;
}

std::map<std::string, bool> ExecutionEnv::api_key_presence() const {
  std::map<std::string, bool> out;
  const char* value = std::getenv(openfda_api_key_env.c_str());
  out[openfda_api_key_env] = value != nullptr && *value != '\0';
  return out;
}

namespace {

constexpr std::array<std::string_view, 24> kOpenFdaFields = {
    "adverse_reactions",         "boxed_warning",
    "clinical_pharmacology",     "contraindications",
    "description",               "dosage_and_administration",
    "dosage_forms_and_strengths", "drug_abuse_and_dependence",
    "drug_interactions",         "geriatric_use",
    "how_supplied",              "indications_and_usage",
    "mechanism_of_action",       "nursing_mothers",
    "overdosage",                "pediatric_use",
    "pharmacokinetics",          "precautions",
    "pregnancy",                 "purpose",
    "use_in_specific_populations", "warnings",
    "warnings_and_cautions",     "lactation",
};

std::string scalar_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_null()) return "";
  return value.dump();
}

// Arrays of strings (openFDA's shape for label fields) are joined by blank lines.
std::string payload_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array() && std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_string(); })) {
    std::string out;
    for (const auto& v : value) {
      if (!out.empty()) out += "\n\n";
      out += v.get<std::string>();
    }
    return out;
  }
  return value.dump(2);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "fixture missing: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string require_string_arg(const ValidatedCall& call, const char* name) {
  auto it = call.arguments.find(name);
  if (it == call.arguments.end() || !it->is_string()) {
    throw Error(ErrorCode::kPrecondition, std::string("missing argument '") + name + "'");
  }
  return it->get<std::string>();
}

std::string dailymed_handler(Executor& executor, const ValidatedCall& call) {
  DailyMedResult result = executor.dailymed_lookup(require_string_arg(call, "drug_name"));
  std::string out = result.document.render();
  if (result.ambiguous) out = "Note: several labels matched; the most recent exact-name label was selected.\n" + out;
  return out;
}

std::string openfda_handler(Executor& executor, const ValidatedCall& call) {
  std::string drug = require_string_arg(call, "drug_name");
  std::string field = require_string_arg(call, "field");
  std::string name_type = call.arguments.value("name_type", std::string("brand"));
  std::string search = "openfda." + name_type + "_name:\"" + drug + "\"";
  return executor.openfda_label_field(search, field);
}

std::string echo_handler(Executor&, const ValidatedCall& call) { return call.arguments.dump(); }

// Exact-name match: the label title starts with the drug name's tokens.
bool exact_name_match(const std::string& title, const std::vector<std::string>& name_tokens) {
  auto title_tokens = text::tokenize(title);
  if (name_tokens.empty() || title_tokens.size() < name_tokens.size()) return false;
  return std::equal(name_tokens.begin(), name_tokens.end(), title_tokens.begin());
}

}  // namespace

std::span<const std::string_view> openfda_label_fields() { return kOpenFdaFields; }

std::string expand_template(std::string_view pattern, const json& arguments, bool encode) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '{') {
      out.push_back(pattern[i]);
      continue;
    }
    std::size_t close = pattern.find('}', i);
    if (close == std::string_view::npos) throw Error(ErrorCode::kConfigError, "unclosed '{' in template");
    std::string key(pattern.substr(i + 1, close - i - 1));
    auto it = arguments.find(key);
    std::string value = it == arguments.end() ? std::string() : scalar_text(*it);
    out += encode ? text::url_encode(value) : value;
    i = close;
  }
  return out;
}

HttpResponse Executor::CountingTransport::send(const HttpRequest& request) {
  ++count;
  if (!inner) throw TransportError("network access is disabled");
  return inner->send(request);
}

Executor::Executor(ExecutionEnv env, std::shared_ptr<Transport> network, Clock& clock)
    : env_(std::move(env)), clock_(clock) {
  counter_ = std::make_shared<CountingTransport>();
  counter_->inner = std::move(network);
  store_ = std::make_shared<FixtureStore>(env_.http_fixture_dir);
  replay_ = std::make_shared<ReplayTransport>(counter_, store_, env_.mode, clock_);
  register_builtin("dailymed.get_spl", dailymed_handler);
  register_builtin("openfda.label_field", openfda_handler);
  register_builtin("echo", echo_handler);
}

void Executor::register_builtin(std::string id, BuiltinHandler handler) { builtins_[std::move(id)] = std::move(handler); }

HttpResponse Executor::cache_roundtrip(const HttpRequest& request) {
  std::string key = request.fingerprint();
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      bool fresh = clock_.now_ms() - it->second.fetched_at_ms < env_.cache_ttl_ms;
      if (fresh) return it->second.response;
      if (env_.mode == FetchMode::kFixturesOnly) {
        HttpResponse stale = it->second.response;
        stale.stale = true;
        return stale;
      }
    }
  }

  HttpResponse response = send_with_retry(*replay_, request, env_.retry);
  std::int64_t now = clock_.now_ms();
  if (response.replayed && now - response.fetched_at_ms >= env_.cache_ttl_ms) response.stale = true;
  if (response.status < 500) {
    std::lock_guard lock(cache_mutex_);
    cache_[key] = CacheEntry{response, response.replayed ? response.fetched_at_ms : now};
  }
  return response;
}

ToolOutcome Executor::execute(const ToolSpec& spec, const ValidatedCall& call) {
  ToolOutcome outcome;
  outcome.fingerprint = call.fingerprint.empty() ? call_fingerprint(call.tool, call.arguments) : call.fingerprint;
  std::int64_t start = clock_.now_ms();
  try {
    std::string payload = std::visit(
        [&](const auto& binding) -> std::string {
          using T = std::decay_t<decltype(binding)>;
          if constexpr (std::is_same_v<T, BuiltinBinding>) {
            auto it = builtins_.find(binding.handler);
            if (it == builtins_.end()) throw Error(ErrorCode::kConfigError, "no builtin handler '" + binding.handler + "'");
            return it->second(*this, call);
          } else if constexpr (std::is_same_v<T, HttpBinding>) {
            return run_http(binding, call);
          } else {
            return run_fixture(binding, call);
          }
        },
        spec.binding);
    outcome.status = OutcomeStatus::kOk;
    outcome.payload = std::move(payload);
  } catch (const std::exception& e) {
    outcome.status = OutcomeStatus::kExecutionError;
    outcome.payload = e.what();
  }
  outcome.payload_bytes = outcome.payload.size();
  outcome.latency_ms = clock_.now_ms() - start;
  return outcome;
}

std::string Executor::run_http(const HttpBinding& binding, const ValidatedCall& call) {
  HttpRequest request = HttpRequest::from_url(binding.method, expand_template(binding.url_template, call.arguments, true));
  if (binding.method == "POST") {
    request.body = call.arguments.dump();
    request.headers["Content-Type"] = "application/json";
  }
  HttpResponse response = cache_roundtrip(request);
  if (!response.success()) {
    throw Error(response.status == 404 ? ErrorCode::kNotFound : ErrorCode::kUpstreamError,
                "status " + std::to_string(response.status) + " from " + request.summary());
  }
  if (binding.extract.empty()) return response.body;
  json body;
  try {
    body = json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kUpstreamError, std::string("response is not JSON: ") + e.what());
  }
  json::json_pointer pointer(binding.extract);
  if (!body.contains(pointer)) throw Error(ErrorCode::kNotFound, "extraction miss: " + binding.extract);
  return payload_text(body.at(pointer));
}

std::string Executor::run_fixture(const FixtureBinding& binding, const ValidatedCall& call) {
  std::filesystem::path relative(expand_template(binding.file, call.arguments, false));
  for (const auto& part : relative) {
    if (part == "..") throw Error(ErrorCode::kPrecondition, "fixture path escapes the fixture root");
  }
  if (relative.is_absolute()) throw Error(ErrorCode::kPrecondition, "fixture path must be relative");
  return read_file(env_.tool_fixture_dir / relative);
}

DailyMedResult Executor::dailymed_lookup(std::string_view drug_name) {
  std::string name = text::trim(drug_name);
  if (name.empty()) throw Error(ErrorCode::kPrecondition, "drug name is empty");

  HttpRequest listing = HttpRequest::from_url("GET", env_.dailymed_base_url + "/spls.json");
  listing.add_param("drug_name", text::url_encode(name));
  HttpResponse response = cache_roundtrip(listing);
  if (response.status == 404) throw Error(ErrorCode::kNotFound, name);
  if (!response.success()) {
    throw Error(ErrorCode::kUpstreamError, "DailyMed listing returned status " + std::to_string(response.status));
  }

  struct Candidate {
    std::string set_id;
    std::string title;
    int version = 0;
  };
  std::vector<Candidate> candidates;
  try {
    json doc = json::parse(response.body);
    for (const auto& entry : doc.at("data")) {
      Candidate c;
      c.set_id = entry.at("setid").get<std::string>();
      c.title = entry.value("title", std::string());
      c.version = entry.value("spl_version", 0);
      candidates.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUpstreamError, std::string("malformed DailyMed listing: ") + e.what());
  }
  if (candidates.empty()) throw Error(ErrorCode::kNotFound, name);

  auto name_tokens = text::tokenize(name);
  const Candidate* chosen = nullptr;
  std::size_t exact = 0;
  for (const auto& c : candidates) {
    if (!exact_name_match(c.title, name_tokens)) continue;
    ++exact;
    if (chosen == nullptr || c.version > chosen->version) chosen = &c;
  }
  DailyMedResult result;
  result.ambiguous = exact > 1 || (exact == 0 && candidates.size() > 1);
  if (chosen == nullptr) chosen = &candidates.front();

  HttpRequest label = HttpRequest::from_url("GET", env_.dailymed_base_url + "/spls/" + text::url_encode(chosen->set_id) + ".xml");
  HttpResponse label_response = cache_roundtrip(label);
  if (label_response.status == 404) throw Error(ErrorCode::kNotFound, name + " (set id " + chosen->set_id + ")");
  if (!label_response.success()) {
    throw Error(ErrorCode::kUpstreamError, "DailyMed label returned status " + std::to_string(label_response.status));
  }
  try {
    result.document = parse_spl_xml(label_response.body);
  } catch (const Error& e) {
    throw Error(ErrorCode::kUpstreamError, std::string("malformed SPL document: ") + e.what());
  }
  if (result.document.drug_name.empty()) result.document.drug_name = chosen->title;
  return result;
}

std::string Executor::openfda_label_field(std::string_view search, std::string_view field) {
  auto fields = openfda_label_fields();
  if (std::find(fields.begin(), fields.end(), field) == fields.end()) {
    throw Error(ErrorCode::kUnknownField, std::string(field));
  }
  HttpRequest request = HttpRequest::from_url("GET", env_.openfda_label_url);
  request.add_param("search", text::url_encode(search));
  request.add_param("limit", "1");
  if (const char* key = std::getenv(env_.openfda_api_key_env.c_str()); key != nullptr && *key != '\0') {
    request.add_param("api_key", text::url_encode(key));
  }
  HttpResponse response = cache_roundtrip(request);
  if (response.status == 404) throw Error(ErrorCode::kNotFound, std::string(search));
  if (!response.success()) {
    throw Error(ErrorCode::kUpstreamError, "openFDA returned status " + std::to_string(response.status));
  }
  json doc;
  try {
    doc = json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kUpstreamError, std::string("malformed openFDA response: ") + e.what());
  }
  auto results = doc.find("results");
  if (results == doc.end() || !results->is_array() || results->empty()) {
    throw Error(ErrorCode::kNotFound, std::string(search));
  }
  const json& label = results->front();
  auto value = label.find(std::string(field));
  if (value == label.end()) throw Error(ErrorCode::kNotFound, "label has no '" + std::string(field) + "' field");
  return payload_text(*value);
}

}  // namespace toolrag
