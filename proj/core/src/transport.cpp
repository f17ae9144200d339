#include "toolrag/transport.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "toolrag/text.hpp"

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace toolrag {

using nlohmann::json;

HttpRequest HttpRequest::from_url(std::string method, const std::string& full_url) {
  HttpRequest request;
  request.method = std::move(method);
  auto question = full_url.find('?');
  request.url = full_url.substr(0, question);
  if (question != std::string::npos) {
    std::string_view rest(full_url);
    rest.remove_prefix(question + 1);
    while (!rest.empty()) {
      auto amp = rest.find('&');
      std::string_view pair = rest.substr(0, amp);
      if (!pair.empty()) {
        auto eq = pair.find('=');
        if (eq == std::string_view::npos) {
          request.query.emplace_back(std::string(pair), "");
        } else {
          request.query.emplace_back(std::string(pair.substr(0, eq)), std::string(pair.substr(eq + 1)));
        }
      }
      if (amp == std::string_view::npos) break;
      rest.remove_prefix(amp + 1);
    }
  }
  request.canonicalize();
  return request;
}

void HttpRequest::add_param(std::string key, std::string encoded_value) {
  query.emplace_back(std::move(key), std::move(encoded_value));
  canonicalize();
}

void HttpRequest::canonicalize() { std::stable_sort(query.begin(), query.end()); }

std::string HttpRequest::full_url() const {
  std::string out = url;
  for (std::size_t i = 0; i < query.size(); ++i) {
    out += (i == 0 ? '?' : '&');
    out += query[i].first;
    out += '=';
    out += query[i].second;
  }
  return out;
}

namespace {

std::string public_url(const HttpRequest& request) {
  HttpRequest copy = request;
  std::erase_if(copy.query, [](const auto& kv) { return kv.first == "api_key"; });
  return copy.full_url();
}

}  // namespace

std::string HttpRequest::fingerprint() const {
  return text::to_hex(text::fnv1a64(method + "\n" + public_url(*this) + "\n" + body));
}

std::string HttpRequest::summary() const { return method + " " + public_url(*this); }

HttpResponse HttplibTransport::send(const HttpRequest& request) {
  auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("malformed url " + request.url);
  auto path_start = request.url.find('/', scheme_end + 3);
  std::string origin = request.url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);
  std::string target = path;
  std::string query = request.full_url().substr(request.url.size());
  target += query;

  httplib::Client client(origin);
  client.set_url_encode(false);
  client.set_follow_location(true);
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());

  httplib::Headers headers(request.headers.begin(), request.headers.end());
  httplib::Result result = request.method == "POST"
                               ? client.Post(target, headers, request.body, "application/json")
                               : client.Get(target, headers);
  if (!result) throw TransportError(httplib::to_string(result.error()) + " (" + request.summary() + ")");

  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  return response;
}

std::filesystem::path FixtureStore::path_for(const HttpRequest& request) const {
  return directory_ / (request.fingerprint() + ".json");
}

std::optional<HttpResponse> FixtureStore::load(const HttpRequest& request) const {
  std::ifstream in(path_for(request), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
    HttpResponse response;
    response.status = doc.at("status").get<int>();
    response.body = doc.at("body").get<std::string>();
    response.fetched_at_ms = doc.value("fetched_at_ms", std::int64_t{0});
    response.replayed = true;
    return response;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCacheIoError, "corrupt fixture " + path_for(request).string() + ": " + e.what());
  }
}

void FixtureStore::save(const HttpRequest& request, const HttpResponse& response) const {
  json doc = {{"request", {{"method", request.method}, {"url", public_url(request)}, {"body", request.body}}},
              {"status", response.status},
              {"body", response.body},
              {"fetched_at_ms", response.fetched_at_ms}};
  std::lock_guard lock(write_mutex_);
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  auto target = path_for(request);
  auto temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kCacheIoError, "cannot write fixture " + temp.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kCacheIoError, "short write to " + temp.string());
  }
  std::filesystem::rename(temp, target, ec);
  if (ec) throw Error(ErrorCode::kCacheIoError, "cannot move fixture into place: " + ec.message());
}

std::string_view to_string(FetchMode mode) {
  switch (mode) {
    case FetchMode::kLive: return "live";
    case FetchMode::kFixturesOnly: return "fixtures_only";
    case FetchMode::kRecord: return "record";
  }
  return "live";
}

HttpResponse ReplayTransport::send(const HttpRequest& request) {
  if (mode_ == FetchMode::kFixturesOnly) {
    if (auto stored = store_->load(request)) return *stored;
    throw FixtureMissingError(request.summary());
  }
  if (!inner_) throw TransportError("no transport configured for " + request.summary());
  HttpResponse response = inner_->send(request);
  response.fetched_at_ms = clock_.now_ms();
  if (mode_ == FetchMode::kRecord) store_->save(request, response);
  return response;
}

HttpResponse send_with_retry(Transport& transport, const HttpRequest& request, const RetryPolicy& policy) {
  auto backoff = policy.initial_backoff;
  int attempts = std::max(1, policy.attempts);
  for (int attempt = 1;; ++attempt) {
    bool last = attempt == attempts;
    try {
      HttpResponse response = transport.send(request);
      if (response.status < 500 || last) return response;
    } catch (const TransportError&) {
      if (last) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(backoff.count()) * policy.multiplier));
  }
}

std::size_t import_captured_responses(const std::filesystem::path& manifest, const FixtureStore& store) {
  auto slurp = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  json entries;
  try {
    entries = json::parse(slurp(manifest));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("capture manifest: ") + e.what(), 1, e.byte);
  }
  if (!entries.is_array()) throw Error(ErrorCode::kSchemaError, "capture manifest must be a JSON list");
  std::size_t written = 0;
  for (const auto& entry : entries) {
    try {
      HttpRequest request = HttpRequest::from_url(entry.value("method", std::string("GET")), entry.at("url").get<std::string>());
      if (entry.contains("request_body")) request.body = entry.at("request_body").get<std::string>();
      HttpResponse response;
      response.status = entry.at("status").get<int>();
      response.body = slurp(manifest.parent_path() / entry.at("body_file").get<std::string>());
      response.fetched_at_ms = entry.value("fetched_at_ms", std::int64_t{0});
      store.save(request, response);
      ++written;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError, std::string("capture manifest entry: ") + e.what());
    }
  }
  return written;
}

}  // namespace toolrag
