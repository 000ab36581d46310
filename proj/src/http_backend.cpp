// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "focusagent/error.hpp"
#include "focusagent/llm_gateway.hpp"

namespace focusagent {

namespace {

std::atomic<std::uint64_t> g_http_instances{0};

constexpr std::string_view kDefaultPath = "/v1/chat/completions";

// Splits "scheme://host[:port][/path]" into the client base URL and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::invalid_config, "endpoint must start with http:// or https://");
  }
  const std::string scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::invalid_config, "unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, std::string(kDefaultPath)};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

nlohmann::json request_body(const BackendConfig& config, const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  nlohmann::json body = {{"model", *config.model_name}, {"messages", messages}};
  if (request.temperature_hint) body["temperature"] = *request.temperature_hint;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::string extract_content(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::transport_error,
                std::string("malformed chat-completion response: ") + e.what());
  }
}

}  // namespace

HttpBackend::HttpBackend(const BackendConfig& config) : config_(config) {
  validate(config_);
  if (config_.kind != BackendKind::http) {
    throw Error(ErrorKind::invalid_config, "HttpBackend needs an http config");
  }
  std::tie(base_url_, path_) = split_endpoint(*config_.endpoint);
  g_http_instances.fetch_add(1);
}

std::uint64_t HttpBackend::instances() noexcept { return g_http_instances.load(); }

std::string HttpBackend::do_complete(const ChatRequest& request) {
  httplib::Client client(base_url_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.request_timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (config_.api_key && !config_.api_key->empty()) {
    headers.emplace("Authorization", "Bearer " + *config_.api_key);
  }
  const std::string body = request_body(config_, request).dump();

  bool timed_out = false;
  std::string last_failure;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    last_attempts_.store(attempt + 1);
    if (attempt > 0) {
      const double delay = config_.retry_backoff_seconds * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      const auto err = result.error();
      timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last_failure = httplib::to_string(err);
      continue;
    }
    const int status = result->status;
    if (status >= 200 && status < 300) return extract_content(result->body);
    if (status == 429 || status >= 500) {
      timed_out = status == 504;
      last_failure = "HTTP status " + std::to_string(status);
      continue;
    }
    throw Error(ErrorKind::transport_error,
                "chat endpoint returned HTTP status " + std::to_string(status));
  }

  const std::string message = "chat endpoint " + base_url_ + path_ + " failed after " +
                              std::to_string(attempts) + " attempts: " + last_failure;
  throw Error(timed_out ? ErrorKind::backend_timeout : ErrorKind::transport_error, message);
}

}  // namespace focusagent
