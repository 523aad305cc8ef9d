#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "knot/backends.hpp"

namespace knot {

struct HttpBackendConfig {
  std::string base_url = "http://localhost:8080";
  std::string model = "gpt-3.5-turbo-16k";
  std::string api_key_env = "KNOT_API_KEY";
  double temperature = 0.0;   // matches the evaluation setup
  int max_output_tokens = 4096;
  int timeout_seconds = 120;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
};

namespace http_detail {

struct ParsedUrl {
  std::string host_port;  // scheme://host[:port]
  std::string path_prefix;
};

inline ParsedUrl split_url(const std::string& base_url) {
  std::size_t scheme = base_url.find("://");
  std::size_t path = scheme == std::string::npos ? base_url.find('/')
                                                 : base_url.find('/', scheme + 3);
  if (path == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path), prefix};
}

}  // namespace http_detail

// Chat-completion client: single user message per call, provider-reported
// usage when present, exponential backoff on transient failures.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key)
      throw AuthError("API key environment variable " + cfg_.api_key_env + " is not set");
    api_key_ = key;
  }

  InferResult infer(const std::string& prompt) override {
    if (prompt.empty()) throw BackendError("empty prompt");
    nlohmann::json body = {
        {"model", cfg_.model},
        {"temperature", cfg_.temperature},
        {"max_tokens", cfg_.max_output_tokens},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
    };
    const std::string payload = body.dump();
    auto url = http_detail::split_url(cfg_.base_url);

    std::chrono::milliseconds backoff = cfg_.initial_backoff;
    int status = 0;
    std::string last_body;
    for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Client client(url.host_port);
      client.set_read_timeout(cfg_.timeout_seconds, 0);
      client.set_connection_timeout(cfg_.timeout_seconds, 0);
      httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
      auto res = client.Post(url.path_prefix + "/chat/completions", headers, payload,
                             "application/json");
      if (!res) {
        status = 0;
        last_body = httplib::to_string(res.error());
        continue;
      }
      status = res->status;
      last_body = res->body;
      if (status == 401 || status == 403) throw AuthError("authentication rejected: " + last_body);
      if (status == 429 || status >= 500) continue;  // transient, retry
      if (status != 200) throw ProviderError(status, last_body);
      return parse_response(prompt, last_body);
    }
    if (status == 429) throw RateLimited("rate limited after retries: " + last_body);
    if (status == 0) throw TimeoutError("request failed after retries: " + last_body);
    throw ProviderError(status, last_body);
  }

 private:
  InferResult parse_response(const std::string& prompt, const std::string& body) const {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ProviderError(200, "unparseable response body: " + body);
    InferResult result;
    try {
      result.response = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProviderError(200, "missing choices[0].message.content: " + body);
    }
    if (j.contains("usage")) {
      result.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      result.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
      result.usage.estimated = false;
    } else {
      result.usage = {estimate_tokens(prompt), estimate_tokens(result.response), true};
    }
    return result;
  }

  HttpBackendConfig cfg_;
  std::string api_key_;
};

}  // namespace knot
