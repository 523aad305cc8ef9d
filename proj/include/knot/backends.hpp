#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace knot {

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  bool estimated = false;

  TokenUsage& operator+=(const TokenUsage& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    estimated = estimated || other.estimated;
    return *this;
  }
};

// Provider-free fallback: roughly four characters per token.
inline int estimate_tokens(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

struct InferResult {
  std::string response;
  TokenUsage usage;
};

struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnrecognizedPattern : BackendError {
  explicit UnrecognizedPattern(const std::string& prompt)
      : BackendError("no elementary pattern matches prompt: " +
                     (prompt.size() > 120 ? prompt.substr(0, 120) + "..." : prompt)) {}
};

struct FixtureMiss : BackendError {
  explicit FixtureMiss(const std::string& prompt)
      : BackendError("no recorded response for prompt: " +
                     (prompt.size() > 120 ? prompt.substr(0, 120) + "..." : prompt)) {}
};

struct AuthError : BackendError {
  using BackendError::BackendError;
};

struct RateLimited : BackendError {
  using BackendError::BackendError;
};

struct TimeoutError : BackendError {
  using BackendError::BackendError;
};

struct ProviderError : BackendError {
  int status;
  ProviderError(int status_, const std::string& body)
      : BackendError("provider returned status " + std::to_string(status_) + ": " +
                     (body.size() > 200 ? body.substr(0, 200) + "..." : body)),
        status(status_) {}
};

// One single-turn inference. Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual InferResult infer(const std::string& prompt) = 0;
};

namespace detail {

inline std::string trim_copy(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

enum class ReplayMode { Record, Replay, ReplayStrict };

// Prompt -> response fixture store, persisted as JSON Lines {prompt, response}.
// Record mode forwards to an inner backend and persists each new pair.
class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::string path, ReplayMode mode, std::shared_ptr<Backend> inner = nullptr)
      : path_(std::move(path)), mode_(mode), inner_(std::move(inner)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      store_[j.at("prompt").get<std::string>()] = j.at("response").get<std::string>();
    }
  }

  InferResult infer(const std::string& prompt) override {
    const std::string key = detail::trim_copy(prompt);
    {
      std::lock_guard lock(mutex_);
      auto it = store_.find(key);
      if (it != store_.end())
        return {it->second,
                {estimate_tokens(prompt), estimate_tokens(it->second), true}};
    }
    if (mode_ == ReplayMode::ReplayStrict) throw FixtureMiss(prompt);
    if (mode_ == ReplayMode::Record && inner_) {
      InferResult result = inner_->infer(prompt);
      std::lock_guard lock(mutex_);
      store_[key] = result.response;
      std::ofstream out(path_, std::ios::app);
      out << nlohmann::json{{"prompt", key}, {"response", result.response}} << '\n';
      return result;
    }
    throw FixtureMiss(prompt);
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return store_.size();
  }

 private:
  std::string path_;
  ReplayMode mode_;
  std::shared_ptr<Backend> inner_;
  std::map<std::string, std::string> store_;
  mutable std::mutex mutex_;
};

// Test helper: fixed prompt -> response mapping, no file behind it.
class StubBackend : public Backend {
 public:
  explicit StubBackend(std::map<std::string, std::string> responses)
      : responses_(std::move(responses)) {}

  InferResult infer(const std::string& prompt) override {
    auto it = responses_.find(detail::trim_copy(prompt));
    if (it == responses_.end()) throw FixtureMiss(prompt);
    return {it->second, {estimate_tokens(prompt), estimate_tokens(it->second), true}};
  }

 private:
  std::map<std::string, std::string> responses_;
};

}  // namespace knot
