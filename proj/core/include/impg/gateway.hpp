#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "impg/error.hpp"

namespace impg {

enum class ChatRole { kSystem, kUser, kAssistant };

std::string_view to_string(ChatRole role);

struct ChatTurn {
  ChatRole role = ChatRole::kUser;
  std::string content;

  friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

// Sampling parameters and system prompt for one role (generator, evaluator,
// expert, judge).
struct RoleProfile {
  std::string system_prompt;
  double temperature = 0.2;
  double top_p = 0.7;
  int top_k = 20;
  int max_output_tokens = 4096;

  void validate() const;
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  // Delay before retry number `retry` (1-based).
  std::chrono::milliseconds delay_for(int retry) const;
};

struct BackendConfig {
  std::string base_url;        // e.g. "https://api.example.com/v1"
  std::string model;
  std::string credential_env;  // name of the environment variable holding the API key
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  int max_in_flight = 4;

  void validate() const;
};

class BackendError : public Error {
 public:
  enum class Kind { kTransport, kAuth, kHttpStatus, kMalformedResponse, kScriptExhausted, kConfig };

  BackendError(Kind kind, const std::string& message, int status = 0)
      : Error(message), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  int status() const { return status_; }

 private:
  Kind kind_;
  int status_;
};

// Prepends the profile's system turn. `turns` must be nonempty and must not
// contain system turns of its own.
std::vector<ChatTurn> build_messages(const RoleProfile& profile, std::span<const ChatTurn> turns);

// Chat-completion request body: model, messages, sampling fields.
nlohmann::json build_request_body(const std::string& model, const RoleProfile& profile,
                                  std::span<const ChatTurn> messages);

// Extracts choices[0].message.content; throws kMalformedResponse otherwise.
std::string parse_response_body(std::string_view body);

// Transport-only interface: no operation interprets message content.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  // Returns the assistant message for the system prompt of `profile`
  // followed by `turns`.
  virtual std::string complete(const RoleProfile& profile, std::span<const ChatTurn> turns) = 0;
};

// JSON-lines request/response log. Secrets registered via redact() are
// masked in every record.
class AuditLog {
 public:
  explicit AuditLog(const std::filesystem::path& path);

  void redact(std::string secret);
  void record(const nlohmann::json& entry);

 private:
  std::mutex mutex_;
  std::filesystem::path path_;
  std::vector<std::string> secrets_;
};

// HTTP chat-completion client. Retries transport errors and 5xx replies per
// the retry policy; 4xx replies fail immediately.
class HttpChatBackend : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatBackend(BackendConfig config, std::shared_ptr<AuditLog> audit = nullptr, Sleeper sleeper = {});
  ~HttpChatBackend() override;

  std::string complete(const RoleProfile& profile, std::span<const ChatTurn> turns) override;

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  std::shared_ptr<AuditLog> audit_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> in_flight_;
};

// Deterministic test double. Replays an ordered list of responses, looks
// responses up by request key, or matches regex rules against the user
// turns. Every request is recorded. Calls are serialized.
class ScriptedBackend : public ChatBackend {
 public:
  struct Rule {
    std::string pattern;
    std::string response;
  };

  static ScriptedBackend sequence(std::vector<std::string> responses, bool cycle = false);
  static ScriptedBackend table(std::map<std::string, std::string> by_request_key);
  static ScriptedBackend rules(std::vector<Rule> rules, std::optional<std::string> fallback = std::nullopt);
  // {"responses": [...], "cycle"?: bool} | {"table": {key: text}} |
  // {"rules": [{"pattern", "response"}], "default"?: text}
  static ScriptedBackend from_json(const nlohmann::json& script);

  std::string complete(const RoleProfile& profile, std::span<const ChatTurn> turns) override;

  // Full message lists (system turn included) of every call so far.
  std::vector<std::vector<ChatTurn>> requests() const;
  std::size_t call_count() const;

  ScriptedBackend(ScriptedBackend&& other) noexcept;

 private:
  enum class Mode { kSequence, kTable, kRules };
  struct CompiledRule {
    std::regex pattern;
    std::string response;
  };

  explicit ScriptedBackend(Mode mode) : mode_(mode) {}

  Mode mode_;
  std::vector<std::string> responses_;
  bool cycle_ = false;
  std::size_t cursor_ = 0;
  std::map<std::string, std::string> table_;
  std::vector<CompiledRule> rules_;
  std::optional<std::string> fallback_;
  mutable std::mutex mutex_;
  std::vector<std::vector<ChatTurn>> requests_;
};

// Stable 64-bit FNV-1a hex digest of a message list; the key used by
// ScriptedBackend::table.
std::string request_key(std::span<const ChatTurn> messages);

}  // namespace impg
