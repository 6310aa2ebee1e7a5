#include "impg/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"

namespace impg {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) {
    throw BackendError(BackendError::Kind::kConfig, "base_url must look like http(s)://host[:port][/path]: " + url);
  }
  std::string prefix = m[2].matched ? m[2].str() : std::string{};
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str(), prefix};
}

void replace_all(std::string& text, const std::string& needle, const std::string& with) {
  if (needle.empty()) return;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + with.size())) {
    text.replace(pos, needle.size(), with);
  }
}

}  // namespace

std::string_view to_string(ChatRole role) {
  switch (role) {
    case ChatRole::kSystem:
      return "system";
    case ChatRole::kUser:
      return "user";
    case ChatRole::kAssistant:
      return "assistant";
  }
  return "?";
}

void RoleProfile::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must lie in (0, 1]");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
}

std::chrono::milliseconds RetryPolicy::delay_for(int retry) const {
  const double scaled = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, std::max(0, retry - 1));
  const auto capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

void BackendConfig::validate() const {
  if (base_url.empty()) throw ConfigError("backend base_url is empty");
  if (model.empty()) throw ConfigError("backend model is empty");
  if (retry.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (max_in_flight < 1 || max_in_flight > 1024) throw ConfigError("max_in_flight must lie in 1..1024");
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
}

std::vector<ChatTurn> build_messages(const RoleProfile& profile, std::span<const ChatTurn> turns) {
  if (turns.empty()) throw PreconditionError("a chat request needs at least one turn");
  std::vector<ChatTurn> messages;
  messages.reserve(turns.size() + 1);
  messages.push_back({ChatRole::kSystem, profile.system_prompt});
  for (const auto& turn : turns) {
    if (turn.role == ChatRole::kSystem) throw PreconditionError("the system turn comes from the role profile");
    messages.push_back(turn);
  }
  return messages;
}

nlohmann::json build_request_body(const std::string& model, const RoleProfile& profile,
                                  std::span<const ChatTurn> messages) {
  nlohmann::json body;
  body["model"] = model;
  auto& list = body["messages"] = nlohmann::json::array();
  for (const auto& turn : messages) list.push_back({{"role", to_string(turn.role)}, {"content", turn.content}});
  body["temperature"] = profile.temperature;
  body["top_p"] = profile.top_p;
  body["top_k"] = profile.top_k;
  body["max_tokens"] = profile.max_output_tokens;
  body["stream"] = false;
  return body;
}

std::string parse_response_body(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(BackendError::Kind::kMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  const auto* content = [&]() -> const nlohmann::json* {
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
      return nullptr;
    }
    const auto& first = doc["choices"][0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) return nullptr;
    const auto& message = first["message"];
    if (!message.contains("content") || !message["content"].is_string()) return nullptr;
    return &message["content"];
  }();
  if (content == nullptr) {
    throw BackendError(BackendError::Kind::kMalformedResponse, "response lacks choices[0].message.content");
  }
  return content->get<std::string>();
}

// ---------------------------------------------------------------------------

AuditLog::AuditLog(const std::filesystem::path& path) : path_(path) {
  std::ofstream touch(path_, std::ios::app);
  if (!touch) throw ConfigError("cannot open audit log " + path_.string());
}

void AuditLog::redact(std::string secret) {
  std::lock_guard lock(mutex_);
  if (!secret.empty()) secrets_.push_back(std::move(secret));
}

void AuditLog::record(const nlohmann::json& entry) {
  std::lock_guard lock(mutex_);
  std::string line = entry.dump();
  for (const auto& secret : secrets_) replace_all(line, secret, "[REDACTED]");
  std::ofstream out(path_, std::ios::app);
  out << line << '\n';
}

// ---------------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(BackendConfig config, std::shared_ptr<AuditLog> audit, Sleeper sleeper)
    : config_(std::move(config)),
      audit_(std::move(audit)),
      sleeper_(std::move(sleeper)),
      in_flight_(config_.max_in_flight) {
  config_.validate();
  parse_base_url(config_.base_url);
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpChatBackend::~HttpChatBackend() = default;

std::string HttpChatBackend::complete(const RoleProfile& profile, std::span<const ChatTurn> turns) {
  const auto messages = build_messages(profile, turns);
  const auto url = parse_base_url(config_.base_url);
  const std::string path = url.prefix + "/chat/completions";
  const std::string body = build_request_body(config_.model, profile, messages).dump();

  httplib::Headers headers;
  std::string secret;
  if (!config_.credential_env.empty()) {
    const char* value = std::getenv(config_.credential_env.c_str());
    if (value == nullptr || *value == '\0') {
      throw BackendError(BackendError::Kind::kAuth,
                         "credential variable " + config_.credential_env + " is not set for " + config_.model);
    }
    secret = value;
    headers.emplace("Authorization", "Bearer " + secret);
    if (audit_) audit_->redact(secret);
  }

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& sem;
    ~Release() { sem.release(); }
  } release{in_flight_};

  httplib::Client client(url.origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  const auto log = [&](int attempt, int status, const std::string& outcome) {
    if (!audit_) return;
    audit_->record({{"model", config_.model},
                    {"url", config_.base_url},
                    {"attempt", attempt},
                    {"status", status},
                    {"request", nlohmann::json::parse(body)},
                    {"outcome", outcome}});
  };

  for (int attempt = 0;; ++attempt) {
    const bool can_retry = attempt < config_.retry.max_retries;
    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      const std::string why = httplib::to_string(result.error());
      log(attempt, 0, "transport error: " + why);
      if (!can_retry) {
        throw BackendError(BackendError::Kind::kTransport,
                           "request to " + config_.base_url + " failed after " + std::to_string(attempt + 1) +
                               " attempt(s): " + why);
      }
      sleeper_(config_.retry.delay_for(attempt + 1));
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      log(attempt, status, "authentication rejected");
      throw BackendError(BackendError::Kind::kAuth, "authentication rejected by " + config_.base_url, status);
    }
    if (status >= 500) {
      log(attempt, status, "server error");
      if (!can_retry) {
        throw BackendError(BackendError::Kind::kHttpStatus,
                           "server error " + std::to_string(status) + " from " + config_.base_url + " after " +
                               std::to_string(attempt + 1) + " attempt(s)",
                           status);
      }
      sleeper_(config_.retry.delay_for(attempt + 1));
      continue;
    }
    if (status < 200 || status >= 300) {
      log(attempt, status, "client error");
      throw BackendError(BackendError::Kind::kHttpStatus,
                         "HTTP " + std::to_string(status) + " from " + config_.base_url, status);
    }
    try {
      auto text = parse_response_body(result->body);
      log(attempt, status, text);
      return text;
    } catch (const BackendError&) {
      log(attempt, status, "malformed response");
      throw;
    }
  }
}

// ---------------------------------------------------------------------------

std::string request_key(std::span<const ChatTurn> messages) {
  std::uint64_t hash = 1469598103934665603ULL;
  const auto mix = [&](std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash ^= c;
      hash *= 1099511628211ULL;
    }
    hash ^= 0xFF;
    hash *= 1099511628211ULL;
  };
  for (const auto& turn : messages) {
    mix(to_string(turn.role));
    mix(turn.content);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ScriptedBackend::ScriptedBackend(ScriptedBackend&& other) noexcept
    : mode_(other.mode_),
      responses_(std::move(other.responses_)),
      cycle_(other.cycle_),
      cursor_(other.cursor_),
      table_(std::move(other.table_)),
      rules_(std::move(other.rules_)),
      fallback_(std::move(other.fallback_)),
      requests_(std::move(other.requests_)) {}

ScriptedBackend ScriptedBackend::sequence(std::vector<std::string> responses, bool cycle) {
  if (responses.empty()) throw PreconditionError("a scripted backend needs at least one response");
  ScriptedBackend backend(Mode::kSequence);
  backend.responses_ = std::move(responses);
  backend.cycle_ = cycle;
  return backend;
}

ScriptedBackend ScriptedBackend::table(std::map<std::string, std::string> by_request_key) {
  if (by_request_key.empty()) throw PreconditionError("a scripted backend needs at least one response");
  ScriptedBackend backend(Mode::kTable);
  backend.table_ = std::move(by_request_key);
  return backend;
}

ScriptedBackend ScriptedBackend::rules(std::vector<Rule> rules, std::optional<std::string> fallback) {
  if (rules.empty() && !fallback) throw PreconditionError("a scripted backend needs at least one response");
  ScriptedBackend backend(Mode::kRules);
  for (auto& rule : rules) {
    try {
      backend.rules_.push_back({std::regex(rule.pattern), std::move(rule.response)});
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid script pattern '" + rule.pattern + "': " + e.what());
    }
  }
  backend.fallback_ = std::move(fallback);
  return backend;
}

ScriptedBackend ScriptedBackend::from_json(const nlohmann::json& script) {
  try {
    if (script.is_array()) return sequence(script.get<std::vector<std::string>>());
    if (!script.is_object()) throw ConfigError("a script must be an object or an array of responses");
    if (script.contains("responses")) {
      return sequence(script["responses"].get<std::vector<std::string>>(), script.value("cycle", false));
    }
    if (script.contains("table")) return table(script["table"].get<std::map<std::string, std::string>>());
    if (script.contains("rules")) {
      std::vector<Rule> rules;
      for (const auto& r : script["rules"]) {
        rules.push_back({r.at("pattern").get<std::string>(), r.at("response").get<std::string>()});
      }
      std::optional<std::string> fallback;
      if (script.contains("default")) fallback = script["default"].get<std::string>();
      return ScriptedBackend::rules(std::move(rules), std::move(fallback));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed script: ") + e.what());
  }
  throw ConfigError("a script needs \"responses\", \"table\" or \"rules\"");
}

std::string ScriptedBackend::complete(const RoleProfile& profile, std::span<const ChatTurn> turns) {
  auto messages = build_messages(profile, turns);
  std::lock_guard lock(mutex_);
  const auto call = requests_.size() + 1;
  requests_.push_back(messages);
  switch (mode_) {
    case Mode::kSequence: {
      if (cursor_ >= responses_.size()) {
        if (!cycle_) {
          throw BackendError(BackendError::Kind::kScriptExhausted,
                             "script exhausted at call " + std::to_string(call) + " (" +
                                 std::to_string(responses_.size()) + " responses)");
        }
        cursor_ = 0;
      }
      return responses_[cursor_++];
    }
    case Mode::kTable: {
      const auto key = request_key(messages);
      auto it = table_.find(key);
      if (it == table_.end()) {
        throw BackendError(BackendError::Kind::kScriptExhausted, "script has no response for request " + key);
      }
      return it->second;
    }
    case Mode::kRules: {
      const std::string& last_user = [&]() -> const std::string& {
        for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
          if (it->role == ChatRole::kUser) return it->content;
        }
        return messages.back().content;
      }();
      for (const auto& rule : rules_) {
        if (std::regex_search(last_user, rule.pattern)) return rule.response;
      }
      if (fallback_) return *fallback_;
      throw BackendError(BackendError::Kind::kScriptExhausted, "no script rule matches call " + std::to_string(call));
    }
  }
  throw BackendError(BackendError::Kind::kScriptExhausted, "unreachable script mode");
}

std::vector<std::vector<ChatTurn>> ScriptedBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::size_t ScriptedBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

}  // namespace impg
