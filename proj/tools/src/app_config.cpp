#include "app_config.hpp"

#include <initializer_list>
#include <set>

#include <toml.hpp>

namespace impg::cli {

namespace {

const std::set<std::string> kRoleNames = {"generator", "evaluator", "expert", "judge"};

void check_keys(const toml::table& table, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : table) {
    bool known = false;
    for (auto a : allowed) known = known || key.str() == a;
    if (!known) throw ConfigError("unknown key '" + std::string(key.str()) + "' in [" + where + "]");
  }
}

const toml::table* subtable(const toml::table& parent, std::string_view key, const std::string& where) {
  const auto* node = parent.get(key);
  if (node == nullptr) return nullptr;
  const auto* table = node->as_table();
  if (table == nullptr) throw ConfigError("'" + where + "' must be a table");
  return table;
}

template <typename T>
std::optional<T> get(const toml::table& table, std::string_view key, const std::string& where) {
  const auto* node = table.get(key);
  if (node == nullptr) return std::nullopt;
  auto value = node->value<T>();
  if (!value) throw ConfigError("'" + where + "." + std::string(key) + "' has the wrong type");
  return value;
}

template <typename T>
void set(T& out, const toml::table& table, std::string_view key, const std::string& where) {
  if (auto v = get<T>(table, key, where)) out = *v;
}

void set_path(std::filesystem::path& out, const toml::table& table, std::string_view key,
              const std::filesystem::path& base) {
  if (auto v = get<std::string>(table, key, "paths")) out = v->empty() ? std::filesystem::path() : base / *v;
}

template <std::size_t N>
std::array<double, N> number_array(const toml::table& table, std::string_view key, const std::string& where) {
  const auto* arr = table.get_as<toml::array>(key);
  if (arr == nullptr || arr->size() != N) {
    throw ConfigError("'" + where + "." + std::string(key) + "' must be an array of " + std::to_string(N) +
                      " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    auto v = (*arr)[i].value<double>();
    if (!v) throw ConfigError("'" + where + "." + std::string(key) + "' must contain numbers only");
    out[i] = *v;
  }
  return out;
}

void read_role(RoleConfig& role, const toml::table& table, const std::string& name) {
  const auto where = "roles." + name;
  check_keys(table, where,
             {"base_url", "model", "credential_env", "timeout_s", "max_retries", "backoff_ms", "max_backoff_ms",
              "max_in_flight", "system_prompt", "temperature", "top_p", "top_k", "max_output_tokens"});
  auto& p = role.profile;
  set(p.temperature, table, "temperature", where);
  set(p.top_p, table, "top_p", where);
  set(p.top_k, table, "top_k", where);
  set(p.max_output_tokens, table, "max_output_tokens", where);
  set(p.system_prompt, table, "system_prompt", where);

  if (table.contains("base_url") || table.contains("model")) {
    BackendConfig b;
    set(b.base_url, table, "base_url", where);
    set(b.model, table, "model", where);
    set(b.credential_env, table, "credential_env", where);
    if (auto v = get<std::int64_t>(table, "timeout_s", where)) b.timeout = std::chrono::seconds(*v);
    set(b.retry.max_retries, table, "max_retries", where);
    if (auto v = get<std::int64_t>(table, "backoff_ms", where)) b.retry.initial_backoff = std::chrono::milliseconds(*v);
    if (auto v = get<std::int64_t>(table, "max_backoff_ms", where)) b.retry.max_backoff = std::chrono::milliseconds(*v);
    set(b.max_in_flight, table, "max_in_flight", where);
    b.validate();
    role.backend = b;
  }
  p.validate();
}

}  // namespace

DifficultyBands AppConfig::bands() const {
  return band_edges ? DifficultyBands::from_edges(*band_edges) : DifficultyBands::equal_width(sigma);
}

const RoleConfig& AppConfig::role(const std::string& name) const {
  auto it = roles.find(name);
  if (it == roles.end()) throw ConfigError("unknown role '" + name + "'");
  return it->second;
}

AppConfig default_config(const std::filesystem::path& base_dir) {
  AppConfig c;
  c.paths.corpus = base_dir / "corpus/synthetic_50.jsonl";
  c.paths.matrix = base_dir / "matrix.json";
  c.paths.templates = base_dir / "templates";
  c.paths.table = base_dir / "difficulty_table.json";
  c.paths.crs_rules = base_dir / "crs_rules.json";
  for (const auto& name : kRoleNames) c.roles[name] = RoleConfig{};
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  require_file(path, "config file");
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
  const auto base = path.parent_path();
  AppConfig c = default_config(base);
  check_keys(root, "root", {"paths", "difficulty", "sampler", "loop", "roles", "arena"});

  if (const auto* t = subtable(root, "paths", "paths")) {
    check_keys(*t, "paths", {"corpus", "matrix", "templates", "table", "crs_rules", "audit_log"});
    set_path(c.paths.corpus, *t, "corpus", base);
    set_path(c.paths.matrix, *t, "matrix", base);
    set_path(c.paths.templates, *t, "templates", base);
    set_path(c.paths.table, *t, "table", base);
    set_path(c.paths.crs_rules, *t, "crs_rules", base);
    set_path(c.paths.audit_log, *t, "audit_log", base);
  }
  if (const auto* t = subtable(root, "difficulty", "difficulty")) {
    check_keys(*t, "difficulty", {"sigma", "bands"});
    if (t->contains("sigma")) c.sigma = WeightVector(number_array<kDimensionCount>(*t, "sigma", "difficulty"));
    if (t->contains("bands")) c.band_edges = number_array<5>(*t, "bands", "difficulty");
    const auto bands = c.bands();
    if (!bands.covers(c.sigma, 1e-9)) throw ConfigError("difficulty bands do not span the attainable range");
  }
  if (const auto* t = subtable(root, "sampler", "sampler")) {
    check_keys(*t, "sampler", {"batch_size", "max_rounds", "seed"});
    set(c.sampler.batch_size, *t, "batch_size", "sampler");
    set(c.sampler.max_attempt_rounds, *t, "max_rounds", "sampler");
    if (auto v = get<std::int64_t>(*t, "seed", "sampler")) c.sampler.seed = static_cast<std::uint64_t>(*v);
    c.sampler.validate();
  }
  if (const auto* t = subtable(root, "loop", "loop")) {
    check_keys(*t, "loop", {"tau_max", "mode", "retry_budget", "history_cycles", "parse_retries", "thresholds"});
    set(c.loop.tau_max, *t, "tau_max", "loop");
    if (auto v = get<std::string>(*t, "mode", "loop")) c.loop.mode = parse_eval_mode(*v);
    set(c.loop.retry_budget, *t, "retry_budget", "loop");
    set(c.loop.history_cycles, *t, "history_cycles", "loop");
    set(c.loop.parse_retries, *t, "parse_retries", "loop");
    if (const auto* th = subtable(*t, "thresholds", "loop.thresholds")) {
      for (const auto& [key, node] : *th) {
        const auto dim = parse_eval_dimension(key.str());
        if (!dim) throw ConfigError("unknown dimension '" + std::string(key.str()) + "' in [loop.thresholds]");
        auto v = node.value<double>();
        if (!v) throw ConfigError("threshold for " + std::string(key.str()) + " must be a number");
        c.loop.thresholds[static_cast<std::size_t>(*dim)] = *v;
      }
    }
    c.loop.validate();
  }
  if (const auto* t = subtable(root, "roles", "roles")) {
    for (const auto& [key, node] : *t) {
      const std::string name(key.str());
      if (!kRoleNames.contains(name)) throw ConfigError("unknown role '" + name + "' in [roles]");
      const auto* rt = node.as_table();
      if (rt == nullptr) throw ConfigError("'roles." + name + "' must be a table");
      read_role(c.roles[name], *rt, name);
    }
  }
  if (const auto* t = subtable(root, "arena", "arena")) {
    check_keys(*t, "arena", {"k_factor", "initial_rating", "resamples", "retry_cap", "dimension"});
    auto& p = c.arena.protocol;
    set(p.k_factor, *t, "k_factor", "arena");
    set(p.initial_rating, *t, "initial_rating", "arena");
    set(p.retry_cap, *t, "retry_cap", "arena");
    set(p.dimension, *t, "dimension", "arena");
    set(c.arena.resamples, *t, "resamples", "arena");
    p.validate();
    if (c.arena.resamples < 1) throw ConfigError("arena resamples must be >= 1");
  }
  return c;
}

void require_file(const std::filesystem::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " is not configured");
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(what + " not found: " + path.string());
}

}  // namespace impg::cli
