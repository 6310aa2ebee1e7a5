#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "impg/arena.hpp"
#include "impg/difficulty.hpp"
#include "impg/gateway.hpp"
#include "impg/orchestrator.hpp"
#include "impg/sampler.hpp"

namespace impg::cli {

struct PathsConfig {
  std::filesystem::path corpus;
  std::filesystem::path matrix;
  std::filesystem::path templates;
  std::filesystem::path table;
  std::filesystem::path crs_rules;
  std::filesystem::path audit_log;  // empty: no audit log
};

// Backend and sampling profile of one chat role.
struct RoleConfig {
  std::optional<BackendConfig> backend;  // unset when the section is absent
  RoleProfile profile;
};

struct ArenaConfig {
  ArenaProtocol protocol;
  int resamples = 100;
};

struct AppConfig {
  PathsConfig paths;
  WeightVector sigma;
  std::optional<std::array<double, 5>> band_edges;  // default: equal-width quartering
  SamplerConfig sampler;
  LoopConfig loop;
  std::map<std::string, RoleConfig> roles;  // generator, evaluator, expert, judge
  ArenaConfig arena;

  DifficultyBands bands() const;
  const RoleConfig& role(const std::string& name) const;
};

// Built-in defaults; paths are resolved against `base_dir`.
AppConfig default_config(const std::filesystem::path& base_dir);

// Reads a TOML file over the defaults. Relative paths resolve against the
// file's directory. Throws ConfigError with the offending key.
AppConfig load_config(const std::filesystem::path& path);

// Throws ConfigError unless `path` names an existing regular file.
void require_file(const std::filesystem::path& path, const std::string& what);

}  // namespace impg::cli
