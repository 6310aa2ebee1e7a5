#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "app_config.hpp"

namespace impg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitTerminated = 2,
  kExitConfig = 3,
  kExitBackend = 4,
  kExitData = 5,
  kExitSampling = 6,
};

// Maps the active exception onto an exit code and prints it to `err`.
int report_error(std::ostream& err);

struct FitOptions {
  std::filesystem::path corpus;
  std::filesystem::path out;
};

int cmd_fit(const AppConfig& config, const FitOptions& options, std::ostream& out);

struct SampleOptions {
  std::string level;
  std::string method = "daps";
  int count = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out;     // JSON lines; empty writes to stdout
  std::filesystem::path report;  // summary JSON; empty prints it to stderr
};

int cmd_sample(const AppConfig& config, const SampleOptions& options, std::ostream& out, std::ostream& err);

struct GenerateOptions {
  std::string chapter;
  std::string level;
  std::string type = "problem-solving";
  std::uint64_t seed = 0;
  std::filesystem::path mock;  // {"generator": script, "evaluator": script, "expert": script}
  std::filesystem::path out;   // transcript JSON
};

int cmd_generate(const AppConfig& config, const GenerateOptions& options, std::ostream& out, std::ostream& err);

struct ArenaOptions {
  std::filesystem::path models;  // {"prompts": [...], "models": {name: [output per prompt]}}
  int rounds = 0;
  std::uint64_t seed = 0;
  std::filesystem::path mock;  // {"judge": script}
  std::filesystem::path out;   // report JSON
  std::filesystem::path matches;  // match log JSON lines, optional
};

int cmd_arena(const AppConfig& config, const ArenaOptions& options, std::ostream& out);

struct MetricsOptions {
  std::filesystem::path truth;
  std::filesystem::path predictions;
  std::filesystem::path samples;
  std::vector<std::filesystem::path> generated;
  std::filesystem::path corpus;
  std::filesystem::path out;  // empty prints the report
};

int cmd_metrics(const MetricsOptions& options, std::ostream& out);

struct DecodeOptions {
  std::string encoding;
  bool json = false;
};

int cmd_decode(const AppConfig& config, const DecodeOptions& options, std::ostream& out);

}  // namespace impg::cli
