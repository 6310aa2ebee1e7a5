#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "impg/difficulty.hpp"
#include "impg/gateway.hpp"
#include "impg/prompts.hpp"
#include "impg/sampler.hpp"
#include "impg/scores.hpp"

namespace impg {

enum class ProblemType { kMultipleChoice, kFillInTheBlank, kProblemSolving };

std::string_view to_string(ProblemType type);
// "multiple-choice", "fill-in-the-blank", "problem-solving"
ProblemType parse_problem_type(std::string_view text);

struct ProblemRequest {
  std::string chapter;
  DifficultyLevel level = DifficultyLevel::kEasy;
  ProblemType type = ProblemType::kProblemSolving;

  void validate() const;
};

// Chapter, target level, problem type, then one line per decoded dimension.
std::string format_requirement(const ProblemRequest& request, const DecodedRequirement& decoded);

// The refinement prompt. Throws PreconditionError on an empty suggestion list.
std::string format_feedback(const PromptTemplates& templates, const std::string& requirement,
                            std::span<const std::string> suggestions);

struct GeneratedItem {
  std::string problem;
  std::string solution;
};

class GenerationFormatError : public DataError {
 public:
  using DataError::DataError;
};

// Splits generator output at its "[Problem]" and "[Solution]" markers.
GeneratedItem parse_generation(std::string_view generator_text);

class SessionMemory {
 public:
  explicit SessionMemory(std::string requirement);

  // Replaces problem and solution together; both must be nonempty.
  void update(std::string problem, std::string solution);

  const std::string& requirement() const { return requirement_; }
  const std::string& problem() const { return problem_; }
  const std::string& solution() const { return solution_; }

 private:
  std::string requirement_;
  std::string problem_;
  std::string solution_;
};

enum class EvalMode { kApprentice, kExpert };

std::string_view to_string(EvalMode mode);
EvalMode parse_eval_mode(std::string_view text);

struct LoopConfig {
  int tau_max = 5;
  std::array<double, kEvalDimensionCount> thresholds = default_thresholds();
  EvalMode mode = EvalMode::kApprentice;
  int retry_budget = 2;    // fresh-sample restarts after a terminated attempt
  int history_cycles = 2;  // prior generator exchanges kept in context
  int parse_retries = 2;   // re-asks after an unparseable reply, per call

  static std::array<double, kEvalDimensionCount> default_thresholds();
  void validate() const;
};

enum class LoopAction { kOutputResults, kReturnGenerator, kTerminated };

std::string_view to_string(LoopAction action);

// Pure threshold rule: pass when every score meets its threshold, otherwise
// refine until cycle reaches tau_max.
LoopAction judge_state(const EvaluationResult& result, int cycle, const LoopConfig& config);

std::vector<EvalDimension> failing_dimensions(const EvaluationResult& result, const LoopConfig& config);

// Suggestions forwarded to the generator: untagged ones, plus tagged ones
// whose dimension failed. Falls back to a generic request per failing
// dimension when nothing is left.
std::vector<std::string> select_suggestions(const EvaluationResult& result, std::span<const EvalDimension> failing);

struct CycleRecord {
  int cycle = 0;
  std::string problem;
  std::string solution;
  EvaluationResult evaluation;
  LoopAction action = LoopAction::kTerminated;
  std::vector<std::string> forwarded;
  int generator_calls = 0;
  int evaluator_calls = 0;
  double seconds = 0.0;
};

enum class SessionState { kCompleted, kTerminated };

std::string_view to_string(SessionState state);

struct SessionAttempt {
  DifficultyEncoding encoding;
  SampleReport sample;
  DecodedRequirement decoded;
  std::string requirement;
  std::vector<CycleRecord> cycles;
  SessionState state = SessionState::kTerminated;
};

struct SessionOutcome {
  SessionState state = SessionState::kTerminated;
  std::string final_problem;
  std::string final_solution;
  // Cycles of the last attempt; earlier attempts are kept in `attempts`.
  std::vector<CycleRecord> transcript;
  std::vector<SessionAttempt> attempts;
  double seconds = 0.0;
};

// Backends addressed by each role. Apprentice mode evaluates with
// `evaluator`, expert mode with `expert`.
struct SessionRoles {
  ChatBackend* generator = nullptr;
  RoleProfile generator_profile;
  ChatBackend* evaluator = nullptr;
  RoleProfile evaluator_profile;
  ChatBackend* expert = nullptr;
  RoleProfile expert_profile;
};

// Read-only inputs shared by concurrent sessions.
struct SessionArtifacts {
  const TransitionMatrix& matrix;
  const DifficultyBands& bands;
  const WeightVector& sigma;
  const DifficultyTable& table;
  const PromptTemplates& templates;
  SamplerConfig sampler;
};

// Seconds since an arbitrary origin.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

SessionOutcome run_session(const ProblemRequest& request, const SessionRoles& roles,
                           const SessionArtifacts& artifacts, const LoopConfig& config, Rng& rng,
                           const Clock& clock = steady_clock_seconds());

nlohmann::json transcript_json(const ProblemRequest& request, const LoopConfig& config,
                               const SessionOutcome& outcome);

}  // namespace impg
