#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impg/error.hpp"

namespace impg {

// Raised by the structured-block parsers. The kind lets the generation loop
// decide whether to ask the evaluator again.
class ScoreParseError : public DataError {
 public:
  enum class Kind { kUnparseable, kMissingDimension, kOutOfRange };

  ScoreParseError(Kind kind, const std::string& message) : DataError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Evaluator schema: ten dimensions plus revision suggestions.
// ---------------------------------------------------------------------------

enum class EvalDimension {
  kRequirement,
  kCorrectnessP,
  kCorrectnessS,
  kFluencyP,
  kFluencyS,
  kOptimization,
  kCoverage,
  kInnovation,
  kComputability,
  kDiscrimination,
};

inline constexpr std::size_t kEvalDimensionCount = 10;

const std::array<std::string_view, kEvalDimensionCount>& eval_dimension_names();
std::string_view to_string(EvalDimension dim);
std::optional<EvalDimension> parse_eval_dimension(std::string_view name);

struct Suggestion {
  // Set when the line is tagged "[Dimension] text"; untagged lines apply
  // to the whole item.
  std::optional<EvalDimension> dimension;
  std::string text;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

struct EvaluationResult {
  std::array<double, kEvalDimensionCount> scores{};
  std::vector<Suggestion> problem_suggestions;
  std::vector<Suggestion> solution_suggestions;

  double score(EvalDimension dim) const { return scores[static_cast<std::size_t>(dim)]; }
};

inline constexpr std::string_view kEvaluationBegin = "=== EVALUATION ===";
inline constexpr std::string_view kEvaluationEnd = "=== END EVALUATION ===";

// Reads the delimited block
//
//   === EVALUATION ===
//   Requirement: 9
//   ... one "Name: score" line per dimension ...
//   Problem suggestions:
//   - [Innovation] ...
//   Solution suggestions:
//   - ...
//   === END EVALUATION ===
//
// Text outside the block is ignored. The end marker may be omitted.
EvaluationResult parse_evaluation(std::string_view evaluator_text);

// Renders a block parse_evaluation accepts; used by tests and mock scripts.
std::string format_evaluation(const EvaluationResult& result);

// ---------------------------------------------------------------------------
// Judge schema: nine dimensions, fluency merged, no suggestions.
// ---------------------------------------------------------------------------

enum class JudgeDimension {
  kRequirement,
  kCorrectnessP,
  kCorrectnessS,
  kFluency,
  kOptimization,
  kCoverage,
  kInnovation,
  kComputability,
  kDiscrimination,
};

inline constexpr std::size_t kJudgeDimensionCount = 9;

const std::array<std::string_view, kJudgeDimensionCount>& judge_dimension_names();
std::string_view to_string(JudgeDimension dim);

struct JudgeScores {
  std::array<double, kJudgeDimensionCount> scores{};

  double score(JudgeDimension dim) const { return scores[static_cast<std::size_t>(dim)]; }
  // Mean over all nine dimensions.
  double overall() const;
  // Mean of Correctness-P, Correctness-S and Innovation.
  double core() const;
};

inline constexpr std::string_view kJudgementBegin = "=== JUDGEMENT ===";
inline constexpr std::string_view kJudgementEnd = "=== END JUDGEMENT ===";

JudgeScores parse_judge_scores(std::string_view judge_text);

}  // namespace impg
