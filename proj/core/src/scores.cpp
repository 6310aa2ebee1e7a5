#include "impg/scores.hpp"

#include <charconv>
#include <numeric>
#include <sstream>

namespace impg {

namespace {

constexpr std::array<std::string_view, kEvalDimensionCount> kEvalNames = {
    "Requirement", "Correctness-P", "Correctness-S", "Fluency-P",     "Fluency-S",
    "Optimization", "Coverage",     "Innovation",    "Computability", "Discrimination"};

constexpr std::array<std::string_view, kJudgeDimensionCount> kJudgeNames = {
    "Requirement", "Correctness-P", "Correctness-S", "Fluency",       "Optimization",
    "Coverage",    "Innovation",    "Computability", "Discrimination"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

enum class Section { kScores, kProblem, kSolution };

template <std::size_t N>
struct ParsedBlock {
  std::array<double, N> scores{};
  std::vector<std::string_view> problem_lines;
  std::vector<std::string_view> solution_lines;
};

template <std::size_t N>
ParsedBlock<N> parse_block(std::string_view text, std::string_view begin_marker, std::string_view end_marker,
                           const std::array<std::string_view, N>& names, bool allow_suggestions) {
  using Kind = ScoreParseError::Kind;
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]) != begin_marker) ++i;
  if (i == lines.size()) {
    throw ScoreParseError(Kind::kUnparseable, "no \"" + std::string(begin_marker) + "\" block found");
  }
  ++i;

  ParsedBlock<N> out;
  std::array<bool, N> seen{};
  Section section = Section::kScores;
  for (; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line == end_marker) break;
    if (allow_suggestions && line == "Problem suggestions:") {
      section = Section::kProblem;
      continue;
    }
    if (allow_suggestions && line == "Solution suggestions:") {
      section = Section::kSolution;
      continue;
    }
    if (section == Section::kProblem) {
      if (!line.empty()) out.problem_lines.push_back(line);
      continue;
    }
    if (section == Section::kSolution) {
      if (!line.empty()) out.solution_lines.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ScoreParseError(Kind::kUnparseable, "expected \"Dimension: score\", got \"" + std::string(line) + "\"");
    }
    const auto name = trim(line.substr(0, colon));
    const auto value_text = trim(line.substr(colon + 1));
    std::size_t dim = N;
    for (std::size_t d = 0; d < N; ++d) {
      if (names[d] == name) dim = d;
    }
    if (dim == N) throw ScoreParseError(Kind::kUnparseable, "unknown dimension \"" + std::string(name) + "\"");
    if (seen[dim]) throw ScoreParseError(Kind::kUnparseable, "dimension " + std::string(name) + " given twice");
    const auto value = parse_number(value_text);
    if (!value) {
      throw ScoreParseError(Kind::kUnparseable,
                            "score for " + std::string(name) + " is not a number: \"" + std::string(value_text) + "\"");
    }
    if (!(*value >= 0.0 && *value <= 10.0)) {
      throw ScoreParseError(Kind::kOutOfRange,
                            "score for " + std::string(name) + " outside [0, 10]: " + std::string(value_text));
    }
    seen[dim] = true;
    out.scores[dim] = *value;
  }
  for (std::size_t d = 0; d < N; ++d) {
    if (!seen[d]) throw ScoreParseError(Kind::kMissingDimension, "missing dimension " + std::string(names[d]));
  }
  return out;
}

Suggestion parse_suggestion(std::string_view line) {
  if (line.starts_with("- ") || line.starts_with("* ")) line = trim(line.substr(2));
  Suggestion s;
  if (line.starts_with("[")) {
    const auto close = line.find(']');
    if (close != std::string_view::npos) {
      if (auto dim = parse_eval_dimension(trim(line.substr(1, close - 1)))) {
        s.dimension = dim;
        line = trim(line.substr(close + 1));
      }
    }
  }
  s.text = std::string(line);
  return s;
}

void append_suggestions(std::ostringstream& out, const std::vector<Suggestion>& items) {
  for (const auto& s : items) {
    out << "- ";
    if (s.dimension) out << '[' << to_string(*s.dimension) << "] ";
    out << s.text << '\n';
  }
}

}  // namespace

const std::array<std::string_view, kEvalDimensionCount>& eval_dimension_names() { return kEvalNames; }

std::string_view to_string(EvalDimension dim) { return kEvalNames[static_cast<std::size_t>(dim)]; }

std::optional<EvalDimension> parse_eval_dimension(std::string_view name) {
  for (std::size_t d = 0; d < kEvalDimensionCount; ++d) {
    if (kEvalNames[d] == name) return static_cast<EvalDimension>(d);
  }
  return std::nullopt;
}

EvaluationResult parse_evaluation(std::string_view evaluator_text) {
  auto block = parse_block(evaluator_text, kEvaluationBegin, kEvaluationEnd, kEvalNames, true);
  EvaluationResult result;
  result.scores = block.scores;
  for (auto line : block.problem_lines) result.problem_suggestions.push_back(parse_suggestion(line));
  for (auto line : block.solution_lines) result.solution_suggestions.push_back(parse_suggestion(line));
  return result;
}

std::string format_evaluation(const EvaluationResult& result) {
  std::ostringstream out;
  out << kEvaluationBegin << '\n';
  for (std::size_t d = 0; d < kEvalDimensionCount; ++d) out << kEvalNames[d] << ": " << result.scores[d] << '\n';
  out << "Problem suggestions:\n";
  append_suggestions(out, result.problem_suggestions);
  out << "Solution suggestions:\n";
  append_suggestions(out, result.solution_suggestions);
  out << kEvaluationEnd << '\n';
  return out.str();
}

const std::array<std::string_view, kJudgeDimensionCount>& judge_dimension_names() { return kJudgeNames; }

std::string_view to_string(JudgeDimension dim) { return kJudgeNames[static_cast<std::size_t>(dim)]; }

double JudgeScores::overall() const {
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(kJudgeDimensionCount);
}

double JudgeScores::core() const {
  return (score(JudgeDimension::kCorrectnessP) + score(JudgeDimension::kCorrectnessS) +
          score(JudgeDimension::kInnovation)) /
         3.0;
}

JudgeScores parse_judge_scores(std::string_view judge_text) {
  auto block = parse_block(judge_text, kJudgementBegin, kJudgementEnd, kJudgeNames, false);
  return JudgeScores{block.scores};
}

}  // namespace impg
