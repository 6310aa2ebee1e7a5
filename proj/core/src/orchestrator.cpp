#include "impg/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <deque>

namespace impg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

constexpr std::string_view kProblemMarker = "[Problem]";
constexpr std::string_view kSolutionMarker = "[Solution]";

}  // namespace

std::string_view to_string(ProblemType type) {
  switch (type) {
    case ProblemType::kMultipleChoice:
      return "multiple-choice";
    case ProblemType::kFillInTheBlank:
      return "fill-in-the-blank";
    case ProblemType::kProblemSolving:
      return "problem-solving";
  }
  return "?";
}

ProblemType parse_problem_type(std::string_view text) {
  const auto t = lower(trim(text));
  for (auto type : {ProblemType::kMultipleChoice, ProblemType::kFillInTheBlank, ProblemType::kProblemSolving}) {
    if (t == to_string(type)) return type;
  }
  throw ConfigError("unknown problem type '" + std::string(text) +
                    "' (expected multiple-choice, fill-in-the-blank or problem-solving)");
}

void ProblemRequest::validate() const {
  if (trim(chapter).empty()) throw ConfigError("problem request needs a chapter");
}

std::string format_requirement(const ProblemRequest& request, const DecodedRequirement& decoded) {
  request.validate();
  std::string out;
  out += "Chapter: " + request.chapter + "\n";
  out += "Problem type: " + std::string(to_string(request.type)) + "\n";
  out += "Target difficulty: " + std::string(to_string(request.level)) + "\n";
  out += "Difficulty profile:\n";
  for (const auto& dim : decoded.dimensions) {
    out += "- " + dim.code + " " + dim.factor + " (" + dim.level_name + "): " + dim.description + "\n";
  }
  return out;
}

std::string format_feedback(const PromptTemplates& templates, const std::string& requirement,
                            std::span<const std::string> suggestions) {
  if (suggestions.empty()) throw PreconditionError("refinement needs at least one suggestion");
  std::string list;
  for (const auto& s : suggestions) list += "- " + s + "\n";
  return render_template(templates.refinement, {{"requirement", requirement}, {"suggestions", list}});
}

GeneratedItem parse_generation(std::string_view text) {
  const auto p = text.find(kProblemMarker);
  if (p == std::string_view::npos) throw GenerationFormatError("generator output lacks a [Problem] section");
  const auto s = text.find(kSolutionMarker, p);
  if (s == std::string_view::npos) throw GenerationFormatError("generator output lacks a [Solution] section");
  const auto body_start = p + kProblemMarker.size();
  GeneratedItem item{std::string(trim(text.substr(body_start, s - body_start))),
                     std::string(trim(text.substr(s + kSolutionMarker.size())))};
  if (item.problem.empty()) throw GenerationFormatError("generator output has an empty problem");
  if (item.solution.empty()) throw GenerationFormatError("generator output has an empty solution");
  return item;
}

SessionMemory::SessionMemory(std::string requirement) : requirement_(std::move(requirement)) {
  if (requirement_.empty()) throw PreconditionError("session memory needs a requirement");
}

void SessionMemory::update(std::string problem, std::string solution) {
  if (problem.empty() || solution.empty()) throw PreconditionError("memory update needs problem and solution");
  problem_ = std::move(problem);
  solution_ = std::move(solution);
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::kExpert ? "expert" : "apprentice"; }

EvalMode parse_eval_mode(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "apprentice") return EvalMode::kApprentice;
  if (t == "expert") return EvalMode::kExpert;
  throw ConfigError("unknown evaluation mode '" + std::string(text) + "' (expected apprentice or expert)");
}

std::array<double, kEvalDimensionCount> LoopConfig::default_thresholds() {
  std::array<double, kEvalDimensionCount> t{};
  t.fill(6.0);
  for (auto dim : {EvalDimension::kRequirement, EvalDimension::kCorrectnessP, EvalDimension::kCorrectnessS}) {
    t[static_cast<std::size_t>(dim)] = 8.0;
  }
  return t;
}

void LoopConfig::validate() const {
  if (tau_max < 1) throw ConfigError("tau_max must be >= 1");
  if (retry_budget < 0) throw ConfigError("retry budget must be >= 0");
  if (history_cycles < 0) throw ConfigError("history cap must be >= 0");
  if (parse_retries < 0) throw ConfigError("parse retries must be >= 0");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 10.0)) {
      throw ConfigError("threshold for " + std::string(eval_dimension_names()[i]) + " outside [0, 10]");
    }
  }
}

std::string_view to_string(LoopAction action) {
  switch (action) {
    case LoopAction::kOutputResults:
      return "output_results";
    case LoopAction::kReturnGenerator:
      return "return_generator";
    case LoopAction::kTerminated:
      break;
  }
  return "terminated";
}

std::vector<EvalDimension> failing_dimensions(const EvaluationResult& result, const LoopConfig& config) {
  std::vector<EvalDimension> failing;
  for (std::size_t i = 0; i < kEvalDimensionCount; ++i) {
    if (result.scores[i] < config.thresholds[i]) failing.push_back(static_cast<EvalDimension>(i));
  }
  return failing;
}

LoopAction judge_state(const EvaluationResult& result, int cycle, const LoopConfig& config) {
  if (cycle < 1) throw PreconditionError("cycle numbers start at 1");
  if (failing_dimensions(result, config).empty()) return LoopAction::kOutputResults;
  return cycle < config.tau_max ? LoopAction::kReturnGenerator : LoopAction::kTerminated;
}

std::vector<std::string> select_suggestions(const EvaluationResult& result, std::span<const EvalDimension> failing) {
  std::vector<std::string> out;
  const auto take = [&](const std::vector<Suggestion>& list, std::string_view prefix) {
    for (const auto& s : list) {
      if (s.dimension && std::find(failing.begin(), failing.end(), *s.dimension) == failing.end()) continue;
      out.push_back(std::string(prefix) + s.text);
    }
  };
  take(result.problem_suggestions, "Problem: ");
  take(result.solution_suggestions, "Solution: ");
  if (out.empty()) {
    for (auto dim : failing) {
      out.push_back("Raise the " + std::string(to_string(dim)) + " score (currently " +
                    nlohmann::json(result.score(dim)).dump() + ").");
    }
  }
  return out;
}

std::string_view to_string(SessionState state) {
  return state == SessionState::kCompleted ? "completed" : "terminated";
}

Clock steady_clock_seconds() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

namespace {

template <typename Parse>
auto call_with_parse_retries(ChatBackend& backend, const RoleProfile& profile, std::span<const ChatTurn> turns,
                             int parse_retries, int& calls, Parse parse) {
  for (int attempt = 0;; ++attempt) {
    ++calls;
    try {
      return parse(backend.complete(profile, turns));
    } catch (const DataError&) {
      if (attempt >= parse_retries) throw;
    }
  }
}

}  // namespace

SessionOutcome run_session(const ProblemRequest& request, const SessionRoles& roles,
                           const SessionArtifacts& artifacts, const LoopConfig& config, Rng& rng,
                           const Clock& clock) {
  request.validate();
  config.validate();
  if (roles.generator == nullptr) throw ConfigError("generator backend is not configured");
  ChatBackend* evaluator = config.mode == EvalMode::kExpert ? roles.expert : roles.evaluator;
  const RoleProfile& eval_profile = config.mode == EvalMode::kExpert ? roles.expert_profile : roles.evaluator_profile;
  if (evaluator == nullptr) {
    throw ConfigError(std::string(config.mode == EvalMode::kExpert ? "expert" : "evaluator") +
                      " backend is not configured");
  }

  SessionOutcome outcome;
  const double session_start = clock();
  for (int attempt = 0; attempt <= config.retry_budget; ++attempt) {
    const auto sample = daps_sample(artifacts.matrix, request.level, artifacts.bands, artifacts.sigma,
                                    artifacts.sampler, rng);
    SessionAttempt record{sample.encoding, sample.report, decode(sample.encoding, artifacts.table), {}, {}, {}};
    record.requirement = format_requirement(request, record.decoded);

    SessionMemory memory(record.requirement);
    std::deque<ChatTurn> history;
    std::string input = render_template(artifacts.templates.generation, {{"requirement", record.requirement}});

    for (int cycle = 1; cycle <= config.tau_max; ++cycle) {
      const double cycle_start = clock();
      CycleRecord cr;
      cr.cycle = cycle;

      std::vector<ChatTurn> gen_turns(history.begin(), history.end());
      gen_turns.push_back({ChatRole::kUser, input});
      std::string raw;
      const auto item = call_with_parse_retries(*roles.generator, roles.generator_profile, gen_turns,
                                                config.parse_retries, cr.generator_calls, [&](std::string text) {
                                                  auto parsed = parse_generation(text);
                                                  raw = std::move(text);
                                                  return parsed;
                                                });
      memory.update(item.problem, item.solution);
      cr.problem = memory.problem();
      cr.solution = memory.solution();

      history.push_back({ChatRole::kUser, input});
      history.push_back({ChatRole::kAssistant, raw});
      while (history.size() > 2 * static_cast<std::size_t>(config.history_cycles)) history.pop_front();

      // Stateless evaluation: one turn built from the memory snapshot.
      const std::vector<ChatTurn> eval_turns{
          {ChatRole::kUser, render_template(artifacts.templates.evaluation, {{"requirement", memory.requirement()},
                                                                             {"problem", memory.problem()},
                                                                             {"solution", memory.solution()}})}};
      cr.evaluation = call_with_parse_retries(*evaluator, eval_profile, eval_turns, config.parse_retries,
                                              cr.evaluator_calls, parse_evaluation);
      cr.action = judge_state(cr.evaluation, cycle, config);
      if (cr.action == LoopAction::kReturnGenerator) {
        const auto failing = failing_dimensions(cr.evaluation, config);
        cr.forwarded = select_suggestions(cr.evaluation, failing);
        input = format_feedback(artifacts.templates, memory.requirement(), cr.forwarded);
      }
      cr.seconds = clock() - cycle_start;
      record.cycles.push_back(std::move(cr));
      if (record.cycles.back().action != LoopAction::kReturnGenerator) break;
    }

    record.state = record.cycles.back().action == LoopAction::kOutputResults ? SessionState::kCompleted
                                                                             : SessionState::kTerminated;
    outcome.state = record.state;
    outcome.final_problem = memory.problem();
    outcome.final_solution = memory.solution();
    outcome.transcript = record.cycles;
    outcome.attempts.push_back(std::move(record));
    if (outcome.state == SessionState::kCompleted) break;
  }
  outcome.seconds = clock() - session_start;
  return outcome;
}

nlohmann::json transcript_json(const ProblemRequest& request, const LoopConfig& config,
                               const SessionOutcome& outcome) {
  using nlohmann::json;
  const auto evaluation_json = [](const EvaluationResult& e) {
    json scores = json::object();
    for (std::size_t i = 0; i < kEvalDimensionCount; ++i) scores[std::string(eval_dimension_names()[i])] = e.scores[i];
    const auto list = [](const std::vector<Suggestion>& items) {
      json out = json::array();
      for (const auto& s : items) {
        out.push_back({{"dimension", s.dimension ? json(std::string(to_string(*s.dimension))) : json(nullptr)},
                       {"text", s.text}});
      }
      return out;
    };
    return json{{"scores", scores},
                {"problem_suggestions", list(e.problem_suggestions)},
                {"solution_suggestions", list(e.solution_suggestions)}};
  };

  json attempts = json::array();
  int total_cycles = 0;
  for (const auto& a : outcome.attempts) {
    json decoded = json::array();
    for (const auto& d : a.decoded.dimensions) {
      decoded.push_back(
          {{"code", d.code}, {"factor", d.factor}, {"level", d.level_name}, {"description", d.description}});
    }
    json cycles = json::array();
    for (const auto& c : a.cycles) {
      cycles.push_back({{"cycle", c.cycle},
                        {"problem", c.problem},
                        {"solution", c.solution},
                        {"evaluation", evaluation_json(c.evaluation)},
                        {"action", to_string(c.action)},
                        {"forwarded_suggestions", c.forwarded},
                        {"generator_calls", c.generator_calls},
                        {"evaluator_calls", c.evaluator_calls},
                        {"seconds", c.seconds}});
    }
    total_cycles += static_cast<int>(a.cycles.size());
    attempts.push_back({{"encoding", a.encoding.format()},
                        {"sampler", {{"rounds", a.sample.rounds_used},
                                     {"candidates", a.sample.candidates_generated},
                                     {"accepted", a.sample.accepted_count}}},
                        {"decoded", decoded},
                        {"requirement", a.requirement},
                        {"cycles", cycles},
                        {"state", to_string(a.state)}});
  }
  json thresholds = json::object();
  for (std::size_t i = 0; i < kEvalDimensionCount; ++i) {
    thresholds[std::string(eval_dimension_names()[i])] = config.thresholds[i];
  }
  return json{{"request",
               {{"chapter", request.chapter}, {"level", to_string(request.level)}, {"type", to_string(request.type)}}},
              {"loop",
               {{"tau_max", config.tau_max},
                {"mode", to_string(config.mode)},
                {"retry_budget", config.retry_budget},
                {"thresholds", thresholds}}},
              {"state", to_string(outcome.state)},
              {"final", {{"problem", outcome.final_problem}, {"solution", outcome.final_solution}}},
              {"summary",
               {{"cycles", outcome.transcript.size()},
                {"retries", outcome.attempts.empty() ? 0 : outcome.attempts.size() - 1},
                {"total_cycles", total_cycles},
                {"seconds", outcome.seconds}}},
              {"attempts", attempts}};
}

}  // namespace impg
