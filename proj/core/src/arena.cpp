#include "impg/arena.hpp"

#include <algorithm>
#include <cctype>

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

// Asks once, re-asking on unparseable replies.
template <typename Parse>
auto ask(ChatBackend& judge, const RoleProfile& profile, const std::string& prompt, int parse_retries, Parse parse) {
  const std::vector<ChatTurn> turns{{ChatRole::kUser, prompt}};
  for (int attempt = 0;; ++attempt) {
    try {
      return parse(judge.complete(profile, turns));
    } catch (const ScoreParseError&) {
      if (attempt >= parse_retries) throw;
    }
  }
}

// Outcome for the model shown first.
double first_outcome(Verdict v) {
  switch (v) {
    case Verdict::kFirst:
      return 1.0;
    case Verdict::kSecond:
      return 0.0;
    case Verdict::kTie:
      break;
  }
  return 0.5;
}

}  // namespace

void ArenaProtocol::validate() const {
  if (retry_cap < 0) throw ConfigError("arena retry cap must be >= 0");
  if (!(k_factor > 0.0)) throw ConfigError("arena K factor must be > 0");
  if (dimension.empty()) throw ConfigError("arena dimension is empty");
}

Verdict parse_verdict(std::string_view judge_text) {
  std::optional<Verdict> verdict;
  std::size_t pos = 0;
  while (pos <= judge_text.size()) {
    auto end = judge_text.find('\n', pos);
    if (end == std::string_view::npos) end = judge_text.size();
    const auto line = trim(judge_text.substr(pos, end - pos));
    pos = end + 1;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || lower(trim(line.substr(0, colon))) != "winner") continue;
    const auto value = lower(trim(line.substr(colon + 1)));
    if (value == "1") {
      verdict = Verdict::kFirst;
    } else if (value == "2") {
      verdict = Verdict::kSecond;
    } else if (value == "tie") {
      verdict = Verdict::kTie;
    } else {
      throw ScoreParseError(ScoreParseError::Kind::kUnparseable, "unrecognized verdict '" + value + "'");
    }
  }
  if (!verdict) throw ScoreParseError(ScoreParseError::Kind::kUnparseable, "judge reply has no Winner line");
  return *verdict;
}

ArenaResult run_arena(std::span<const Pairing> pairings, ChatBackend& judge, const RoleProfile& judge_profile,
                      const PromptTemplates& templates, const ArenaProtocol& protocol,
                      std::span<const std::string> models) {
  protocol.validate();
  ArenaResult result{EloState(protocol.k_factor, protocol.initial_rating), {}};
  for (const auto& m : models) result.ratings.register_model(m);

  const auto verdict = [&](const Pairing& p, bool a_first) {
    const auto prompt = render_template(templates.judge_pairwise,
                                        {{"requirement", p.requirement},
                                         {"dimension", protocol.dimension},
                                         {"first", a_first ? p.output_a : p.output_b},
                                         {"second", a_first ? p.output_b : p.output_a}});
    return ask(judge, judge_profile, prompt, protocol.retry_cap, parse_verdict);
  };

  int match_id = 0;
  for (const auto& p : pairings) {
    if (p.model_a == p.model_b) throw PreconditionError("pairing of " + p.model_a + " with itself");
    MatchRecord record{match_id++, p.model_a, p.model_b, 0.5, protocol.dimension, false};
    for (int round = 0; round <= protocol.retry_cap; ++round) {
      const double a_shown_first = first_outcome(verdict(p, true));
      const double a_shown_second = 1.0 - first_outcome(verdict(p, false));
      if (a_shown_first == a_shown_second) {
        record.s_a = a_shown_first;
        record.swap_consistent = true;
        break;
      }
    }
    result.ratings.apply(record);
    result.records.push_back(std::move(record));
  }
  return result;
}

JudgeScores score_item(ChatBackend& judge, const RoleProfile& judge_profile, const PromptTemplates& templates,
                       const std::string& requirement, const std::string& problem, const std::string& solution,
                       int parse_retries) {
  const auto prompt = render_template(templates.judge_scoring,
                                      {{"requirement", requirement}, {"problem", problem}, {"solution", solution}});
  return ask(judge, judge_profile, prompt, parse_retries, parse_judge_scores);
}

}  // namespace impg
