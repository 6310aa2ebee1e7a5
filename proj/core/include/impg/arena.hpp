#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "impg/elo.hpp"
#include "impg/gateway.hpp"
#include "impg/prompts.hpp"
#include "impg/scores.hpp"

namespace impg {

// Two models' answers to the same requirement.
struct Pairing {
  std::string requirement;
  std::string model_a;
  std::string output_a;
  std::string model_b;
  std::string output_b;
};

struct ArenaProtocol {
  std::string dimension = "overall";
  int retry_cap = 2;  // extra swap rounds after an inconsistent first pair
  double k_factor = kDefaultKFactor;
  double initial_rating = kDefaultInitialRating;

  void validate() const;
};

enum class Verdict { kFirst, kSecond, kTie };

// Last "Winner: 1 | 2 | tie" line of a judge reply. Throws ScoreParseError.
Verdict parse_verdict(std::string_view judge_text);

struct ArenaResult {
  EloState ratings;
  std::vector<MatchRecord> records;
};

// Judges every pairing in both presentation orders. A pair whose two
// verdicts disagree is judged again, up to protocol.retry_cap more times;
// if it never agrees the match is a draw with swap_consistent = false.
// Ratings are updated in pairing order. `models` are registered up front so
// that models without matches still appear at the initial rating.
ArenaResult run_arena(std::span<const Pairing> pairings, ChatBackend& judge, const RoleProfile& judge_profile,
                      const PromptTemplates& templates, const ArenaProtocol& protocol,
                      std::span<const std::string> models = {});

// Absolute nine-dimension scoring of a single problem/solution pair.
JudgeScores score_item(ChatBackend& judge, const RoleProfile& judge_profile, const PromptTemplates& templates,
                       const std::string& requirement, const std::string& problem, const std::string& solution,
                       int parse_retries = 2);

}  // namespace impg
