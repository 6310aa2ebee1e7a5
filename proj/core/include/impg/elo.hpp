#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impg/random.hpp"

namespace impg {

// Probability that a player rated r_a beats one rated r_b.
double expected_score(double r_a, double r_b);

struct MatchRecord {
  int match_id = 0;
  std::string model_a;
  std::string model_b;
  double s_a = 0.5;  // 1 win, 0.5 draw, 0 loss for model_a
  std::string dimension;
  bool swap_consistent = true;

  double s_b() const { return 1.0 - s_a; }
};

inline constexpr double kDefaultKFactor = 32.0;
inline constexpr double kDefaultInitialRating = 1000.0;

class EloState {
 public:
  explicit EloState(double k_factor = kDefaultKFactor, double initial_rating = kDefaultInitialRating);

  // Adds a model at the initial rating; no-op when already present.
  void register_model(const std::string& model);
  // Both models are registered lazily. Zero-sum: the two deltas cancel.
  void apply(const MatchRecord& record);

  double rating(const std::string& model) const;
  const std::map<std::string, double>& ratings() const { return ratings_; }
  double k_factor() const { return k_factor_; }
  double initial_rating() const { return initial_rating_; }
  double total() const;

 private:
  double k_factor_;
  double initial_rating_;
  std::map<std::string, double> ratings_;
};

EloState elo_update(EloState state, const MatchRecord& record);

// Applies records in order on top of `state`.
EloState replay(std::span<const MatchRecord> records, EloState state);

// Pairwise win rates with ties counted as half a win for each side.
class WinRateMatrix {
 public:
  void add(const MatchRecord& record);

  // (wins + 0.5 * ties) / matches of `a` against `b`; empty without matches.
  std::optional<double> at(const std::string& a, const std::string& b) const;
  int matches(const std::string& a, const std::string& b) const;
  std::vector<std::string> models() const;

 private:
  struct Tally {
    double points = 0.0;
    int matches = 0;
  };
  std::map<std::pair<std::string, std::string>, Tally> tallies_;
};

WinRateMatrix win_rate_matrix(std::span<const MatchRecord> records);

struct RatingDistribution {
  std::vector<double> samples;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

// Linear-interpolation quantile of an ascending sample, q in [0, 1].
double quantile(std::span<const double> sorted, double q);

// Each resample draws |records| records with replacement, replays them in
// drawn order from fresh initial ratings, and keeps every model's final
// rating. Models are taken from the full record set.
std::map<std::string, RatingDistribution> bootstrap_elo(std::span<const MatchRecord> records, int resamples,
                                                        Rng& rng, double k_factor = kDefaultKFactor,
                                                        double initial_rating = kDefaultInitialRating);

}  // namespace impg
