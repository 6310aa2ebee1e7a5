#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "impg/difficulty.hpp"
#include "impg/error.hpp"

namespace impg {

// Levels are coded 1..4 (Easy..Expert).
double difficulty_accuracy(std::span<const int> truth, std::span<const int> estimated);
double mean_absolute_deviation(std::span<const int> truth, std::span<const int> estimated);

// Entropy in bits of the empirical distribution given by category counts.
// Zero counts are ignored.
double entropy_from_counts(std::span<const std::int64_t> counts);

// Shannon entropy (bits) of the empirical distribution of `samples`.
template <class T>
double shannon_entropy(std::span<const T> samples) {
  if (samples.empty()) throw PreconditionError("entropy of an empty sample");
  std::map<T, std::int64_t> tally;
  for (const auto& s : samples) ++tally[s];
  std::vector<std::int64_t> counts;
  counts.reserve(tally.size());
  for (const auto& [value, count] : tally) counts.push_back(count);
  return entropy_from_counts(counts);
}

// Entropy of each dimension's level marginal, A..H.
std::array<double, kDimensionCount> per_dimension_entropy(std::span<const DifficultyEncoding> samples);

// Distinct encodings / total samples.
double distinct_ratio(std::span<const DifficultyEncoding> samples);

// Weights over the reward dimensions; nonnegative and summing to 1.
class RewardWeights {
 public:
  RewardWeights();  // uniform over requirement, correctness, innovation
  explicit RewardWeights(std::map<std::string, double> weights);

  const std::map<std::string, double>& values() const { return weights_; }

 private:
  std::map<std::string, double> weights_;
};

// Dot product of scores and weights; the key sets must match exactly.
double weighted_reward(const std::map<std::string, double>& scores, const RewardWeights& weights);

// Group-relative advantages (r - mean) / std with the population standard
// deviation. Zero-variance groups map to all zeros.
std::vector<double> grpo_advantages(std::span<const double> rewards);

}  // namespace impg
