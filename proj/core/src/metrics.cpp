#include "impg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace impg {

namespace {

void check_aligned(std::span<const int> truth, std::span<const int> estimated) {
  if (truth.empty()) throw PreconditionError("difficulty metrics need at least one sample");
  if (truth.size() != estimated.size()) {
    throw PreconditionError("truth and estimate lengths differ (" + std::to_string(truth.size()) + " vs " +
                            std::to_string(estimated.size()) + ")");
  }
  const auto in_range = [](int v) { return v >= 1 && v <= 4; };
  if (!std::all_of(truth.begin(), truth.end(), in_range) ||
      !std::all_of(estimated.begin(), estimated.end(), in_range)) {
    throw PreconditionError("difficulty levels must be coded 1..4");
  }
}

}  // namespace

double difficulty_accuracy(std::span<const int> truth, std::span<const int> estimated) {
  check_aligned(truth, estimated);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == estimated[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mean_absolute_deviation(std::span<const int> truth, std::span<const int> estimated) {
  check_aligned(truth, estimated);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) total += std::abs(truth[i] - estimated[i]);
  return static_cast<double>(total) / static_cast<double>(truth.size());
}

double entropy_from_counts(std::span<const std::int64_t> counts) {
  const auto n = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (n <= 0) throw PreconditionError("entropy of an empty sample");
  double h = 0.0;
  for (auto c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  // A single category gives -1 * log2(1) = -0.0.
  return h == 0.0 ? 0.0 : h;
}

std::array<double, kDimensionCount> per_dimension_entropy(std::span<const DifficultyEncoding> samples) {
  if (samples.empty()) throw PreconditionError("entropy of an empty sample");
  std::array<std::array<std::int64_t, 4>, kDimensionCount> counts{};
  for (const auto& enc : samples) {
    for (std::size_t d = 0; d < kDimensionCount; ++d) ++counts[d][enc.level(d) - 1];
  }
  std::array<double, kDimensionCount> out{};
  for (std::size_t d = 0; d < kDimensionCount; ++d) out[d] = entropy_from_counts(counts[d]);
  return out;
}

double distinct_ratio(std::span<const DifficultyEncoding> samples) {
  if (samples.empty()) throw PreconditionError("diversity of an empty sample");
  std::unordered_set<DifficultyEncoding> distinct(samples.begin(), samples.end());
  return static_cast<double>(distinct.size()) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------

RewardWeights::RewardWeights()
    : weights_{{"correctness", 1.0 / 3.0}, {"innovation", 1.0 / 3.0}, {"requirement", 1.0 / 3.0}} {}

RewardWeights::RewardWeights(std::map<std::string, double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ConfigError("reward weights are empty");
  double sum = 0.0;
  for (const auto& [name, w] : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("reward weight for " + name + " must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("reward weights must sum to 1");
}

double weighted_reward(const std::map<std::string, double>& scores, const RewardWeights& weights) {
  const auto& w = weights.values();
  if (scores.size() != w.size() ||
      !std::equal(scores.begin(), scores.end(), w.begin(), [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw PreconditionError("reward scores and weights cover different dimensions");
  }
  double total = 0.0;
  for (const auto& [name, score] : scores) {
    if (!(score >= 0.0 && score <= 10.0)) throw PreconditionError("reward score for " + name + " outside [0, 10]");
    total += score * w.at(name);
  }
  return total;
}

std::vector<double> grpo_advantages(std::span<const double> rewards) {
  if (rewards.empty()) throw PreconditionError("advantages need a nonempty group");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(sq / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (std_dev == 0.0) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / std_dev;
  return out;
}

}  // namespace impg
