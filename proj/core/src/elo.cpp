#include "impg/elo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "impg/error.hpp"

namespace impg {

double expected_score(double r_a, double r_b) { return 1.0 / (1.0 + std::pow(10.0, (r_b - r_a) / 400.0)); }

EloState::EloState(double k_factor, double initial_rating) : k_factor_(k_factor), initial_rating_(initial_rating) {
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) throw ConfigError("Elo K-factor must be positive");
  if (!std::isfinite(initial_rating)) throw ConfigError("initial rating must be finite");
}

void EloState::register_model(const std::string& model) { ratings_.try_emplace(model, initial_rating_); }

void EloState::apply(const MatchRecord& record) {
  if (record.model_a == record.model_b) throw PreconditionError("a model cannot play itself: " + record.model_a);
  if (!(record.s_a >= 0.0 && record.s_a <= 1.0)) throw PreconditionError("match outcome must lie in [0, 1]");
  register_model(record.model_a);
  register_model(record.model_b);
  double& r_a = ratings_[record.model_a];
  double& r_b = ratings_[record.model_b];
  // One delta applied with opposite signs keeps the update exactly zero-sum.
  const double delta = k_factor_ * (record.s_a - expected_score(r_a, r_b));
  r_a += delta;
  r_b -= delta;
}

double EloState::rating(const std::string& model) const {
  auto it = ratings_.find(model);
  return it == ratings_.end() ? initial_rating_ : it->second;
}

double EloState::total() const {
  return std::accumulate(ratings_.begin(), ratings_.end(), 0.0,
                         [](double acc, const auto& entry) { return acc + entry.second; });
}

EloState elo_update(EloState state, const MatchRecord& record) {
  state.apply(record);
  return state;
}

EloState replay(std::span<const MatchRecord> records, EloState state) {
  for (const auto& record : records) state.apply(record);
  return state;
}

// ---------------------------------------------------------------------------

void WinRateMatrix::add(const MatchRecord& record) {
  auto& forward = tallies_[{record.model_a, record.model_b}];
  forward.points += record.s_a;
  ++forward.matches;
  auto& backward = tallies_[{record.model_b, record.model_a}];
  backward.points += record.s_b();
  ++backward.matches;
}

std::optional<double> WinRateMatrix::at(const std::string& a, const std::string& b) const {
  auto it = tallies_.find({a, b});
  if (it == tallies_.end() || it->second.matches == 0) return std::nullopt;
  return it->second.points / it->second.matches;
}

int WinRateMatrix::matches(const std::string& a, const std::string& b) const {
  auto it = tallies_.find({a, b});
  return it == tallies_.end() ? 0 : it->second.matches;
}

std::vector<std::string> WinRateMatrix::models() const {
  std::set<std::string> names;
  for (const auto& [key, tally] : tallies_) {
    names.insert(key.first);
    names.insert(key.second);
  }
  return {names.begin(), names.end()};
}

WinRateMatrix win_rate_matrix(std::span<const MatchRecord> records) {
  WinRateMatrix matrix;
  for (const auto& record : records) matrix.add(record);
  return matrix;
}

// ---------------------------------------------------------------------------

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw PreconditionError("quantile of an empty sample");
  if (q < 0.0 || q > 1.0) throw PreconditionError("quantile level must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::map<std::string, RatingDistribution> bootstrap_elo(std::span<const MatchRecord> records, int resamples,
                                                        Rng& rng, double k_factor, double initial_rating) {
  if (records.empty()) throw PreconditionError("bootstrap needs at least one match record");
  if (resamples < 1) throw PreconditionError("bootstrap needs at least one resample");

  EloState base(k_factor, initial_rating);
  for (const auto& record : records) {
    base.register_model(record.model_a);
    base.register_model(record.model_b);
  }

  std::map<std::string, RatingDistribution> out;
  for (const auto& [model, rating] : base.ratings()) out[model].samples.reserve(static_cast<std::size_t>(resamples));

  std::uniform_int_distribution<std::size_t> pick(0, records.size() - 1);
  for (int r = 0; r < resamples; ++r) {
    EloState state = base;
    for (std::size_t i = 0; i < records.size(); ++i) state.apply(records[pick(rng)]);
    for (const auto& [model, rating] : state.ratings()) out[model].samples.push_back(rating);
  }

  for (auto& [model, dist] : out) {
    std::vector<double> sorted = dist.samples;
    std::sort(sorted.begin(), sorted.end());
    dist.median = quantile(sorted, 0.5);
    dist.q1 = quantile(sorted, 0.25);
    dist.q3 = quantile(sorted, 0.75);
  }
  return out;
}

}  // namespace impg
