#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impg/difficulty.hpp"
#include "impg/random.hpp"

namespace impg {

template <class T>
using NodeMatrix = std::array<std::array<T, kNodeCount>, kNodeCount>;

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct CorpusItem {
  DifficultyEncoding encoding;
  std::optional<std::string> chapter;
  std::optional<std::string> type;
  std::optional<std::string> problem;
};

using EncodedCorpus = std::vector<CorpusItem>;

// One JSON object per line: {"encoding": "A1B2...", "chapter"?, "type"?, "problem"?}.
// Blank lines are skipped. Errors carry the 1-based line number.
EncodedCorpus parse_corpus(std::istream& in, const std::string& source_name = "<corpus>");
EncodedCorpus read_corpus(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Association structure
// ---------------------------------------------------------------------------

struct CooccurrenceCounts {
  NodeMatrix<std::int64_t> pair{};         // C_ij, diagonal holds N_i
  std::array<std::int64_t, kNodeCount> node{};  // N_i
  std::int64_t total = 0;
};

CooccurrenceCounts fit_cooccurrence(std::span<const DifficultyEncoding> encodings);
CooccurrenceCounts fit_cooccurrence(const EncodedCorpus& corpus);

struct AssociationMatrix {
  NodeMatrix<double> values{};
};

// Jaccard coefficient per node pair; pairs where both nodes are unseen get 0.
AssociationMatrix jaccard_matrix(const CooccurrenceCounts& counts);

// Column-stochastic 21x21 matrix; entry (i, j) is the probability of moving
// to node i from node j. Immutable once built.
class TransitionMatrix {
 public:
  // Validates nonnegativity and unit column sums (within 1e-9).
  explicit TransitionMatrix(const NodeMatrix<double>& p);

  static TransitionMatrix uniform();

  double at(int row, int col) const { return p_[row][col]; }
  const NodeMatrix<double>& values() const { return p_; }

  // {"node_order": [...21 labels], "P": [[row 0], ..., [row 20]]}
  std::string to_json() const;
  static TransitionMatrix from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static TransitionMatrix load(const std::filesystem::path& path);

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  NodeMatrix<double> p_;
};

// Column-normalizes J. Columns without mass become uniform over all 21 nodes.
TransitionMatrix transition_matrix(const AssociationMatrix& association);

// Fit pipeline: counts -> Jaccard -> column normalization.
TransitionMatrix fit_transition_matrix(const EncodedCorpus& corpus);

// ---------------------------------------------------------------------------
// Dimension-constrained random walk
// ---------------------------------------------------------------------------

struct WalkState {
  int current = 0;
  std::bitset<kDimensionCount> visited;
  std::vector<int> path;

  static WalkState start_at(int node_index);
  bool complete() const { return visited.all(); }
};

// Probabilities of each node being chosen next from `state`: the current
// node's column, truncated to unvisited dimensions and renormalized. If the
// truncated mass is zero the candidates are weighted uniformly.
std::array<double, kNodeCount> step_distribution(const TransitionMatrix& p, const WalkState& state);

WalkState walk_step(const TransitionMatrix& p, const WalkState& state, Rng& rng);

// Uniform start node, seven constrained transitions.
WalkState walk_path(const TransitionMatrix& p, Rng& rng);
DifficultyEncoding random_walk(const TransitionMatrix& p, Rng& rng);

// ---------------------------------------------------------------------------
// Band-constrained sampling
// ---------------------------------------------------------------------------

struct SamplerConfig {
  int batch_size = 64;
  int max_attempt_rounds = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampleReport {
  int rounds_used = 0;
  std::int64_t candidates_generated = 0;
  std::int64_t accepted_count = 0;
  double alpha_estimate = 0.0;
};

struct SampleResult {
  DifficultyEncoding encoding;
  double difficulty = 0.0;
  DifficultyLevel level = DifficultyLevel::kEasy;
  SampleReport report;
};

using CandidateSource = std::function<DifficultyEncoding(Rng&)>;

// Batch rejection loop: each round draws batch_size candidates, keeps those
// whose coefficient lies in the target band, and returns one accepted
// candidate chosen uniformly. Throws SamplingError after max_attempt_rounds
// rounds without an acceptance.
SampleResult rejection_sample(const CandidateSource& source, DifficultyLevel target, const DifficultyBands& bands,
                              const WeightVector& sigma, const SamplerConfig& config, Rng& rng);

SampleResult daps_sample(const TransitionMatrix& p, DifficultyLevel target, const DifficultyBands& bands,
                         const WeightVector& sigma, const SamplerConfig& config, Rng& rng);

// Independent uniform level per dimension.
DifficultyEncoding rs_sample(Rng& rng);

// Forbidden node pairs for constrained random sampling.
class CrsRules {
 public:
  CrsRules() = default;
  explicit CrsRules(std::vector<std::pair<EncodingNode, EncodingNode>> forbidden);

  // {"forbidden_pairs": [["C1", "H3"], ...]}
  static CrsRules parse(std::string_view json_text);
  static CrsRules load(const std::filesystem::path& path);

  bool allows(const DifficultyEncoding& enc) const;
  const std::vector<std::pair<EncodingNode, EncodingNode>>& forbidden() const { return forbidden_; }

 private:
  std::vector<std::pair<EncodingNode, EncodingNode>> forbidden_;
};

inline constexpr int kDefaultCrsMaxAttempts = 10000;

// Redraws rs_sample until no forbidden pair is present; throws SamplingError
// after max_attempts draws.
DifficultyEncoding crs_sample(const CrsRules& rules, Rng& rng, int max_attempts = kDefaultCrsMaxAttempts);

// 1 - (1 - alpha)^n, alpha being the per-round probability of a nonempty
// accepted set.
double success_probability(double alpha, int n);

struct AcceptanceEstimate {
  double per_candidate = 0.0;  // accepted candidates / candidates
  double per_round = 0.0;      // rounds with >= 1 acceptance / rounds
};

// Runs `rounds` independent batches and measures acceptance without stopping
// at the first success.
AcceptanceEstimate estimate_acceptance(const CandidateSource& source, DifficultyLevel target,
                                       const DifficultyBands& bands, const WeightVector& sigma, int rounds,
                                       int batch_size, Rng& rng);

enum class SamplingMethod { kDaps, kRs, kCrs };

SamplingMethod parse_sampling_method(std::string_view text);
std::string_view to_string(SamplingMethod method);

}  // namespace impg
