#include "impg/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "impg/error.hpp"

namespace impg {

namespace {

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

// Index of the first cumulative weight exceeding u.
int pick_weighted(const std::array<double, kNodeCount>& weights, Rng& rng) {
  double total = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    total += weights[i];
    if (weights[i] > 0.0) last_positive = static_cast<int>(i);
  }
  std::uniform_real_distribution<double> unit(0.0, total);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace

// ---------------------------------------------------------------------------

EncodedCorpus parse_corpus(std::istream& in, const std::string& source_name) {
  EncodedCorpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = source_name + ":" + std::to_string(line_no) + ": ";
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object() || !obj.contains("encoding") || !obj["encoding"].is_string()) {
        throw DataError("expected an object with a string \"encoding\" field");
      }
      CorpusItem item{DifficultyEncoding::parse(obj["encoding"].get<std::string>()), optional_string(obj, "chapter"),
                      optional_string(obj, "type"), optional_string(obj, "problem")};
      corpus.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "invalid JSON: " + e.what());
    } catch (const Error& e) {
      throw DataError(where + e.what());
    }
  }
  return corpus;
}

EncodedCorpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return parse_corpus(in, path.string());
}

CooccurrenceCounts fit_cooccurrence(std::span<const DifficultyEncoding> encodings) {
  if (encodings.empty()) throw DataError("cannot fit co-occurrence counts on an empty corpus");
  CooccurrenceCounts counts;
  for (const auto& enc : encodings) {
    const auto nodes = enc.node_indices();
    for (int i : nodes) {
      ++counts.node[i];
      for (int j : nodes) ++counts.pair[i][j];
    }
  }
  counts.total = static_cast<std::int64_t>(encodings.size());
  return counts;
}

CooccurrenceCounts fit_cooccurrence(const EncodedCorpus& corpus) {
  std::vector<DifficultyEncoding> encodings;
  encodings.reserve(corpus.size());
  for (const auto& item : corpus) encodings.push_back(item.encoding);
  return fit_cooccurrence(encodings);
}

AssociationMatrix jaccard_matrix(const CooccurrenceCounts& counts) {
  AssociationMatrix j;
  for (std::size_t r = 0; r < kNodeCount; ++r) {
    for (std::size_t c = 0; c < kNodeCount; ++c) {
      const auto both = counts.pair[r][c];
      const auto denom = counts.node[r] + counts.node[c] - both;
      j.values[r][c] = denom > 0 ? static_cast<double>(both) / static_cast<double>(denom) : 0.0;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------

TransitionMatrix::TransitionMatrix(const NodeMatrix<double>& p) : p_(p) {
  for (std::size_t c = 0; c < kNodeCount; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < kNodeCount; ++r) {
      if (!(p_[r][c] >= 0.0) || !std::isfinite(p_[r][c])) {
        throw DataError("transition matrix entries must be finite and nonnegative");
      }
      sum += p_[r][c];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw DataError("transition matrix column " + node_label(static_cast<int>(c)) + " sums to " +
                      std::to_string(sum) + ", expected 1");
    }
  }
}

TransitionMatrix TransitionMatrix::uniform() {
  NodeMatrix<double> p;
  for (auto& row : p) row.fill(1.0 / static_cast<double>(kNodeCount));
  return TransitionMatrix(p);
}

std::string TransitionMatrix::to_json() const {
  std::string out = "{\n  \"node_order\": [";
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    if (i) out += ", ";
    out += "\"" + node_labels()[i] + "\"";
  }
  out += "],\n  \"P\": [\n";
  for (std::size_t r = 0; r < kNodeCount; ++r) {
    out += "    [";
    for (std::size_t c = 0; c < kNodeCount; ++c) {
      if (c) out += ", ";
      out += nlohmann::json(p_[r][c]).dump();
    }
    out += r + 1 < kNodeCount ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

TransitionMatrix TransitionMatrix::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("matrix artifact is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("node_order") || !doc.contains("P")) {
    throw DataError("matrix artifact needs \"node_order\" and \"P\"");
  }
  const auto& order = doc["node_order"];
  if (!order.is_array() || order.size() != kNodeCount) throw DataError("node_order must list 21 nodes");
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    if (!order[i].is_string() || order[i].get<std::string>() != node_labels()[i]) {
      throw DataError("node_order must be the canonical A1..H3 order");
    }
  }
  const auto& rows = doc["P"];
  if (!rows.is_array() || rows.size() != kNodeCount) throw DataError("P must have 21 rows");
  NodeMatrix<double> p{};
  for (std::size_t r = 0; r < kNodeCount; ++r) {
    if (!rows[r].is_array() || rows[r].size() != kNodeCount) throw DataError("every row of P must have 21 entries");
    for (std::size_t c = 0; c < kNodeCount; ++c) {
      if (!rows[r][c].is_number()) throw DataError("P entries must be numbers");
      p[r][c] = rows[r][c].get<double>();
    }
  }
  return TransitionMatrix(p);
}

void TransitionMatrix::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write matrix artifact " + path.string());
  out << to_json();
}

TransitionMatrix TransitionMatrix::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open matrix artifact " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

TransitionMatrix transition_matrix(const AssociationMatrix& association) {
  NodeMatrix<double> p{};
  for (std::size_t c = 0; c < kNodeCount; ++c) {
    double mass = 0.0;
    for (std::size_t r = 0; r < kNodeCount; ++r) mass += association.values[r][c];
    for (std::size_t r = 0; r < kNodeCount; ++r) {
      p[r][c] = mass > 0.0 ? association.values[r][c] / mass : 1.0 / static_cast<double>(kNodeCount);
    }
  }
  return TransitionMatrix(p);
}

TransitionMatrix fit_transition_matrix(const EncodedCorpus& corpus) {
  return transition_matrix(jaccard_matrix(fit_cooccurrence(corpus)));
}

// ---------------------------------------------------------------------------

WalkState WalkState::start_at(int node_index) {
  WalkState state;
  state.current = node_index;
  state.visited.set(static_cast<std::size_t>(node_dimension(node_index)));
  state.path.push_back(node_index);
  return state;
}

std::array<double, kNodeCount> step_distribution(const TransitionMatrix& p, const WalkState& state) {
  std::array<double, kNodeCount> weights{};
  double mass = 0.0;
  int candidates = 0;
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    if (state.visited.test(static_cast<std::size_t>(node_dimension(static_cast<int>(i))))) continue;
    ++candidates;
    weights[i] = p.at(static_cast<int>(i), state.current);
    mass += weights[i];
  }
  if (candidates == 0) throw PreconditionError("walk has no candidate nodes left");
  for (std::size_t i = 0; i < kNodeCount; ++i) {
    const bool candidate = !state.visited.test(static_cast<std::size_t>(node_dimension(static_cast<int>(i))));
    if (!candidate) continue;
    weights[i] = mass > 0.0 ? weights[i] / mass : 1.0 / candidates;
  }
  return weights;
}

WalkState walk_step(const TransitionMatrix& p, const WalkState& state, Rng& rng) {
  if (state.complete()) throw PreconditionError("walk already covers every dimension");
  const auto weights = step_distribution(p, state);
  const int next = pick_weighted(weights, rng);
  WalkState out = state;
  out.current = next;
  out.visited.set(static_cast<std::size_t>(node_dimension(next)));
  out.path.push_back(next);
  return out;
}

WalkState walk_path(const TransitionMatrix& p, Rng& rng) {
  std::uniform_int_distribution<int> start(0, static_cast<int>(kNodeCount) - 1);
  WalkState state = WalkState::start_at(start(rng));
  state.path.reserve(kDimensionCount);
  while (!state.complete()) state = walk_step(p, state, rng);
  return state;
}

DifficultyEncoding random_walk(const TransitionMatrix& p, Rng& rng) {
  const auto state = walk_path(p, rng);
  std::vector<EncodingNode> nodes;
  nodes.reserve(state.path.size());
  for (int idx : state.path) nodes.push_back(EncodingNode::from_index(idx));
  return DifficultyEncoding::from_nodes(nodes);
}

// ---------------------------------------------------------------------------

void SamplerConfig::validate() const {
  if (batch_size < 1) throw ConfigError("sampler batch size must be >= 1");
  if (max_attempt_rounds < 1) throw ConfigError("sampler max_attempt_rounds must be >= 1");
}

SampleResult rejection_sample(const CandidateSource& source, DifficultyLevel target, const DifficultyBands& bands,
                              const WeightVector& sigma, const SamplerConfig& config, Rng& rng) {
  config.validate();
  const Interval band = bands.interval(target);
  SampleReport report;
  std::vector<DifficultyEncoding> accepted;
  accepted.reserve(static_cast<std::size_t>(config.batch_size));
  for (int round = 1; round <= config.max_attempt_rounds; ++round) {
    report.rounds_used = round;
    for (int m = 0; m < config.batch_size; ++m) {
      auto candidate = source(rng);
      ++report.candidates_generated;
      if (band.contains(difficulty_coefficient(candidate, sigma))) accepted.push_back(candidate);
    }
    if (!accepted.empty()) {
      report.accepted_count = static_cast<std::int64_t>(accepted.size());
      report.alpha_estimate =
          static_cast<double>(report.accepted_count) / static_cast<double>(report.candidates_generated);
      std::uniform_int_distribution<std::size_t> pick(0, accepted.size() - 1);
      const auto chosen = accepted[pick(rng)];
      const double d = difficulty_coefficient(chosen, sigma);
      return SampleResult{chosen, d, target, report};
    }
  }
  throw SamplingError("no candidate reached the " + std::string(to_string(target)) + " band after " +
                      std::to_string(config.max_attempt_rounds) + " rounds of " + std::to_string(config.batch_size));
}

SampleResult daps_sample(const TransitionMatrix& p, DifficultyLevel target, const DifficultyBands& bands,
                         const WeightVector& sigma, const SamplerConfig& config, Rng& rng) {
  return rejection_sample([&p](Rng& g) { return random_walk(p, g); }, target, bands, sigma, config, rng);
}

DifficultyEncoding rs_sample(Rng& rng) {
  DifficultyEncoding::Levels levels{};
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    std::uniform_int_distribution<int> level(1, kLevelCounts[d]);
    levels[d] = level(rng);
  }
  return DifficultyEncoding(levels);
}

CrsRules::CrsRules(std::vector<std::pair<EncodingNode, EncodingNode>> forbidden) : forbidden_(std::move(forbidden)) {
  for (const auto& [a, b] : forbidden_) {
    if (a.dimension == b.dimension) {
      throw ConfigError("forbidden pair " + a.label() + "/" + b.label() + " must span two dimensions");
    }
  }
}

CrsRules CrsRules::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("rules file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("forbidden_pairs") || !doc["forbidden_pairs"].is_array()) {
    throw ConfigError("rules file needs a \"forbidden_pairs\" array");
  }
  std::vector<std::pair<EncodingNode, EncodingNode>> pairs;
  for (const auto& entry : doc["forbidden_pairs"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string()) {
      throw ConfigError("each forbidden pair must be two node labels");
    }
    try {
      pairs.emplace_back(EncodingNode::parse(entry[0].get<std::string>()),
                         EncodingNode::parse(entry[1].get<std::string>()));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }
  return CrsRules(std::move(pairs));
}

CrsRules CrsRules::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rules file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool CrsRules::allows(const DifficultyEncoding& enc) const {
  return std::none_of(forbidden_.begin(), forbidden_.end(), [&](const auto& rule) {
    return enc.level(rule.first.dimension) == rule.first.level && enc.level(rule.second.dimension) == rule.second.level;
  });
}

DifficultyEncoding crs_sample(const CrsRules& rules, Rng& rng, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    auto candidate = rs_sample(rng);
    if (rules.allows(candidate)) return candidate;
  }
  throw SamplingError("constrained random sampling found no rule-compliant encoding in " +
                      std::to_string(max_attempts) + " attempts");
}

double success_probability(double alpha, int n) {
  if (alpha < 0.0 || alpha > 1.0) throw PreconditionError("alpha must lie in [0, 1]");
  if (n < 0) throw PreconditionError("round count must be >= 0");
  return 1.0 - std::pow(1.0 - alpha, n);
}

AcceptanceEstimate estimate_acceptance(const CandidateSource& source, DifficultyLevel target,
                                       const DifficultyBands& bands, const WeightVector& sigma, int rounds,
                                       int batch_size, Rng& rng) {
  if (rounds < 1 || batch_size < 1) throw PreconditionError("rounds and batch size must be >= 1");
  const Interval band = bands.interval(target);
  std::int64_t accepted = 0;
  int successful_rounds = 0;
  for (int r = 0; r < rounds; ++r) {
    int in_round = 0;
    for (int m = 0; m < batch_size; ++m) {
      if (band.contains(difficulty_coefficient(source(rng), sigma))) ++in_round;
    }
    accepted += in_round;
    if (in_round > 0) ++successful_rounds;
  }
  const auto candidates = static_cast<double>(rounds) * batch_size;
  return {static_cast<double>(accepted) / candidates, static_cast<double>(successful_rounds) / rounds};
}

SamplingMethod parse_sampling_method(std::string_view raw) {
  std::string text(raw);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "daps") return SamplingMethod::kDaps;
  if (text == "rs") return SamplingMethod::kRs;
  if (text == "crs") return SamplingMethod::kCrs;
  throw ConfigError("unknown sampling method '" + std::string(raw) + "' (expected daps, rs or crs)");
}

std::string_view to_string(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kDaps:
      return "daps";
    case SamplingMethod::kRs:
      return "rs";
    case SamplingMethod::kCrs:
      return "crs";
  }
  return "?";
}

}  // namespace impg
