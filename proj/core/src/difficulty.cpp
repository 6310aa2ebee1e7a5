#include "impg/difficulty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "impg/error.hpp"

namespace impg {

namespace {

void check_level(int dim, int level) {
  if (dim < 0 || dim >= static_cast<int>(kDimensionCount)) {
    throw DataError("dimension index out of range: " + std::to_string(dim));
  }
  if (level < 1 || level > kLevelCounts[dim]) {
    throw DataError(std::string("level ") + std::to_string(level) + " out of range for dimension " +
                    dimension_label(dim) + " (1.." + std::to_string(kLevelCounts[dim]) + ")");
  }
}

}  // namespace

std::string EncodingNode::label() const {
  return std::string{dimension_label(dimension), static_cast<char>('0' + level)};
}

EncodingNode EncodingNode::from_index(int node_index) {
  if (node_index < 0 || node_index >= static_cast<int>(kNodeCount)) {
    throw DataError("node index out of range: " + std::to_string(node_index));
  }
  int dim = static_cast<int>(kDimensionCount) - 1;
  while (kNodeOffsets[dim] > node_index) --dim;
  return {dim, node_index - kNodeOffsets[dim] + 1};
}

EncodingNode EncodingNode::parse(std::string_view label) {
  if (label.size() != 2 || label[0] < 'A' || label[0] > 'H' || !std::isdigit(static_cast<unsigned char>(label[1]))) {
    throw DataError("malformed node label '" + std::string(label) + "'");
  }
  EncodingNode node{label[0] - 'A', label[1] - '0'};
  check_level(node.dimension, node.level);
  return node;
}

std::string node_label(int node_index) { return EncodingNode::from_index(node_index).label(); }

const std::array<std::string, kNodeCount>& node_labels() {
  static const auto labels = [] {
    std::array<std::string, kNodeCount> out;
    for (std::size_t i = 0; i < kNodeCount; ++i) out[i] = node_label(static_cast<int>(i));
    return out;
  }();
  return labels;
}

// ---------------------------------------------------------------------------

DifficultyEncoding::DifficultyEncoding() { levels_.fill(1); }

DifficultyEncoding::DifficultyEncoding(const Levels& levels) : levels_(levels) {
  for (std::size_t d = 0; d < kDimensionCount; ++d) check_level(static_cast<int>(d), levels_[d]);
}

DifficultyEncoding DifficultyEncoding::parse(std::string_view text) {
  const auto malformed = [&](const std::string& why) {
    return DataError("malformed encoding '" + std::string(text) + "': " + why);
  };
  if (text.size() % 2 != 0 || text.size() > 2 * kDimensionCount) {
    throw malformed("expected 16 characters of letter/digit pairs");
  }
  std::array<int, kDimensionCount> levels{};
  std::array<int, kDimensionCount> seen_at{};
  seen_at.fill(-1);
  for (std::size_t pos = 0; pos < text.size(); pos += 2) {
    const char letter = text[pos];
    const char digit = text[pos + 1];
    if (letter < 'A' || letter > 'H') throw malformed(std::string("unexpected character '") + letter + "'");
    if (digit < '0' || digit > '9') throw malformed(std::string("unexpected character '") + digit + "'");
    const int dim = letter - 'A';
    if (seen_at[dim] >= 0) throw malformed(std::string("duplicate dimension ") + letter);
    seen_at[dim] = static_cast<int>(pos / 2);
    levels[dim] = digit - '0';
  }
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    if (seen_at[d] < 0) throw malformed(std::string("missing dimension ") + dimension_label(d));
  }
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    if (seen_at[d] != static_cast<int>(d)) throw malformed("dimensions must appear in A..H order");
  }
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    if (levels[d] < 1 || levels[d] > kLevelCounts[d]) {
      throw malformed(std::string("level ") + std::to_string(levels[d]) + " out of range for dimension " +
                      dimension_label(d));
    }
  }
  return DifficultyEncoding(levels);
}

DifficultyEncoding DifficultyEncoding::from_nodes(const std::vector<EncodingNode>& nodes) {
  if (nodes.size() != kDimensionCount) {
    throw DataError("an encoding needs exactly " + std::to_string(kDimensionCount) + " nodes, got " +
                    std::to_string(nodes.size()));
  }
  Levels levels{};
  std::array<bool, kDimensionCount> seen{};
  for (const auto& node : nodes) {
    check_level(node.dimension, node.level);
    if (seen[node.dimension]) {
      throw DataError(std::string("duplicate dimension ") + dimension_label(node.dimension));
    }
    seen[node.dimension] = true;
    levels[node.dimension] = node.level;
  }
  return DifficultyEncoding(levels);
}

std::string DifficultyEncoding::format() const {
  std::string out;
  out.reserve(2 * kDimensionCount);
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    out.push_back(dimension_label(d));
    out.push_back(static_cast<char>('0' + levels_[d]));
  }
  return out;
}

std::array<int, kDimensionCount> DifficultyEncoding::node_indices() const {
  std::array<int, kDimensionCount> out{};
  for (std::size_t d = 0; d < kDimensionCount; ++d) out[d] = kNodeOffsets[d] + levels_[d] - 1;
  return out;
}

std::vector<DifficultyEncoding> enumerate_encodings() {
  std::vector<DifficultyEncoding> out;
  DifficultyEncoding::Levels levels;
  levels.fill(1);
  while (true) {
    out.emplace_back(levels);
    // Odometer increment, last dimension fastest.
    int d = static_cast<int>(kDimensionCount) - 1;
    while (d >= 0 && levels[d] == kLevelCounts[d]) {
      levels[d] = 1;
      --d;
    }
    if (d < 0) break;
    ++levels[d];
  }
  return out;
}

// ---------------------------------------------------------------------------

WeightVector::WeightVector() { sigma_.fill(1.0); }

WeightVector::WeightVector(const std::array<double, kDimensionCount>& sigma) : sigma_(sigma) {
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    if (!(sigma_[d] > 0.0) || !std::isfinite(sigma_[d])) {
      throw ConfigError(std::string("weight for dimension ") + dimension_label(d) + " must be positive and finite");
    }
  }
}

double difficulty_coefficient(const DifficultyEncoding& enc, const WeightVector& sigma) {
  double sum = 0.0;
  for (std::size_t d = 0; d < kDimensionCount; ++d) sum += sigma[d] * enc.level(d);
  return sum / static_cast<double>(kDimensionCount);
}

double min_coefficient(const WeightVector& sigma) {
  return difficulty_coefficient(DifficultyEncoding{}, sigma);
}

double max_coefficient(const WeightVector& sigma) {
  return difficulty_coefficient(DifficultyEncoding(kLevelCounts), sigma);
}

std::string_view to_string(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::kEasy:
      return "Easy";
    case DifficultyLevel::kMedium:
      return "Medium";
    case DifficultyLevel::kHard:
      return "Hard";
    case DifficultyLevel::kExpert:
      return "Expert";
  }
  return "?";
}

DifficultyLevel parse_level(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "easy" || lowered == "1") return DifficultyLevel::kEasy;
  if (lowered == "medium" || lowered == "2") return DifficultyLevel::kMedium;
  if (lowered == "hard" || lowered == "3") return DifficultyLevel::kHard;
  if (lowered == "expert" || lowered == "4") return DifficultyLevel::kExpert;
  throw DataError("unknown difficulty level '" + std::string(text) + "'");
}

DifficultyBands::DifficultyBands(const std::array<double, 5>& edges) : edges_(edges) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(edges_[i]) || !std::isfinite(edges_[i + 1]) || !(edges_[i] < edges_[i + 1])) {
      throw ConfigError("band edges must be finite and strictly increasing");
    }
    intervals_[i] = Interval{edges_[i], edges_[i + 1], i == 3};
  }
}

DifficultyBands DifficultyBands::equal_width(const WeightVector& sigma) {
  const double lo = min_coefficient(sigma);
  const double hi = max_coefficient(sigma);
  const double width = (hi - lo) / 4.0;
  return DifficultyBands({lo, lo + width, lo + 2 * width, lo + 3 * width, hi});
}

DifficultyBands DifficultyBands::from_edges(const std::array<double, 5>& edges) { return DifficultyBands(edges); }

bool DifficultyBands::covers(const WeightVector& sigma, double tolerance) const {
  return std::abs(edges_.front() - min_coefficient(sigma)) <= tolerance &&
         std::abs(edges_.back() - max_coefficient(sigma)) <= tolerance;
}

DifficultyLevel classify_difficulty(double d, const DifficultyBands& bands) {
  for (DifficultyLevel level : kAllLevels) {
    if (bands.interval(level).contains(d)) return level;
  }
  std::ostringstream msg;
  msg << "difficulty coefficient " << d << " lies outside every band [" << bands.edges().front() << ", "
      << bands.edges().back() << "]";
  throw PreconditionError(msg.str());
}

// ---------------------------------------------------------------------------

DifficultyTable::DifficultyTable(std::map<std::string, DifficultyTableEntry> entries, std::string version)
    : entries_(std::move(entries)), version_(std::move(version)) {}

DifficultyTable DifficultyTable::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("difficulty table is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_object()) {
    throw DataError("difficulty table must be an object with an \"entries\" object");
  }
  std::map<std::string, DifficultyTableEntry> entries;
  for (const auto& [code, value] : doc["entries"].items()) {
    EncodingNode::parse(code);
    if (!value.is_object() || !value.contains("description") || !value["description"].is_string()) {
      throw DataError("difficulty table entry " + code + " lacks a description string");
    }
    DifficultyTableEntry entry;
    entry.description = value["description"].get<std::string>();
    entry.factor = value.value("factor", std::string{});
    entry.level_name = value.value("level", std::string{});
    entry.weight = value.value("weight", 0);
    entries.emplace(code, std::move(entry));
  }
  return DifficultyTable(std::move(entries), doc.value("version", std::string{}));
}

DifficultyTable DifficultyTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open difficulty table " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const DifficultyTableEntry& DifficultyTable::at(const std::string& code) const {
  auto it = entries_.find(code);
  if (it == entries_.end()) throw DataError("difficulty table has no entry for " + code);
  return it->second;
}

DecodedRequirement decode(const DifficultyEncoding& enc, const DifficultyTable& table) {
  DecodedRequirement out;
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    const std::string code = enc.node(d).label();
    const auto& entry = table.at(code);
    out.dimensions[d] = DecodedDimension{code, entry.factor, entry.level_name, entry.description};
  }
  return out;
}

}  // namespace impg
