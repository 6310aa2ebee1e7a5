#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace impg {

// ---------------------------------------------------------------------------
// Encoding space
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDimensionCount = 8;
inline constexpr std::size_t kNodeCount = 21;

// Levels per dimension A..H. Fixed: the 21-node matrix depends on it.
inline constexpr std::array<int, kDimensionCount> kLevelCounts = {3, 2, 4, 2, 3, 2, 2, 3};

// Index of the first node of each dimension in the canonical node order
// A1,A2,A3,B1,B2,C1..C4,D1,D2,E1..E3,F1,F2,G1,G2,H1..H3.
inline constexpr std::array<int, kDimensionCount> kNodeOffsets = {0, 3, 5, 9, 11, 14, 16, 18};

inline constexpr char dimension_label(std::size_t dim) { return static_cast<char>('A' + dim); }

struct EncodingNode {
  int dimension = 0;  // 0..7 for A..H
  int level = 1;      // 1..kLevelCounts[dimension]

  // Position in the canonical 21-node order.
  int index() const { return kNodeOffsets[dimension] + level - 1; }
  std::string label() const;

  static EncodingNode from_index(int node_index);
  // Parses a two-character label such as "C3".
  static EncodingNode parse(std::string_view label);

  friend bool operator==(const EncodingNode&, const EncodingNode&) = default;
  friend auto operator<=>(const EncodingNode&, const EncodingNode&) = default;
};

inline int node_dimension(int node_index) { return EncodingNode::from_index(node_index).dimension; }
std::string node_label(int node_index);
// "A1".."H3" in canonical order.
const std::array<std::string, kNodeCount>& node_labels();

// One level per dimension, stored in A..H order. Always valid once constructed.
class DifficultyEncoding {
 public:
  using Levels = std::array<int, kDimensionCount>;

  // All-minimum encoding A1B1C1D1E1F1G1H1.
  DifficultyEncoding();
  explicit DifficultyEncoding(const Levels& levels);

  // Strict parser for the 16-character form; see format().
  static DifficultyEncoding parse(std::string_view text);
  // Builds an encoding from exactly one node per dimension, in any order.
  static DifficultyEncoding from_nodes(const std::vector<EncodingNode>& nodes);

  std::string format() const;
  const Levels& levels() const { return levels_; }
  int level(std::size_t dim) const { return levels_[dim]; }
  EncodingNode node(std::size_t dim) const { return {static_cast<int>(dim), levels_[dim]}; }
  std::array<int, kDimensionCount> node_indices() const;

  friend bool operator==(const DifficultyEncoding&, const DifficultyEncoding&) = default;
  friend auto operator<=>(const DifficultyEncoding&, const DifficultyEncoding&) = default;

 private:
  Levels levels_;
};

// Every valid encoding (1728 of them) in lexicographic level order.
std::vector<DifficultyEncoding> enumerate_encodings();

// ---------------------------------------------------------------------------
// Difficulty coefficient and bands
// ---------------------------------------------------------------------------

class WeightVector {
 public:
  WeightVector();  // all ones
  explicit WeightVector(const std::array<double, kDimensionCount>& sigma);

  double operator[](std::size_t dim) const { return sigma_[dim]; }
  const std::array<double, kDimensionCount>& values() const { return sigma_; }

 private:
  std::array<double, kDimensionCount> sigma_;
};

// Weighted mean of the per-dimension levels.
double difficulty_coefficient(const DifficultyEncoding& enc, const WeightVector& sigma);

// Smallest and largest attainable coefficients for a weight vector.
double min_coefficient(const WeightVector& sigma);
double max_coefficient(const WeightVector& sigma);

enum class DifficultyLevel { kEasy = 1, kMedium = 2, kHard = 3, kExpert = 4 };

inline constexpr std::array<DifficultyLevel, 4> kAllLevels = {
    DifficultyLevel::kEasy, DifficultyLevel::kMedium, DifficultyLevel::kHard, DifficultyLevel::kExpert};

std::string_view to_string(DifficultyLevel level);
// Accepts "Easy".."Expert" (case-insensitive) or the codes "1".."4".
DifficultyLevel parse_level(std::string_view text);
inline int level_code(DifficultyLevel level) { return static_cast<int>(level); }

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_closed = false;

  bool contains(double d) const { return d >= lower && (upper_closed ? d <= upper : d < upper); }
};

// Four consecutive intervals Easy/Medium/Hard/Expert. Each is half-open
// except the last, which is closed at the top.
class DifficultyBands {
 public:
  // Equal-width quartering of [min_coefficient, max_coefficient].
  static DifficultyBands equal_width(const WeightVector& sigma);
  // Edges must be strictly increasing: [e0,e1) [e1,e2) [e2,e3) [e3,e4].
  static DifficultyBands from_edges(const std::array<double, 5>& edges);

  const Interval& interval(DifficultyLevel level) const { return intervals_[level_code(level) - 1]; }
  const std::array<double, 5>& edges() const { return edges_; }
  // True when the bands span exactly the attainable range for sigma.
  bool covers(const WeightVector& sigma, double tolerance = 1e-12) const;

 private:
  explicit DifficultyBands(const std::array<double, 5>& edges);

  std::array<double, 5> edges_;
  std::array<Interval, 4> intervals_;
};

// Throws PreconditionError when d lies outside every band.
DifficultyLevel classify_difficulty(double d, const DifficultyBands& bands);

// ---------------------------------------------------------------------------
// Decoding to textual requirements
// ---------------------------------------------------------------------------

struct DifficultyTableEntry {
  std::string factor;
  std::string level_name;
  std::string description;
  int weight = 0;
};

// Descriptions for every (dimension, level) node, keyed "A1".."H3".
class DifficultyTable {
 public:
  DifficultyTable() = default;
  explicit DifficultyTable(std::map<std::string, DifficultyTableEntry> entries, std::string version = {});

  static DifficultyTable load(const std::filesystem::path& path);
  static DifficultyTable parse(std::string_view json_text);

  const std::string& version() const { return version_; }
  bool contains(const std::string& code) const { return entries_.contains(code); }
  // Throws DataError for unknown codes.
  const DifficultyTableEntry& at(const std::string& code) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, DifficultyTableEntry> entries_;
  std::string version_;
};

struct DecodedDimension {
  std::string code;  // e.g. "H3"
  std::string factor;
  std::string level_name;
  std::string description;
};

struct DecodedRequirement {
  std::array<DecodedDimension, kDimensionCount> dimensions;
};

DecodedRequirement decode(const DifficultyEncoding& enc, const DifficultyTable& table);

}  // namespace impg

template <>
struct std::hash<impg::DifficultyEncoding> {
  std::size_t operator()(const impg::DifficultyEncoding& enc) const noexcept {
    std::size_t h = 0;
    for (int level : enc.levels()) h = h * 5 + static_cast<std::size_t>(level);
    return h;
  }
};
