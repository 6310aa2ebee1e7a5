#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace impg {

using Tokens = std::vector<std::string>;

// Lowercases ASCII, splits on whitespace, emits every non-alphanumeric
// ASCII symbol (operators, brackets, punctuation) as its own token, and
// emits each CJK character as its own token.
Tokens tokenize(std::string_view text);

// Cumulative BLEU-n (uniform weights over 1..n grams, clipped counts, brevity
// penalty), no smoothing. n must lie in 1..4.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int n);

enum class RougeVariant { kRouge1, kRouge2, kRougeL };

// F1 of n-gram overlap (ROUGE-1/2) or of the longest common subsequence
// (ROUGE-L). Throws on an empty reference.
double rouge(std::span<const std::string> candidate, std::span<const std::string> reference, RougeVariant variant);

enum class SimilarityMetric { kBleu1, kBleu2, kBleu3, kBleu4, kRouge1, kRouge2, kRougeL };

inline constexpr std::array<SimilarityMetric, 7> kAllSimilarityMetrics = {
    SimilarityMetric::kBleu1,  SimilarityMetric::kBleu2,  SimilarityMetric::kBleu3, SimilarityMetric::kBleu4,
    SimilarityMetric::kRouge1, SimilarityMetric::kRouge2, SimilarityMetric::kRougeL};

std::string_view to_string(SimilarityMetric metric);

double similarity(std::span<const std::string> candidate, std::span<const std::string> reference,
                  SimilarityMetric metric);

// Mean over generated texts of the maximum similarity against any corpus
// text. Lower means more original.
double originality(std::span<const std::string> generated, std::span<const std::string> corpus,
                   SimilarityMetric metric);

// Same as above on pre-tokenized texts.
double originality_tokens(std::span<const Tokens> generated, std::span<const Tokens> corpus, SimilarityMetric metric);

}  // namespace impg
