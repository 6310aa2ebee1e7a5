#include "impg/text_similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>

#include "impg/error.hpp"

namespace impg {

namespace {

// Decodes one UTF-8 sequence at text[pos]; invalid bytes decode as
// themselves with length 1.
char32_t decode_utf8(std::string_view text, std::size_t pos, std::size_t& length) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  std::size_t n = 1;
  char32_t cp = lead;
  if (lead >= 0xF0 && lead < 0xF8) {
    n = 4;
    cp = lead & 0x07;
  } else if (lead >= 0xE0) {
    n = lead < 0xF0 ? 3 : 1;
    cp = lead & 0x0F;
  } else if (lead >= 0xC0) {
    n = 2;
    cp = lead & 0x1F;
  }
  if (n == 1 || pos + n > text.size()) {
    length = 1;
    return lead;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const unsigned char cont = byte(pos + i);
    if ((cont & 0xC0) != 0x80) {
      length = 1;
      return lead;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  length = n;
  return cp;
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x3000 && cp <= 0x30FF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
         (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0xFF00 && cp <= 0xFFEF) || (cp >= 0x20000 && cp <= 0x2FA1F);
}

bool is_math_symbol(char32_t cp) {
  return (cp >= 0x2190 && cp <= 0x22FF) || (cp >= 0x2A00 && cp <= 0x2AFF) || cp == 0x00B1 || cp == 0x00D7 ||
         cp == 0x00F7 || cp == 0x00B7 || cp == 0x00B0;
}

using NgramCounts = std::map<std::vector<std::string_view>, std::int64_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[gram];
  }
  return counts;
}

std::int64_t clipped_overlap(const NgramCounts& candidate, const NgramCounts& reference) {
  std::int64_t overlap = 0;
  for (const auto& [gram, count] : candidate) {
    auto it = reference.find(gram);
    if (it != reference.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

double f1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::string word;
  const auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t length = 1;
    const char32_t cp = decode_utf8(text, pos, length);
    const auto raw = text.substr(pos, length);
    pos += length;
    if (cp < 0x80) {
      const auto c = static_cast<unsigned char>(cp);
      if (std::isspace(c)) {
        flush();
      } else if (std::isalnum(c)) {
        word.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
        tokens.emplace_back(1, static_cast<char>(c));
      }
    } else if (is_cjk(cp) || is_math_symbol(cp)) {
      flush();
      tokens.emplace_back(raw);
    } else {
      word.append(raw);
    }
  }
  flush();
  return tokens;
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int n) {
  if (n < 1 || n > 4) throw PreconditionError("BLEU order must lie in 1..4");
  if (candidate.empty() || reference.empty()) return 0.0;
  // Orders longer than the candidate have no n-grams to score and are left out.
  const auto orders = std::min<std::size_t>(static_cast<std::size_t>(n), candidate.size());
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= orders; ++k) {
    const auto cand = count_ngrams(candidate, k);
    const auto overlap = clipped_overlap(cand, count_ngrams(reference, k));
    if (overlap == 0) return 0.0;
    const auto total = static_cast<double>(candidate.size() - k + 1);
    log_sum += std::log(static_cast<double>(overlap) / total);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::min(1.0, brevity * std::exp(log_sum / static_cast<double>(orders)));
}

double rouge(std::span<const std::string> candidate, std::span<const std::string> reference, RougeVariant variant) {
  if (reference.empty()) throw PreconditionError("ROUGE needs a nonempty reference");
  if (candidate.empty()) return 0.0;
  if (variant == RougeVariant::kRougeL) {
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    return f1(lcs / static_cast<double>(candidate.size()), lcs / static_cast<double>(reference.size()));
  }
  const std::size_t n = variant == RougeVariant::kRouge1 ? 1 : 2;
  if (reference.size() < n || candidate.size() < n) {
    // No n-grams to compare; only an exact match counts as overlap.
    return std::equal(candidate.begin(), candidate.end(), reference.begin(), reference.end()) ? 1.0 : 0.0;
  }
  const auto overlap = static_cast<double>(clipped_overlap(count_ngrams(candidate, n), count_ngrams(reference, n)));
  return f1(overlap / static_cast<double>(candidate.size() - n + 1),
            overlap / static_cast<double>(reference.size() - n + 1));
}

std::string_view to_string(SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::kBleu1:
      return "bleu1";
    case SimilarityMetric::kBleu2:
      return "bleu2";
    case SimilarityMetric::kBleu3:
      return "bleu3";
    case SimilarityMetric::kBleu4:
      return "bleu4";
    case SimilarityMetric::kRouge1:
      return "rouge1";
    case SimilarityMetric::kRouge2:
      return "rouge2";
    case SimilarityMetric::kRougeL:
      return "rougeL";
  }
  return "?";
}

double similarity(std::span<const std::string> candidate, std::span<const std::string> reference,
                  SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::kBleu1:
      return bleu(candidate, reference, 1);
    case SimilarityMetric::kBleu2:
      return bleu(candidate, reference, 2);
    case SimilarityMetric::kBleu3:
      return bleu(candidate, reference, 3);
    case SimilarityMetric::kBleu4:
      return bleu(candidate, reference, 4);
    case SimilarityMetric::kRouge1:
      return rouge(candidate, reference, RougeVariant::kRouge1);
    case SimilarityMetric::kRouge2:
      return rouge(candidate, reference, RougeVariant::kRouge2);
    case SimilarityMetric::kRougeL:
      return rouge(candidate, reference, RougeVariant::kRougeL);
  }
  return 0.0;
}

double originality_tokens(std::span<const Tokens> generated, std::span<const Tokens> corpus, SimilarityMetric metric) {
  if (corpus.empty()) throw PreconditionError("originality needs a nonempty corpus");
  if (generated.empty()) throw PreconditionError("originality needs at least one generated text");
  double total = 0.0;
  for (const auto& gen : generated) {
    double best = 0.0;
    for (const auto& ref : corpus) {
      if (ref.empty()) continue;
      best = std::max(best, similarity(gen, ref, metric));
    }
    total += best;
  }
  return total / static_cast<double>(generated.size());
}

double originality(std::span<const std::string> generated, std::span<const std::string> corpus,
                   SimilarityMetric metric) {
  std::vector<Tokens> gen_tokens, corpus_tokens;
  gen_tokens.reserve(generated.size());
  corpus_tokens.reserve(corpus.size());
  for (const auto& text : generated) gen_tokens.push_back(tokenize(text));
  for (const auto& text : corpus) corpus_tokens.push_back(tokenize(text));
  return originality_tokens(gen_tokens, corpus_tokens, metric);
}

}  // namespace impg
