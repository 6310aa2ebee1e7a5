#include <gtest/gtest.h>

#include <cmath>

#include "impg/error.hpp"
#include "impg/text_similarity.hpp"

namespace impg {
namespace {

TEST(Tokenize, LowercasesAndSplitsSymbols) {
  EXPECT_EQ(tokenize("Find x^2+1, if X>0."), (Tokens{"find", "x", "^", "2", "+", "1", ",", "if", "x", ">", "0", "."}));
  EXPECT_EQ(tokenize("  a\tb\n"), (Tokens{"a", "b"}));
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Tokenize, CjkAndMathSymbolsStandAlone) {
  EXPECT_EQ(tokenize("求x≤3的解"), (Tokens{"求", "x", "≤", "3", "的", "解"}));
  EXPECT_EQ(tokenize("café au lait"), (Tokens{"café", "au", "lait"}));
}

TEST(Bleu, IdentityAndDisjoint) {
  const auto x = tokenize("the area of the triangle is twelve");
  for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(bleu(x, x, n), 1.0);
  EXPECT_DOUBLE_EQ(bleu(tokenize("alpha beta"), tokenize("gamma delta"), 1), 0.0);
  EXPECT_THROW(bleu(x, x, 0), PreconditionError);
  EXPECT_THROW(bleu(x, x, 5), PreconditionError);
}

TEST(Bleu, BrevityPenaltyThreeVersusFour) {
  const Tokens cand{"a", "b", "c"};
  const Tokens ref{"a", "b", "c", "d"};
  EXPECT_NEAR(bleu(cand, ref, 1), std::exp(1.0 - 4.0 / 3.0), 1e-12);
  // All 1- and 2-gram precisions are 1 as well.
  EXPECT_NEAR(bleu(cand, ref, 2), std::exp(1.0 - 4.0 / 3.0), 1e-12);
}

TEST(Bleu, ClippedCounts) {
  // Candidate "the the the" against "the cat": clipped unigram precision 1/3,
  // brevity penalty 1 because the candidate is longer.
  EXPECT_NEAR(bleu(Tokens{"the", "the", "the"}, Tokens{"the", "cat"}, 1), 1.0 / 3.0, 1e-12);
}

TEST(Bleu, GeometricMeanOfPrecisions) {
  const Tokens cand{"a", "b", "c", "d"};
  const Tokens ref{"a", "b", "x", "d"};
  // p1 = 3/4, p2 = 1/3 (only "a b" matches)
  EXPECT_NEAR(bleu(cand, ref, 2), std::sqrt(0.75 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(bleu(cand, ref, 3), 0.0);
}

TEST(Rouge, Examples) {
  const auto x = tokenize("a b c d");
  EXPECT_DOUBLE_EQ(rouge(x, x, RougeVariant::kRouge1), 1.0);
  EXPECT_DOUBLE_EQ(rouge(x, x, RougeVariant::kRouge2), 1.0);
  EXPECT_DOUBLE_EQ(rouge(x, x, RougeVariant::kRougeL), 1.0);
  EXPECT_DOUBLE_EQ(rouge(tokenize("a b"), tokenize("c d"), RougeVariant::kRouge1), 0.0);
  EXPECT_NEAR(rouge(tokenize("a b c"), tokenize("a c"), RougeVariant::kRougeL), 0.8, 1e-12);
  EXPECT_THROW(rouge(x, Tokens{}, RougeVariant::kRouge1), PreconditionError);
}

TEST(Rouge, NGramF1) {
  // Unigram overlap 2 of 3 and 2 of 4: F1 = 2 * (2/3 * 1/2) / (2/3 + 1/2) = 4/7.
  EXPECT_NEAR(rouge(tokenize("a b e"), tokenize("a b c d"), RougeVariant::kRouge1), 4.0 / 7.0, 1e-12);
  // Bigram overlap 1 of 2 and 1 of 3: F1 = 0.4.
  EXPECT_NEAR(rouge(tokenize("a b e"), tokenize("a b c d"), RougeVariant::kRouge2), 0.4, 1e-12);
}

TEST(Similarity, BoundedAndSelfSimilar) {
  const std::vector<std::string> texts{"a b c", "find the minimum of f", "x y", "one", "a a a b"};
  for (const auto& s : texts) {
    const auto a = tokenize(s);
    for (auto m : kAllSimilarityMetrics) {
      EXPECT_DOUBLE_EQ(similarity(a, a, m), 1.0) << to_string(m) << " " << s;
      for (const auto& t : texts) {
        const double v = similarity(a, tokenize(t), m);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(Originality, Examples) {
  const std::vector<std::string> corpus{"find the vertex of the parabola", "sum the first ten terms"};
  EXPECT_DOUBLE_EQ(originality(corpus, corpus, SimilarityMetric::kBleu1), 1.0);
  EXPECT_DOUBLE_EQ(originality(std::vector<std::string>{"zeta omega"}, corpus, SimilarityMetric::kBleu1), 0.0);
  EXPECT_THROW(originality(corpus, std::vector<std::string>{}, SimilarityMetric::kBleu1), PreconditionError);
}

TEST(Originality, MaximaOfPointFourAndPointSixAverageToHalf) {
  // "a x" peaks at 0.4 against "a y z"; "a b c" peaks at 0.6 against the
  // seven-token text.
  const std::vector<std::string> corpus{"a b c d e f g", "a y z"};
  const std::vector<std::string> gen{"a x", "a b c"};
  EXPECT_NEAR(originality(gen, corpus, SimilarityMetric::kRouge1), 0.5, 1e-12);
}

TEST(Originality, AveragesPerItemMaxima) {
  // ROUGE-1 against the single reference "a b c d e": "a b" scores
  // 2*(1*0.4)/(1.4) = 4/7, "a b c d x" scores 0.8.
  const std::vector<std::string> corpus{"a b c d e", "q"};
  const std::vector<std::string> gen{"a b", "a b c d x"};
  EXPECT_NEAR(originality(gen, corpus, SimilarityMetric::kRouge1), (4.0 / 7.0 + 0.8) / 2.0, 1e-12);
}

}  // namespace
}  // namespace impg
