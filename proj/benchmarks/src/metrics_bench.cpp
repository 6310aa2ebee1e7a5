#include <benchmark/benchmark.h>

#include <random>

#include "impg/metrics.hpp"
#include "impg/text_similarity.hpp"

namespace {

using namespace impg;

std::string random_text(std::mt19937_64& rng, int words) {
  static const char* vocab[] = {"find", "the", "value", "of", "x", "if", "f", "(", ")", "=", "2", "+", "3",
                                "sum", "term", "sequence", "derivative", "slope", "area", "triangle"};
  std::uniform_int_distribution<int> pick(0, 19);
  std::string out;
  for (int i = 0; i < words; ++i) out += std::string(vocab[pick(rng)]) + " ";
  return out;
}

void BM_Bleu4(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = tokenize(random_text(rng, static_cast<int>(state.range(0))));
  const auto b = tokenize(random_text(rng, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(bleu(a, b, 4));
}
BENCHMARK(BM_Bleu4)->Arg(30)->Arg(300);

void BM_RougeL(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = tokenize(random_text(rng, static_cast<int>(state.range(0))));
  const auto b = tokenize(random_text(rng, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(rouge(a, b, RougeVariant::kRougeL));
}
BENCHMARK(BM_RougeL)->Arg(30)->Arg(300);

void BM_Originality(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<std::string> gen, corpus;
  for (int i = 0; i < 10; ++i) gen.push_back(random_text(rng, 40));
  for (int i = 0; i < state.range(0); ++i) corpus.push_back(random_text(rng, 40));
  for (auto _ : state) benchmark::DoNotOptimize(originality(gen, corpus, SimilarityMetric::kRouge1));
}
BENCHMARK(BM_Originality)->Arg(50)->Arg(500);

void BM_Grpo(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> r(0, 10);
  std::vector<double> rewards(static_cast<std::size_t>(state.range(0)));
  for (auto& x : rewards) x = r(rng);
  for (auto _ : state) benchmark::DoNotOptimize(grpo_advantages(rewards));
}
BENCHMARK(BM_Grpo)->Arg(16);

}  // namespace
