// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "impg/arena.hpp"
#include "impg/difficulty.hpp"
#include "impg/elo.hpp"
#include "impg/metrics.hpp"
#include "impg/orchestrator.hpp"
#include "impg/sampler.hpp"
#include "impg/text_similarity.hpp"

namespace fs = std::filesystem;
using namespace impg;

namespace {

const fs::path kData = IMPG_DATA_DIR;
const std::string kCli = IMPG_CLI_PATH;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

EncodedCorpus to_corpus(const std::vector<DifficultyEncoding>& encs) {
  EncodedCorpus c;
  for (const auto& e : encs) c.push_back({e, {}, {}, {}});
  return c;
}

EncodedCorpus repeat(const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<DifficultyEncoding> encs;
  for (const auto& [code, n] : counts) {
    for (int i = 0; i < n; ++i) encs.push_back(DifficultyEncoding::parse(code));
  }
  return to_corpus(encs);
}

template <typename T>
double empirical_entropy(const std::vector<T>& xs) {
  return shannon_entropy<T>(xs);
}

// ---------------------------------------------------------------------------

void c1(Outcome& o) {
  const auto t0 = Clock::now();
  const WeightVector sigma;
  const auto bands = DifficultyBands::equal_width(sigma);
  const auto all = enumerate_encodings();
  std::size_t product = 1;
  for (int n : kLevelCounts) product *= static_cast<std::size_t>(n);
  double lo = 1e9, hi = -1e9;
  std::set<std::string> unique;
  std::map<DifficultyLevel, int> per_band;
  for (const auto& e : all) {
    const double d = difficulty_coefficient(e, sigma);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    unique.insert(e.format());
    int memberships = 0;
    for (auto level : kAllLevels) memberships += bands.interval(level).contains(d) ? 1 : 0;
    o.check(memberships == 1, "encoding in exactly one band: " + e.format());
    ++per_band[classify_difficulty(difficulty_coefficient(e, sigma), bands)];
  }
  const double t = seconds_since(t0);
  o.check(all.size() == product && unique.size() == product, "enumeration size equals level-count product");
  o.check(near(lo, 1.0) && near(hi, 2.625), "min 1.0 and max 2.625");
  o.check(t < 1.0, "runtime < 1 s");
  o.detail << all.size() << " encodings, D in [" << lo << ", " << hi << "], bands E/M/H/X = "
           << per_band[DifficultyLevel::kEasy] << "/" << per_band[DifficultyLevel::kMedium] << "/"
           << per_band[DifficultyLevel::kHard] << "/" << per_band[DifficultyLevel::kExpert] << ", " << t << " s";
}

void c2(Outcome& o) {
  Rng rng(2002);
  std::uniform_real_distribution<double> log_size(std::log(10.0), std::log(10000.0));
  int fallback_columns = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int size = static_cast<int>(std::lround(std::exp(log_size(rng))));
    // Restrict each dimension to a random subset of levels so some nodes stay unseen.
    std::array<std::vector<int>, kDimensionCount> allowed;
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
      for (int l = 1; l <= kLevelCounts[d]; ++l) {
        if (trial % 3 == 0 || std::bernoulli_distribution(0.6)(rng)) allowed[d].push_back(l);
      }
      if (allowed[d].empty()) allowed[d].push_back(1);
    }
    std::vector<DifficultyEncoding> encs;
    for (int i = 0; i < size; ++i) {
      std::array<int, kDimensionCount> levels{};
      for (std::size_t d = 0; d < kDimensionCount; ++d) {
        levels[d] = allowed[d][std::uniform_int_distribution<std::size_t>(0, allowed[d].size() - 1)(rng)];
      }
      encs.emplace_back(levels);
    }
    const auto corpus = to_corpus(encs);
    const auto counts = fit_cooccurrence(corpus);
    const auto p = fit_transition_matrix(corpus);
    for (int c = 0; c < static_cast<int>(kNodeCount); ++c) {
      double sum = 0.0;
      for (int r = 0; r < static_cast<int>(kNodeCount); ++r) sum += p.at(r, c);
      worst = std::max(worst, std::abs(sum - 1.0));
      if (counts.node[static_cast<std::size_t>(c)] == 0) ++fallback_columns;
    }
  }
  o.check(worst <= 1e-9, "column sums within 1e-9");
  o.check(fallback_columns > 0, "unseen-node corpora exercised");
  o.detail << "100 corpora, max |colsum-1| = " << worst << ", unseen-node columns = " << fallback_columns;
}

void c3(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(3003);
  std::vector<TransitionMatrix> matrices{TransitionMatrix::uniform(),
                                         fit_transition_matrix(read_corpus(kData / "corpus" / "synthetic_50.jsonl"))};
  for (int k = 0; k < 8; ++k) {
    std::vector<DifficultyEncoding> encs;
    const int size = 5 + 40 * k;
    for (int i = 0; i < size; ++i) encs.push_back(rs_sample(rng));
    matrices.push_back(fit_transition_matrix(to_corpus(encs)));
  }
  int violations = 0;
  const int walks = 100000;
  for (int w = 0; w < walks; ++w) {
    const auto& p = matrices[static_cast<std::size_t>(w) % matrices.size()];
    const auto state = walk_path(p, rng);
    std::set<int> dims;
    for (int node : state.path) dims.insert(node_dimension(node));
    if (state.path.size() != kDimensionCount || dims.size() != kDimensionCount || !state.complete()) ++violations;
    try {
      DifficultyEncoding::from_nodes([&] {
        std::vector<EncodingNode> nodes;
        for (int node : state.path) nodes.push_back(EncodingNode::from_index(node));
        return nodes;
      }());
    } catch (const Error&) {
      ++violations;
    }
  }
  const double t = seconds_since(t0);
  o.check(violations == 0, "zero invariant violations");
  o.check(t < 30.0, "runtime < 30 s");
  o.detail << walks << " walks over " << matrices.size() << " matrices, violations = " << violations << ", " << t
           << " s";
}

void c4(Outcome& o) {
  Rng rng(4004);
  std::vector<DifficultyEncoding> encs;
  for (int i = 0; i < 300; ++i) encs.push_back(rs_sample(rng));
  for (int i = 0; i < 300; ++i) encs.push_back(DifficultyEncoding::parse("A1B1C1D1E1F1G1H1"));
  const auto p = fit_transition_matrix(to_corpus(encs));
  const WeightVector sigma;
  const auto bands = DifficultyBands::equal_width(sigma);
  SamplerConfig config;
  for (auto level : kAllLevels) {
    int wrong = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto r = daps_sample(p, level, bands, sigma, config, rng);
      if (classify_difficulty(difficulty_coefficient(r.encoding, sigma), bands) != level || r.level != level) ++wrong;
    }
    o.check(wrong == 0, "all outputs in target band for " + std::string(to_string(level)));
    o.detail << to_string(level) << " " << 1000 - wrong << "/1000 in band; ";
  }

  // No attainable coefficient lies in [1.01, 1.1) with unit weights.
  const auto gap = DifficultyBands::from_edges({1.0, 1.01, 1.1, 2.0, 2.625});
  SamplerConfig small;
  small.max_attempt_rounds = 25;
  std::int64_t draws = 0;
  const CandidateSource source = [&](Rng& r) {
    ++draws;
    return random_walk(p, r);
  };
  bool threw = false;
  try {
    rejection_sample(source, DifficultyLevel::kMedium, gap, sigma, small, rng);
  } catch (const SamplingError&) {
    threw = true;
  }
  o.check(threw && draws == static_cast<std::int64_t>(small.max_attempt_rounds) * small.batch_size,
          "infeasible band errors after exactly max_attempt_rounds rounds");
  o.detail << "infeasible band: error after " << draws / small.batch_size << " rounds";
}

void c5(Outcome& o) {
  const auto p = fit_transition_matrix(read_corpus(kData / "corpus" / "synthetic_50.jsonl"));
  const WeightVector sigma;
  const auto bands = DifficultyBands::equal_width(sigma);
  const CandidateSource source = [&](Rng& r) { return random_walk(p, r); };
  const DifficultyLevel target = DifficultyLevel::kMedium;
  const int batch = 2;
  Rng rng(5005);
  const auto est = estimate_acceptance(source, target, bands, sigma, 50000, batch, rng);
  const double alpha = est.per_round;
  o.detail << "batch " << batch << ", measured p = " << std::setprecision(4) << alpha << "; ";
  for (int n : {1, 2, 3, 5}) {
    SamplerConfig config;
    config.batch_size = batch;
    config.max_attempt_rounds = n;
    int successes = 0;
    const int trials = 5000;
    for (int t = 0; t < trials; ++t) {
      try {
        rejection_sample(source, target, bands, sigma, config, rng);
        ++successes;
      } catch (const SamplingError&) {
      }
    }
    const double freq = static_cast<double>(successes) / trials;
    const double expected = success_probability(alpha, n);
    o.check(std::abs(freq - expected) <= 0.03, "n=" + std::to_string(n));
    o.detail << "n=" << n << ": " << freq << " vs " << expected << "; ";
  }
}

void c6(Outcome& o) {
  const auto corpus = read_corpus(kData / "corpus" / "synthetic_50.jsonl");
  std::set<std::string> distinct;
  for (const auto& item : corpus) distinct.insert(item.encoding.format());
  o.check(distinct.size() <= 20, "skewed corpus concentrated on <= 20 encodings");
  const auto p = fit_transition_matrix(corpus);
  Rng rng(6006);
  const int n = 10000;
  std::vector<DifficultyEncoding> rs, daps;
  for (int i = 0; i < n; ++i) rs.push_back(rs_sample(rng));
  for (int i = 0; i < n; ++i) daps.push_back(random_walk(p, rng));
  const auto codes = [](const std::vector<DifficultyEncoding>& v) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(e.format());
    return out;
  };
  const double h_rs = empirical_entropy(codes(rs));
  const double h_daps = empirical_entropy(codes(daps));
  o.check(h_rs > h_daps, "H(RS) > H(DAPS)");

  // Same ordering under the band constraint.
  const WeightVector sigma;
  const auto bands = DifficultyBands::equal_width(sigma);
  SamplerConfig config;
  std::vector<std::string> rs_easy, daps_easy;
  for (int i = 0; i < n; ++i) {
    rs_easy.push_back(rejection_sample(rs_sample, DifficultyLevel::kEasy, bands, sigma, config, rng).encoding.format());
    daps_easy.push_back(daps_sample(p, DifficultyLevel::kEasy, bands, sigma, config, rng).encoding.format());
  }
  const double h_rs_easy = empirical_entropy(rs_easy);
  const double h_daps_easy = empirical_entropy(daps_easy);
  o.check(h_rs_easy > h_daps_easy, "H(RS) > H(DAPS) for Easy targets");

  const auto per_dim = per_dimension_entropy(rs);
  double worst = 0.0;
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    worst = std::max(worst, std::abs(per_dim[d] - std::log2(kLevelCounts[d])));
  }
  o.check(worst <= 0.1, "RS per-dimension entropy within 0.1 bit of log2(levels)");
  o.detail << std::setprecision(4) << "unconstrained H(RS) = " << h_rs << " vs H(DAPS) = " << h_daps
           << "; Easy H(RS) = " << h_rs_easy << " vs H(DAPS) = " << h_daps_easy
           << "; max per-dimension gap = " << worst;
}

void c7(Outcome& o) {
  const auto corpus = repeat({{"A1B1C1D1E1F1G1H1", 10},
                              {"A1B1C2D1E1F1G1H1", 8},
                              {"A2B1C1D1E2F1G1H1", 8},
                              {"A2B1C2D1E2F1G1H2", 10},
                              {"A2B2C2D1E2F1G1H2", 10},
                              {"A1B2C3D1E2F1G2H2", 8},
                              {"A2B1C2D2E2F2G1H1", 6},
                              {"A3B1C3D1E2F1G1H1", 4}});
  const auto p = fit_transition_matrix(corpus);
  const WeightVector sigma;
  const auto bands = DifficultyBands::equal_width(sigma);
  std::map<DifficultyLevel, int> mix;
  for (const auto& item : corpus) ++mix[classify_difficulty(difficulty_coefficient(item.encoding, sigma), bands)];
  o.check(mix[DifficultyLevel::kEasy] + mix[DifficultyLevel::kMedium] >= 0.9 * static_cast<double>(corpus.size()),
          "corpus predominantly Easy/Medium");
  const CandidateSource daps = [&](Rng& r) { return random_walk(p, r); };
  const CandidateSource rs = [](Rng& r) { return rs_sample(r); };
  Rng rng(7007);
  for (auto level : {DifficultyLevel::kEasy, DifficultyLevel::kMedium}) {
    const auto a_daps = estimate_acceptance(daps, level, bands, sigma, 2000, 64, rng).per_candidate;
    const auto a_rs = estimate_acceptance(rs, level, bands, sigma, 2000, 64, rng).per_candidate;
    o.check(a_daps > a_rs, std::string(to_string(level)));
    o.detail << std::setprecision(4) << to_string(level) << ": alpha(DAPS) = " << a_daps
             << ", alpha(RS) = " << a_rs << "; ";
  }
}

// --- refinement loop ---------------------------------------------------------

std::string eval_text(double score) {
  EvaluationResult r;
  r.scores.fill(score);
  return format_evaluation(r);
}

std::string gen_text(int i) {
  return "[Problem]\nproblem " + std::to_string(i) + "\n[Solution]\nsolution " + std::to_string(i) + "\n";
}

void c8(Outcome& o) {
  const auto p = fit_transition_matrix(read_corpus(kData / "corpus" / "synthetic_50.jsonl"));
  const WeightVector sigma;
  const auto bands = DifficultyBands::equal_width(sigma);
  const auto table = DifficultyTable::load(kData / "difficulty_table.json");
  const auto templates = PromptTemplates::load(kData / "templates");
  const SessionArtifacts artifacts{p, bands, sigma, table, templates, SamplerConfig{}};
  const ProblemRequest request{"Derivative", DifficultyLevel::kEasy, ProblemType::kMultipleChoice};
  LoopConfig config;
  config.retry_budget = 0;

  const auto actions = [](const SessionOutcome& out) {
    std::vector<LoopAction> a;
    for (const auto& c : out.transcript) a.push_back(c.action);
    return a;
  };
  const auto run = [&](ScriptedBackend& gen, ScriptedBackend& eval) {
    SessionRoles roles;
    roles.generator = &gen;
    roles.evaluator = &eval;
    Rng rng(8);
    return run_session(request, roles, artifacts, config, rng, [] { return 0.0; });
  };

  {
    auto gen = ScriptedBackend::sequence({gen_text(1)});
    auto eval = ScriptedBackend::sequence({eval_text(10)});
    const auto out = run(gen, eval);
    const bool ok = out.state == SessionState::kCompleted &&
                    actions(out) == std::vector<LoopAction>{LoopAction::kOutputResults} &&
                    gen.call_count() == 1 && eval.call_count() == 1;
    o.check(ok, "(a) pass-first");
    o.detail << "(a) " << out.transcript.size() << " cycle, " << gen.call_count() << "+" << eval.call_count()
             << " calls; ";
  }
  {
    auto gen = ScriptedBackend::sequence({gen_text(1)}, true);
    auto eval = ScriptedBackend::sequence({eval_text(2)}, true);
    const auto out = run(gen, eval);
    std::vector<LoopAction> expected(static_cast<std::size_t>(config.tau_max) - 1, LoopAction::kReturnGenerator);
    expected.push_back(LoopAction::kTerminated);
    const bool ok = out.state == SessionState::kTerminated && actions(out) == expected &&
                    gen.call_count() == static_cast<std::size_t>(config.tau_max) &&
                    eval.call_count() == static_cast<std::size_t>(config.tau_max);
    o.check(ok, "(b) always-fail");
    o.detail << "(b) terminated after " << out.transcript.size() << " cycles, " << gen.call_count()
             << " generator calls; ";
  }
  {
    auto gen = ScriptedBackend::sequence({gen_text(1), gen_text(2)});
    auto eval = ScriptedBackend::sequence({eval_text(5), eval_text(10)});
    const auto out = run(gen, eval);
    const bool ok = out.state == SessionState::kCompleted &&
                    actions(out) ==
                        std::vector<LoopAction>{LoopAction::kReturnGenerator, LoopAction::kOutputResults} &&
                    out.final_problem == "problem 2" && out.final_solution == "solution 2" &&
                    gen.call_count() == 2 && eval.call_count() == 2;
    o.check(ok, "(c) fail-then-pass");
    o.detail << "(c) completed at cycle " << out.transcript.size() << " holding \"" << out.final_problem << "\"";
  }
}

// --- Elo ----------------------------------------------------------------------

void c9(Outcome& o) {
  const double e = expected_score(1200, 1000);
  o.check(std::abs(e - 0.75975) <= 1e-5, "expected_score(1200,1000)");
  const auto s = elo_update(EloState(), {0, "A", "B", 1.0, "overall", true});
  o.check(s.rating("A") == 1016.0 && s.rating("B") == 984.0, "equal-rating win moves 16");

  Rng rng(9009);
  EloState state;
  const std::vector<std::string> models{"m0", "m1", "m2", "m3", "m4", "m5"};
  for (const auto& m : models) state.register_model(m);
  const double initial_total = state.total();
  std::uniform_int_distribution<std::size_t> pick(0, models.size() - 1);
  std::uniform_int_distribution<int> outcome(0, 2);
  for (int i = 0; i < 10000; ++i) {
    const auto a = pick(rng);
    auto b = pick(rng);
    while (b == a) b = pick(rng);
    state.apply({i, models[a], models[b], outcome(rng) * 0.5, "overall", true});
  }
  const double drift = std::abs(state.total() - initial_total);
  o.check(drift <= 1e-6, "rating sum conserved");
  o.detail << std::setprecision(7) << "E = " << e << ", win transfers " << s.rating("A") - 1000.0
           << ", drift after 10000 updates = " << drift;
}

void c10(Outcome& o) {
  const auto templates = PromptTemplates::load(kData / "templates");
  std::vector<Pairing> pairings;
  for (int i = 0; i < 200; ++i) {
    if (i % 2 == 0) {
      pairings.push_back({"req " + std::to_string(i), "favoured", "FAVOURED output", "other", "plain output"});
    } else {
      pairings.push_back({"req " + std::to_string(i), "other", "plain output", "favoured", "FAVOURED output"});
    }
  }
  ArenaProtocol protocol;

  auto positional = ScriptedBackend::sequence({"Winner: 1"}, true);
  const auto biased = run_arena(pairings, positional, RoleProfile{}, templates, protocol);
  const auto draws = std::count_if(biased.records.begin(), biased.records.end(),
                                   [](const MatchRecord& r) { return r.s_a == 0.5 && !r.swap_consistent; });
  o.check(draws == static_cast<long>(pairings.size()), "position-biased judge -> all draws");

  auto fair = ScriptedBackend::rules({{"First item:\\s*\\n\\s*FAVOURED", "Winner: 1"},
                                      {"Second item:\\s*\\n\\s*FAVOURED", "Winner: 2"}},
                                     "Winner: tie");
  const auto result = run_arena(pairings, fair, RoleProfile{}, templates, protocol);
  Rng rng(10010);
  const auto boot = bootstrap_elo(result.records, 200, rng);
  const double final_rating = result.ratings.rating("favoured");
  const double median = boot.at("favoured").median;
  o.check(final_rating > protocol.initial_rating && median > protocol.initial_rating,
          "favoured model above initial rating");
  o.detail << draws << "/" << pairings.size() << " draws under positional bias; favoured final = " << std::fixed
           << std::setprecision(1) << final_rating << ", bootstrap median = " << median;
}

// --- metrics ------------------------------------------------------------------

void c11(Outcome& o) {
  int checked = 0;
  const auto expect = [&](bool ok, const std::string& what) {
    ++checked;
    o.check(ok, what);
  };
  using V = std::vector<int>;
  expect(near(difficulty_accuracy(V{1, 2, 3}, V{1, 2, 3}), 1.0), "accuracy identity");
  expect(near(difficulty_accuracy(V{1, 2, 3}, V{1, 2, 4}), 2.0 / 3.0), "accuracy 2/3");
  expect(near(mean_absolute_deviation(V{1, 2, 3}, V{1, 2, 3}), 0.0), "MAD identity");
  expect(near(mean_absolute_deviation(V{1, 2, 3}, V{1, 2, 4}), 1.0 / 3.0), "MAD 1/3");
  expect(near(mean_absolute_deviation(V{4, 4}, V{1, 1}), 3.0), "MAD 3");
  expect(near(shannon_entropy<int>(V{5, 5, 5}), 0.0), "entropy single value");
  expect(near(shannon_entropy<int>(V{0, 1}), 1.0), "entropy 50/50");
  expect(near(shannon_entropy<int>(V{0, 1, 2, 3, 4, 5, 6, 7}), 3.0), "entropy uniform 8");

  const auto toks = tokenize("the slope of the tangent line at x equals two");
  bool bleu_identity = true;
  for (int n = 1; n <= 4; ++n) bleu_identity = bleu_identity && near(bleu(toks, toks, n), 1.0);
  expect(bleu_identity, "BLEU identity");
  expect(near(bleu(tokenize("alpha beta gamma"), tokenize("delta epsilon zeta"), 1), 0.0), "BLEU disjoint");
  expect(near(bleu(tokenize("a b c"), tokenize("a b c d"), 1), std::exp(1.0 - 4.0 / 3.0)), "BLEU brevity penalty");
  bool rouge_identity = true;
  for (auto v : {RougeVariant::kRouge1, RougeVariant::kRouge2, RougeVariant::kRougeL}) {
    rouge_identity = rouge_identity && near(rouge(toks, toks, v), 1.0);
  }
  expect(rouge_identity, "ROUGE identity");
  expect(near(rouge(tokenize("a b"), tokenize("c d"), RougeVariant::kRouge1), 0.0), "ROUGE disjoint");
  expect(near(rouge(tokenize("a b c"), tokenize("a c"), RougeVariant::kRougeL), 0.8), "ROUGE-L 0.8");

  const std::vector<std::string> corpus{"find the derivative of x squared", "sum of the first ten terms"};
  expect(near(originality(corpus, corpus, SimilarityMetric::kBleu1), 1.0), "originality verbatim");
  expect(near(originality(std::vector<std::string>{"zeta omega"}, corpus, SimilarityMetric::kBleu1), 0.0),
         "originality disjoint");
  expect(near(originality(std::vector<std::string>{"a x", "a b c"}, std::vector<std::string>{"a b c d e f g", "a y z"},
                          SimilarityMetric::kRouge1),
              0.5),
         "originality 0.4/0.6 -> 0.5");

  expect(near(weighted_reward({{"correctness", 9}, {"innovation", 9}, {"requirement", 9}}, RewardWeights()), 9.0),
         "reward uniform");
  expect(near(weighted_reward({{"requirement", 7}, {"correctness", 0}, {"innovation", 0}},
                              RewardWeights({{"requirement", 1.0}, {"correctness", 0.0}, {"innovation", 0.0}})),
              7.0),
         "reward (1,0,0)");
  expect(near(weighted_reward({{"requirement", 10}, {"correctness", 5}, {"innovation", 0}},
                              RewardWeights({{"requirement", 0.5}, {"correctness", 0.3}, {"innovation", 0.2}})),
              6.5),
         "reward 6.5");

  std::vector<int> truth(19, 1), est(19, 1);
  est[11] = 2;
  std::ostringstream printed;
  printed << std::fixed << std::setprecision(4) << difficulty_accuracy(truth, est);
  expect(printed.str() == "0.9474", "18/19 prints 0.9474");
  o.detail << checked << " identities checked, 18/19 accuracy prints " << printed.str();
}

void c12(Outcome& o) {
  Rng rng(12012);
  std::uniform_int_distribution<int> group(2, 16);
  std::uniform_real_distribution<double> reward(-5.0, 15.0);
  double worst_mean = 0.0, worst_std = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> r(static_cast<std::size_t>(group(rng)));
    for (auto& x : r) x = reward(rng);
    const auto a = grpo_advantages(r);
    double mean = 0.0;
    for (double x : a) mean += x;
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(std::sqrt(var / static_cast<double>(a.size())) - 1.0));
  }
  o.check(worst_mean < 1e-12, "|mean| < 1e-12");
  o.check(worst_std <= 1e-9, "population std within 1e-9 of 1");
  bool zeros = true;
  for (int g = 2; g <= 16; ++g) {
    const auto a = grpo_advantages(std::vector<double>(static_cast<std::size_t>(g), 3.25));
    zeros = zeros && std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
  }
  o.check(zeros, "zero-variance groups give zeros");
  o.detail << "1000 groups, max |mean| = " << worst_mean << ", max |std-1| = " << worst_std;
}

// --- end to end -----------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

void c13(Outcome& o) {
  const auto root = fs::temp_directory_path() / ("impg_acceptance_" + std::to_string(std::random_device{}()));
  const std::vector<std::string> artifacts{"matrix.json", "samples.jsonl", "sample_report.json", "transcript.json",
                                           "metrics.json"};
  std::vector<std::map<std::string, std::string>> runs;
  double total_seconds = 0.0;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / ("run" + std::to_string(run));
    fs::create_directories(dir);
    std::ofstream(dir / "impg.toml") << "[paths]\n"
                                     << "corpus = \"" << (kData / "corpus" / "synthetic_50.jsonl").string() << "\"\n"
                                     << "matrix = \"matrix.json\"\n"
                                     << "templates = \"" << (kData / "templates").string() << "\"\n"
                                     << "table = \"" << (kData / "difficulty_table.json").string() << "\"\n";
    const std::string cli = quote(kCli) + " -c " + quote(dir / "impg.toml");
    const std::string quiet = " > " + quote(dir / "log.txt") + " 2>&1";
    const std::vector<std::string> steps{
        cli + " fit -o " + quote(dir / "matrix.json"),
        cli + " sample --level Easy -n 100 --seed 13 -o " + quote(dir / "samples.jsonl") + " --report " +
            quote(dir / "sample_report.json"),
        cli + " generate --chapter 'Quadratic functions' --level Easy --seed 13 --mock " +
            quote(kData / "mock" / "mock_fail_then_pass.json") + " -o " + quote(dir / "transcript.json"),
        cli + " metrics --samples " + quote(dir / "samples.jsonl") + " --generated " +
            quote(dir / "transcript.json") + " --corpus " + quote(kData / "corpus" / "synthetic_50.jsonl") +
            " -o " + quote(dir / "metrics.json"),
    };
    const auto t0 = Clock::now();
    for (const auto& step : steps) {
      const int rc = std::system((step + quiet).c_str());
      if (rc != 0) {
        o.check(false, "command failed: " + step + "\n" + slurp(dir / "log.txt"));
        fs::remove_all(root);
        return;
      }
    }
    const double t = seconds_since(t0);
    total_seconds = std::max(total_seconds, t);
    std::map<std::string, std::string> bytes;
    for (const auto& a : artifacts) bytes[a] = slurp(dir / a);
    runs.push_back(std::move(bytes));
  }
  fs::remove_all(root);
  bool identical = true;
  for (const auto& a : artifacts) {
    const bool same = !runs[0][a].empty() && runs[0][a] == runs[1][a];
    o.check(same, "byte-identical " + a);
    identical = identical && same;
  }
  o.check(total_seconds < 10.0, "pipeline < 10 s");
  o.detail << "fit -> sample -> generate --mock -> metrics, slowest run " << std::setprecision(3) << total_seconds
           << " s, " << artifacts.size() << " artifacts " << (identical ? "byte-identical" : "differ");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"difficulty model exhaustiveness", c1},
      {"transition-matrix stochasticity", c2},
      {"walk validity", c3},
      {"rejection correctness", c4},
      {"multi-round success probability", c5},
      {"entropy ordering RS > DAPS", c6},
      {"constraint-satisfaction ordering DAPS > RS", c7},
      {"refinement state-machine traces", c8},
      {"Elo algebra", c9},
      {"arena swap protocol", c10},
      {"metric identities", c11},
      {"GRPO normalization", c12},
      {"end-to-end offline run", c13},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << std::setw(2) << i + 1 << " " << criteria[i].first << ": "
              << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
