#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "impg/elo.hpp"
#include "impg/metrics.hpp"
#include "impg/text_similarity.hpp"

namespace impg::cli {

using nlohmann::json;

namespace {

// Command-line values are configuration, not data.
DifficultyLevel level_argument(const std::string& text) {
  try {
    return parse_level(text);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

std::string read_text(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + what + " " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(source + ": " + e.what());
  }
}

// Calls `fn(object, line_number)` for every nonblank line.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, const std::string& what, Fn fn) {
  std::istringstream in(read_text(path, what));
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_json(line, path.string() + ":" + std::to_string(number)), number);
  }
}

std::string where(const std::filesystem::path& path, int line) { return path.string() + ":" + std::to_string(line); }

// Tags backend failures with the role that raised them.
class RoleBackend : public ChatBackend {
 public:
  RoleBackend(std::string role, std::unique_ptr<ChatBackend> inner) : role_(std::move(role)), inner_(std::move(inner)) {}

  std::string complete(const RoleProfile& profile, std::span<const ChatTurn> turns) override {
    try {
      return inner_->complete(profile, turns);
    } catch (const BackendError& e) {
      throw BackendError(e.kind(), role_ + " backend: " + e.what(), e.status());
    }
  }

 private:
  std::string role_;
  std::unique_ptr<ChatBackend> inner_;
};

// Backends for the requested roles, scripted under --mock or HTTP otherwise.
class BackendSet {
 public:
  BackendSet(const AppConfig& config, const std::filesystem::path& mock) {
    if (!mock.empty()) {
      script_ = parse_json(read_text(mock, "mock script"), mock.string());
      if (!script_.is_object()) throw ConfigError("mock script must map role names to scripts");
    }
    if (!config.paths.audit_log.empty() && mock.empty()) audit_ = std::make_shared<AuditLog>(config.paths.audit_log);
  }

  bool mocked() const { return !script_.is_null(); }

  // nullptr when the role has neither a script nor a backend section.
  ChatBackend* get(const AppConfig& config, const std::string& role) {
    auto it = backends_.find(role);
    if (it != backends_.end()) return it->second.get();
    std::unique_ptr<ChatBackend> inner;
    if (mocked()) {
      if (script_.contains(role)) {
        try {
          inner = std::make_unique<ScriptedBackend>(ScriptedBackend::from_json(script_.at(role)));
        } catch (const Error& e) {
          throw ConfigError("mock script for " + role + ": " + e.what());
        }
      }
    } else if (const auto& rc = config.role(role); rc.backend) {
      inner = std::make_unique<HttpChatBackend>(*rc.backend, audit_);
    }
    if (!inner) return nullptr;
    auto& slot = backends_[role];
    slot = std::make_unique<RoleBackend>(role, std::move(inner));
    return slot.get();
  }

 private:
  json script_;
  std::shared_ptr<AuditLog> audit_;
  std::map<std::string, std::unique_ptr<ChatBackend>> backends_;
};

RoleProfile profile_for(const AppConfig& config, const std::string& role, const std::string& default_system) {
  RoleProfile p = config.role(role).profile;
  if (p.system_prompt.empty()) p.system_prompt = default_system;
  return p;
}

json level_json(DifficultyLevel level) { return std::string(to_string(level)); }

int read_level(const json& value, const std::string& source) {
  try {
    if (value.is_number_integer()) return level_code(parse_level(std::to_string(value.get<int>())));
    if (value.is_string()) return level_code(parse_level(value.get<std::string>()));
  } catch (const Error& e) {
    throw DataError(source + ": " + e.what());
  }
  throw DataError(source + ": level must be a name or a code 1..4");
}

// Plain lines ("Easy", "2") or JSON objects with a "level" field.
std::vector<int> read_levels(const std::filesystem::path& path, const std::string& what) {
  std::vector<int> levels;
  std::istringstream in(read_text(path, what));
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto source = where(path, number);
    if (line[first] == '{') {
      const auto obj = parse_json(line, source);
      if (!obj.contains("level")) throw DataError(source + ": missing \"level\"");
      levels.push_back(read_level(obj["level"], source));
    } else {
      const auto last = line.find_last_not_of(" \t\r");
      levels.push_back(read_level(json(line.substr(first, last - first + 1)), source));
    }
  }
  return levels;
}

// A transcript JSON contributes its final problem; JSON lines contribute
// every "problem" field.
std::vector<std::string> read_problems(const std::filesystem::path& path, const std::string& what) {
  const auto text = read_text(path, what);
  std::vector<std::string> out;
  try {
    const auto doc = json::parse(text);
    if (doc.is_object() && doc.contains("final")) {
      out.push_back(doc.at("final").at("problem").get<std::string>());
      return out;
    }
  } catch (const json::exception&) {
    // Not a single document; read it as JSON lines below.
  }
  for_each_json_line(path, what, [&](const json& obj, int line) {
    if (!obj.is_object()) throw DataError(where(path, line) + ": expected a JSON object");
    if (obj.contains("problem")) out.push_back(obj["problem"].get<std::string>());
  });
  return out;
}

json entropy_block(std::span<const DifficultyEncoding> encodings) {
  std::vector<std::string> codes;
  codes.reserve(encodings.size());
  for (const auto& e : encodings) codes.push_back(e.format());
  json per_dim = json::object();
  const auto h = per_dimension_entropy(encodings);
  for (std::size_t d = 0; d < kDimensionCount; ++d) per_dim[std::string(1, dimension_label(d))] = h[d];
  return json{{"entropy", shannon_entropy<std::string>(codes)},
              {"per_dimension_entropy", per_dim},
              {"distinct_ratio", distinct_ratio(encodings)}};
}

}  // namespace

int report_error(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BackendError& e) {
    if (e.kind() == BackendError::Kind::kConfig) {
      err << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    err << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const SamplingError& e) {
    err << "sampling error: " << e.what() << "\n";
    return kExitSampling;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const PreconditionError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_fit(const AppConfig& config, const FitOptions& options, std::ostream& out) {
  const auto corpus_path = options.corpus.empty() ? config.paths.corpus : options.corpus;
  const auto out_path = options.out.empty() ? config.paths.matrix : options.out;
  const auto corpus = read_corpus(corpus_path);
  const auto counts = fit_cooccurrence(corpus);
  const auto p = transition_matrix(jaccard_matrix(counts));
  p.save(out_path);

  out << "fitted " << counts.total << " encodings from " << corpus_path.string() << "\n";
  out << "node marginals:\n";
  const auto& labels = node_labels();
  for (int i = 0; i < static_cast<int>(kNodeCount); ++i) {
    const double m = static_cast<double>(counts.node[i]) / static_cast<double>(counts.total);
    out << "  " << labels[i] << " " << std::fixed << std::setprecision(4) << m << "\n";
  }
  double worst = 0.0;
  for (int j = 0; j < static_cast<int>(kNodeCount); ++j) {
    double sum = 0.0;
    for (int i = 0; i < static_cast<int>(kNodeCount); ++i) sum += p.at(i, j);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  out << "column sums: max |sum - 1| = " << std::scientific << std::setprecision(2) << worst << "\n";
  out << std::defaultfloat << "wrote " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_sample(const AppConfig& config, const SampleOptions& options, std::ostream& out, std::ostream& err) {
  if (options.count < 0) throw ConfigError("--count must be >= 0");
  const auto level = level_argument(options.level);
  const auto method = parse_sampling_method(options.method);
  const auto bands = config.bands();

  CandidateSource source;
  switch (method) {
    case SamplingMethod::kDaps: {
      require_file(config.paths.matrix, "transition matrix");
      auto p = std::make_shared<TransitionMatrix>(TransitionMatrix::load(config.paths.matrix));
      source = [p](Rng& rng) { return random_walk(*p, rng); };
      break;
    }
    case SamplingMethod::kRs:
      source = [](Rng& rng) { return rs_sample(rng); };
      break;
    case SamplingMethod::kCrs: {
      require_file(config.paths.crs_rules, "constraint rules");
      auto rules = std::make_shared<CrsRules>(CrsRules::load(config.paths.crs_rules));
      source = [rules](Rng& rng) { return crs_sample(*rules, rng); };
      break;
    }
  }

  Rng rng(options.seed);
  std::vector<DifficultyEncoding> encodings;
  std::int64_t rounds = 0;
  std::int64_t candidates = 0;
  std::ostringstream lines;
  for (int i = 0; i < options.count; ++i) {
    const auto r = rejection_sample(source, level, bands, config.sigma, config.sampler, rng);
    rounds += r.report.rounds_used;
    candidates += r.report.candidates_generated;
    encodings.push_back(r.encoding);
    lines << json{{"index", i},
                  {"encoding", r.encoding.format()},
                  {"difficulty", r.difficulty},
                  {"level", level_json(r.level)},
                  {"rounds", r.report.rounds_used}}
                 .dump()
          << "\n";
  }
  if (options.out.empty()) {
    out << lines.str();
  } else {
    write_text(options.out, lines.str());
  }

  json summary{{"method", to_string(method)},
               {"level", level_json(level)},
               {"count", options.count},
               {"seed", options.seed},
               {"batch_size", config.sampler.batch_size},
               {"rounds", rounds},
               {"candidates", candidates}};
  // Every emitted sample ends on the only accepting round of its run.
  summary["alpha_estimate"] = rounds > 0 ? static_cast<double>(options.count) / static_cast<double>(rounds) : 0.0;
  if (!encodings.empty()) summary.update(entropy_block(encodings));
  if (options.report.empty()) {
    err << summary.dump(2) << "\n";
  } else {
    write_text(options.report, summary.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_generate(const AppConfig& config, const GenerateOptions& options, std::ostream& out, std::ostream& err) {
  ProblemRequest request{options.chapter, level_argument(options.level), parse_problem_type(options.type)};
  request.validate();
  config.loop.validate();

  BackendSet backends(config, options.mock);
  const bool expert = config.loop.mode == EvalMode::kExpert;
  SessionRoles roles;
  roles.generator = backends.get(config, "generator");
  if (roles.generator == nullptr) throw ConfigError("generator backend is not configured");
  const std::string eval_role = expert ? "expert" : "evaluator";
  ChatBackend* evaluator = backends.get(config, eval_role);
  if (evaluator == nullptr) throw ConfigError(eval_role + " backend is not configured");
  (expert ? roles.expert : roles.evaluator) = evaluator;

  require_file(config.paths.matrix, "transition matrix");
  require_file(config.paths.table, "difficulty table");
  const auto matrix = TransitionMatrix::load(config.paths.matrix);
  const auto table = DifficultyTable::load(config.paths.table);
  const auto templates = PromptTemplates::load(config.paths.templates);
  const auto bands = config.bands();

  roles.generator_profile = profile_for(config, "generator", templates.generator_system);
  roles.evaluator_profile = profile_for(config, "evaluator", templates.evaluator_system);
  roles.expert_profile = profile_for(config, "expert", templates.evaluator_system);

  SessionArtifacts artifacts{matrix, bands, config.sigma, table, templates, config.sampler};
  Rng rng(options.seed);
  // Scripted runs record zero durations so their transcripts are reproducible.
  const Clock clock = backends.mocked() ? Clock([] { return 0.0; }) : steady_clock_seconds();
  const auto outcome = run_session(request, roles, artifacts, config.loop, rng, clock);

  if (!options.out.empty()) write_text(options.out, transcript_json(request, config.loop, outcome).dump(2) + "\n");
  out << "state: " << to_string(outcome.state) << "\n";
  out << "cycles: " << outcome.transcript.size() << "\n";
  out << "retries: " << outcome.attempts.size() - 1 << "\n\n";
  out << "[Problem]\n" << outcome.final_problem << "\n\n[Solution]\n" << outcome.final_solution << "\n";
  if (outcome.state == SessionState::kTerminated) {
    err << "session terminated after " << outcome.transcript.size() << " cycles without meeting the thresholds\n";
    return kExitTerminated;
  }
  return kExitOk;
}

int cmd_arena(const AppConfig& config, const ArenaOptions& options, std::ostream& out) {
  if (options.rounds < 0) throw ConfigError("--rounds must be >= 0");
  const auto doc = parse_json(read_text(options.models, "models file"), options.models.string());
  if (!doc.is_object() || !doc.contains("prompts") || !doc.contains("models")) {
    throw DataError(options.models.string() + ": expected {\"prompts\": [...], \"models\": {...}}");
  }
  const auto prompts = doc["prompts"].get<std::vector<std::string>>();
  const auto outputs = doc["models"].get<std::map<std::string, std::vector<std::string>>>();
  if (prompts.empty()) throw DataError(options.models.string() + ": no prompts");
  if (outputs.size() < 2) throw DataError(options.models.string() + ": an arena needs at least two models");
  std::vector<std::string> names;
  for (const auto& [name, texts] : outputs) {
    if (texts.size() != prompts.size()) {
      throw DataError(options.models.string() + ": model " + name + " has " + std::to_string(texts.size()) +
                      " outputs for " + std::to_string(prompts.size()) + " prompts");
    }
    names.push_back(name);
  }

  BackendSet backends(config, options.mock);
  ChatBackend* judge = backends.get(config, "judge");
  if (judge == nullptr) throw ConfigError("judge backend is not configured");
  const auto templates = PromptTemplates::load(config.paths.templates);
  const auto profile = profile_for(config, "judge", templates.judge_system);

  Rng rng(options.seed);
  std::vector<Pairing> pairings;
  std::uniform_int_distribution<std::size_t> pick_prompt(0, prompts.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_a(0, names.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, names.size() - 2);
  for (int r = 0; r < options.rounds; ++r) {
    const auto prompt = pick_prompt(rng);
    const auto a = pick_a(rng);
    auto b = pick_b(rng);
    if (b >= a) ++b;
    pairings.push_back({prompts[prompt], names[a], outputs.at(names[a])[prompt], names[b], outputs.at(names[b])[prompt]});
  }

  const auto& protocol = config.arena.protocol;
  const auto result = run_arena(pairings, *judge, profile, templates, protocol, names);

  json ratings = json::object();
  for (const auto& [m, r] : result.ratings.ratings()) ratings[m] = r;
  const auto wins = win_rate_matrix(result.records);
  json matrix = json::object();
  for (const auto& a : names) {
    json row = json::object();
    for (const auto& b : names) {
      if (auto v = wins.at(a, b)) row[b] = *v;
    }
    matrix[a] = row;
  }
  json boot = json::object();
  if (result.records.empty()) {
    for (const auto& m : names) {
      boot[m] = {{"median", protocol.initial_rating}, {"q1", protocol.initial_rating}, {"q3", protocol.initial_rating}};
    }
  } else {
    for (const auto& [m, dist] : bootstrap_elo(result.records, config.arena.resamples, rng, protocol.k_factor,
                                                protocol.initial_rating)) {
      boot[m] = {{"median", dist.median}, {"q1", dist.q1}, {"q3", dist.q3}};
    }
  }
  int inconsistent = 0;
  std::ostringstream log;
  for (const auto& rec : result.records) {
    inconsistent += rec.swap_consistent ? 0 : 1;
    log << json{{"match_id", rec.match_id},
                {"model_a", rec.model_a},
                {"model_b", rec.model_b},
                {"dimension", rec.dimension},
                {"s_a", rec.s_a},
                {"swap_consistent", rec.swap_consistent}}
               .dump()
        << "\n";
  }
  if (!options.matches.empty()) write_text(options.matches, log.str());

  json report{{"rounds", options.rounds},
              {"seed", options.seed},
              {"k_factor", protocol.k_factor},
              {"initial_rating", protocol.initial_rating},
              {"resamples", config.arena.resamples},
              {"swap_inconsistent", inconsistent},
              {"ratings", ratings},
              {"win_rate_matrix", matrix},
              {"bootstrap", boot}};
  if (options.out.empty()) {
    out << report.dump(2) << "\n";
  } else {
    write_text(options.out, report.dump(2) + "\n");
    out << "wrote " << options.out.string() << "\n";
  }
  return kExitOk;
}

int cmd_metrics(const MetricsOptions& options, std::ostream& out) {
  if (options.truth.empty() != options.predictions.empty()) {
    throw ConfigError("--truth and --pred must be given together");
  }
  if (options.generated.empty() != options.corpus.empty()) {
    throw ConfigError("--generated and --corpus must be given together");
  }
  json report = json::object();
  if (!options.truth.empty()) {
    const auto truth = read_levels(options.truth, "truth file");
    const auto predicted = read_levels(options.predictions, "predictions file");
    if (truth.size() != predicted.size()) {
      throw DataError("truth has " + std::to_string(truth.size()) + " levels but predictions have " +
                      std::to_string(predicted.size()));
    }
    if (truth.empty()) throw DataError("truth file holds no levels");
    report["count"] = truth.size();
    report["accuracy"] = difficulty_accuracy(truth, predicted);
    report["mad"] = mean_absolute_deviation(truth, predicted);
    report["level_entropy"] = shannon_entropy<int>(predicted);
  }
  if (!options.samples.empty()) {
    std::vector<DifficultyEncoding> encodings;
    for_each_json_line(options.samples, "samples file", [&](const json& obj, int line) {
      if (!obj.is_object() || !obj.contains("encoding")) throw DataError(where(options.samples, line) + ": missing \"encoding\"");
      try {
        encodings.push_back(DifficultyEncoding::parse(obj["encoding"].get<std::string>()));
      } catch (const DataError& e) {
        throw DataError(where(options.samples, line) + ": " + e.what());
      }
    });
    if (encodings.empty()) throw DataError(options.samples.string() + ": no encodings");
    report["samples"] = encodings.size();
    report.update(entropy_block(encodings));
  }
  if (!options.generated.empty()) {
    std::vector<Tokens> generated, corpus;
    for (const auto& path : options.generated) {
      for (const auto& text : read_problems(path, "generated file")) generated.push_back(tokenize(text));
    }
    for (const auto& text : read_problems(options.corpus, "corpus")) corpus.push_back(tokenize(text));
    if (generated.empty()) throw DataError("generated files hold no problems");
    if (corpus.empty()) throw DataError(options.corpus.string() + ": no problem texts");
    const auto score = [&](SimilarityMetric m) { return originality_tokens(generated, corpus, m); };
    report["originality"] = {{"bleu",
                              {{"1", score(SimilarityMetric::kBleu1)},
                               {"2", score(SimilarityMetric::kBleu2)},
                               {"3", score(SimilarityMetric::kBleu3)},
                               {"4", score(SimilarityMetric::kBleu4)}}},
                             {"rouge",
                              {{"1", score(SimilarityMetric::kRouge1)},
                               {"2", score(SimilarityMetric::kRouge2)},
                               {"L", score(SimilarityMetric::kRougeL)}}}};
  }
  if (report.empty()) throw ConfigError("nothing to compute; pass --truth/--pred, --samples or --generated/--corpus");
  if (options.out.empty()) {
    out << report.dump(2) << "\n";
  } else {
    write_text(options.out, report.dump(2) + "\n");
    if (report.contains("accuracy")) {
      out << "accuracy " << std::fixed << std::setprecision(4) << report["accuracy"].get<double>() << "\n";
    }
    out << "wrote " << options.out.string() << "\n";
  }
  return kExitOk;
}

int cmd_decode(const AppConfig& config, const DecodeOptions& options, std::ostream& out) {
  DifficultyEncoding enc;
  try {
    enc = DifficultyEncoding::parse(options.encoding);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  require_file(config.paths.table, "difficulty table");
  const auto table = DifficultyTable::load(config.paths.table);
  const auto decoded = decode(enc, table);
  const double d = difficulty_coefficient(enc, config.sigma);
  const auto level = classify_difficulty(d, config.bands());
  if (options.json) {
    json dims = json::array();
    for (const auto& dim : decoded.dimensions) {
      dims.push_back({{"code", dim.code}, {"factor", dim.factor}, {"level", dim.level_name},
                      {"description", dim.description}});
    }
    out << json{{"encoding", enc.format()}, {"difficulty", d}, {"band", level_json(level)}, {"dimensions", dims}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << enc.format() << "  D = " << d << "  (" << to_string(level) << ")\n";
  for (const auto& dim : decoded.dimensions) {
    out << dim.code << "  " << dim.factor << " / " << dim.level_name << "\n    " << dim.description << "\n";
  }
  return kExitOk;
}

}  // namespace impg::cli
