#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace impg::cli;

namespace {

// Flag values that, when given, replace config file values.
struct Overrides {
  std::optional<std::string> corpus, matrix, templates, table, rules;
  std::optional<int> batch_size, max_rounds, tau_max, retry_budget;
  std::optional<std::string> mode;

  void add_paths(CLI::App* cmd) {
    cmd->add_option("--matrix", matrix, "Transition matrix JSON");
    cmd->add_option("--table", table, "Difficulty description table JSON");
    cmd->add_option("--templates", templates, "Prompt template directory");
  }
  void add_sampler(CLI::App* cmd) {
    cmd->add_option("--batch-size", batch_size, "Candidates per rejection round");
    cmd->add_option("--max-rounds", max_rounds, "Rejection rounds before giving up");
  }

  void apply(AppConfig& c) const {
    if (corpus) c.paths.corpus = *corpus;
    if (matrix) c.paths.matrix = *matrix;
    if (templates) c.paths.templates = *templates;
    if (table) c.paths.table = *table;
    if (rules) c.paths.crs_rules = *rules;
    if (batch_size) c.sampler.batch_size = *batch_size;
    if (max_rounds) c.sampler.max_attempt_rounds = *max_rounds;
    if (tau_max) c.loop.tau_max = *tau_max;
    if (retry_budget) c.loop.retry_budget = *retry_budget;
    if (mode) c.loop.mode = impg::parse_eval_mode(*mode);
    c.sampler.validate();
    c.loop.validate();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Difficulty-controlled math problem generation toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "TOML config file (default: ./impg.toml when present)");
  Overrides ov;

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the node transition matrix from an encoded corpus");
  fit_cmd->add_option("--corpus", fit.corpus, "Corpus JSON lines");
  fit_cmd->add_option("-o,--out", fit.out, "Matrix output path");

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample difficulty encodings for a target level");
  sample_cmd->add_option("--level", sample.level, "Easy, Medium, Hard or Expert")->required();
  sample_cmd->add_option("--method", sample.method, "daps, rs or crs")->capture_default_str();
  sample_cmd->add_option("-n,--count", sample.count, "Number of encodings")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "RNG seed")->capture_default_str();
  sample_cmd->add_option("-o,--out", sample.out, "Encodings output (JSON lines)");
  sample_cmd->add_option("--report", sample.report, "Summary output (JSON)");
  sample_cmd->add_option("--rules", ov.rules, "Forbidden-pair rules for crs");
  sample_cmd->add_option("--matrix", ov.matrix, "Transition matrix JSON");
  ov.add_sampler(sample_cmd);

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Run one generate-evaluate-refine session");
  gen_cmd->add_option("--chapter", gen.chapter, "Textbook chapter")->required();
  gen_cmd->add_option("--level", gen.level, "Easy, Medium, Hard or Expert")->required();
  gen_cmd->add_option("--type", gen.type, "multiple-choice, fill-in-the-blank or problem-solving")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--mock", gen.mock, "Scripted backends JSON instead of HTTP");
  gen_cmd->add_option("-o,--out", gen.out, "Transcript output (JSON)");
  gen_cmd->add_option("--mode", ov.mode, "apprentice or expert");
  gen_cmd->add_option("--tau-max", ov.tau_max, "Maximum cycles per attempt");
  gen_cmd->add_option("--retry-budget", ov.retry_budget, "Fresh-sample restarts after termination");
  ov.add_paths(gen_cmd);
  ov.add_sampler(gen_cmd);

  ArenaOptions arena;
  auto* arena_cmd = app.add_subcommand("arena", "Pairwise judged Elo arena");
  arena_cmd->add_option("--models", arena.models, "Models file JSON")->required();
  arena_cmd->add_option("--rounds", arena.rounds, "Number of matches")->capture_default_str();
  arena_cmd->add_option("--seed", arena.seed, "RNG seed")->capture_default_str();
  arena_cmd->add_option("--mock", arena.mock, "Scripted judge JSON instead of HTTP");
  arena_cmd->add_option("-o,--out", arena.out, "Report output (JSON)");
  arena_cmd->add_option("--matches", arena.matches, "Match log output (JSON lines)");
  arena_cmd->add_option("--templates", ov.templates, "Prompt template directory");

  MetricsOptions metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Difficulty accuracy, entropy and originality report");
  metrics_cmd->add_option("--truth", metrics.truth, "Reference levels");
  metrics_cmd->add_option("--pred", metrics.predictions, "Estimated levels");
  metrics_cmd->add_option("--samples", metrics.samples, "Sampled encodings (JSON lines)");
  metrics_cmd->add_option("--generated", metrics.generated, "Transcripts or JSON lines with problems");
  metrics_cmd->add_option("--corpus", metrics.corpus, "Reference corpus (JSON lines with problems)");
  metrics_cmd->add_option("-o,--out", metrics.out, "Report output (JSON)");

  DecodeOptions dec;
  auto* decode_cmd = app.add_subcommand("decode", "Describe each dimension of an encoding");
  decode_cmd->add_option("encoding", dec.encoding, "e.g. A1B2C1D1E2F1G1H2")->required();
  decode_cmd->add_flag("--json", dec.json, "Print JSON");
  decode_cmd->add_option("--table", ov.table, "Difficulty description table JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    AppConfig config;
    if (!config_path.empty()) {
      config = load_config(config_path);
    } else if (fs::is_regular_file("impg.toml")) {
      config = load_config("impg.toml");
    } else {
      config = default_config(fs::current_path());
    }
    ov.apply(config);

    if (*fit_cmd) return cmd_fit(config, fit, std::cout);
    if (*sample_cmd) return cmd_sample(config, sample, std::cout, std::cerr);
    if (*gen_cmd) return cmd_generate(config, gen, std::cout, std::cerr);
    if (*arena_cmd) return cmd_arena(config, arena, std::cout);
    if (*metrics_cmd) return cmd_metrics(metrics, std::cout);
    if (*decode_cmd) return cmd_decode(config, dec, std::cout);
  } catch (...) {
    return report_error(std::cerr);
  }
  return kExitFailure;
}
