#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace impg {

// Replaces every {name} whose name is a key of `values`. Substituted text is
// not rescanned, and braces that do not name a key are kept verbatim.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

// Role prompt templates, one text file each.
struct PromptTemplates {
  std::string generator_system;   // generator_system.txt
  std::string generation;         // generation.txt: {requirement}
  std::string refinement;         // refinement.txt: {requirement} {problem} {solution} {suggestions}
  std::string evaluator_system;   // evaluator_system.txt
  std::string evaluation;         // evaluation.txt: {requirement} {problem} {solution}
  std::string judge_system;       // judge_system.txt
  std::string judge_pairwise;     // judge_pairwise.txt: {requirement} {dimension} {first} {second}
  std::string judge_scoring;      // judge_scoring.txt: {requirement} {problem} {solution}

  // Throws ConfigError naming the first missing file.
  static PromptTemplates load(const std::filesystem::path& directory);
};

}  // namespace impg
