#include "impg/prompts.hpp"

#include <fstream>
#include <sstream>

#include "impg/error.hpp"

namespace impg {

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const auto close = text.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(text.substr(open));
      break;
    }
    const std::string key(text.substr(open + 1, close - open - 1));
    auto it = values.find(key);
    if (it != values.end()) {
      out.append(it->second);
      pos = close + 1;
    } else {
      out.push_back('{');
      pos = open + 1;
    }
  }
  return out;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& directory) {
  const auto read = [&](const char* name) {
    const auto path = directory / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing prompt template " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  PromptTemplates t;
  t.generator_system = read("generator_system.txt");
  t.generation = read("generation.txt");
  t.refinement = read("refinement.txt");
  t.evaluator_system = read("evaluator_system.txt");
  t.evaluation = read("evaluation.txt");
  t.judge_system = read("judge_system.txt");
  t.judge_pairwise = read("judge_pairwise.txt");
  t.judge_scoring = read("judge_scoring.txt");
  return t;
}

}  // namespace impg
