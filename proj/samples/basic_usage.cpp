// Clusters a small dependency graph with both search variants and compares
// against the exhaustive optimum.

#include <iostream>

#include "modclust/modclust.hpp"

int main() {
  using namespace modclust;

  const auto graph = parse_mdg(R"(
# two tightly knit groups joined by one dependency
Parser Lexer
Lexer Parser
Parser Ast
Ast Parser
Renderer Canvas
Canvas Renderer
Renderer Theme
Theme Renderer
Ast Renderer
)");

  for (auto algorithm : {Algorithm::tlbo, Algorithm::atlbo}) {
    SearchConfig config;
    config.algorithm = algorithm;
    config.seed = 1;
    const auto result = run_search(graph, config);
    std::cout << to_string(algorithm) << ": mq " << result.best_mq << " after " << result.evals_used
              << " evaluations\n";
    for (std::size_t i = 0; i < graph.size(); ++i)
      std::cout << "  " << graph.modules()[i] << " -> " << result.best_labels[i] << '\n';
  }

  const auto optimum = brute_force_optimum(graph);
  std::cout << "optimum: mq " << optimum.mq << '\n';
}
