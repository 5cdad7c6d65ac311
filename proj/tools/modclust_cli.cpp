// Command-line front end: single clustering runs, benchmark experiments,
// the exhaustive oracle and a fuzzy-controller probe.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modclust/modclust.hpp"

namespace {

using namespace modclust;

ModuleGraph load_graph(const std::string& path) {
  const auto text = bench::read_file(path);
  try {
    return parse_mdg(text);
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

fuzzy::FuzzySystem load_fis(const std::optional<std::string>& path) {
  if (!path) return fuzzy::default_system();
  try {
    return fuzzy::load_fis_config(bench::read_file(*path));
  } catch (const fuzzy::ConfigError& e) {
    throw std::runtime_error(*path + ": " + e.what());
  }
}

void print_partition(const ModuleGraph& graph, const ClusterLabels& labels, double value) {
  std::cout << "mq: " << detail::format_fixed(value) << '\n';
  for (std::size_t i = 0; i < graph.size(); ++i) std::cout << graph.modules()[i] << ' ' << labels[i] << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Software module clustering by teaching-learning based search"};
  app.require_subcommand(1);

  std::string mdg_path;
  std::string algorithm = "atlbo";
  std::size_t pop_size = 40;
  std::size_t max_evals = 5000;
  std::uint64_t seed = 0;
  std::optional<std::string> fis_path;
  auto* cluster = app.add_subcommand("cluster", "Run one search and print the best partition");
  cluster->add_option("mdg", mdg_path, "MDG file")->required();
  cluster->add_option("--algorithm", algorithm, "tlbo or atlbo")->check(CLI::IsMember({"tlbo", "atlbo"}));
  cluster->add_option("--pop-size", pop_size, "Population size")->check(CLI::Range(2u, 1u << 20));
  cluster->add_option("--max-evals", max_evals, "Fitness evaluation budget");
  cluster->add_option("--seed", seed, "RNG seed");
  cluster->add_option("--fis", fis_path, "Phase-selection FIS config (atlbo)");

  std::string config_path;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark experiment");
  bench_cmd->add_option("--config", config_path, "Experiment config file")->required();

  std::string oracle_path;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum for graphs of at most 12 modules");
  oracle->add_option("mdg", oracle_path, "MDG file")->required();

  double qm = 0.0, im = 0.0, dm = 0.0;
  std::optional<std::string> eval_fis;
  auto* fuzzy_eval = app.add_subcommand("fuzzy-eval", "Evaluate the phase-selection system once");
  fuzzy_eval->add_option("--fis", eval_fis, "FIS config (shipped default when omitted)");
  fuzzy_eval->add_option("--qm", qm, "Quality measure [0,100]")->required();
  fuzzy_eval->add_option("--im", im, "Intensification measure [0,100]")->required();
  fuzzy_eval->add_option("--dm", dm, "Diversification measure [0,100]")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cluster) {
      const auto graph = load_graph(mdg_path);
      SearchConfig config;
      config.pop_size = pop_size;
      config.max_evals = max_evals;
      config.seed = seed;
      config.algorithm = *parse_algorithm(algorithm);
      if (config.algorithm == Algorithm::atlbo)
        config.fis = std::make_shared<const fuzzy::FuzzySystem>(load_fis(fis_path));
      const auto result = run_search(graph, config);
      std::cout << "algorithm: " << to_string(config.algorithm) << '\n'
                << "seed: " << seed << '\n'
                << "evals: " << result.evals_used << '\n'
                << "iterations: " << result.iterations << '\n';
      print_partition(graph, result.best_labels, result.best_mq);
    } else if (*bench_cmd) {
      const auto config = bench::load_experiment_config(config_path);
      const auto report = bench::run_experiment(config);
      std::cout << bench::summary_table(report, config.algorithms);
      std::cout << "reports written to " << config.output_dir.string() << '\n';
    } else if (*oracle) {
      const auto graph = load_graph(oracle_path);
      const auto best = brute_force_optimum(graph);
      print_partition(graph, best.labels, best.mq);
    } else if (*fuzzy_eval) {
      const auto fis = load_fis(eval_fis);
      const auto selection = fuzzy::infer(fis, qm, im, dm);
      if (selection) {
        std::cout << "selection: " << detail::format_fixed(*selection) << " ("
                  << (*selection < kSelectionThreshold ? "teacher" : "learner") << ")\n";
      } else {
        std::cout << "selection: undefined (teacher)\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
