#pragma once

// Repeated seeded runs over a set of case graphs, summary statistics and
// report files (per-run CSV, summary CSV, markdown table, best-partition JSON).

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "modclust/detail/text.hpp"
#include "modclust/fuzzy.hpp"
#include "modclust/mdg.hpp"
#include "modclust/optimizer.hpp"

namespace modclust::bench {

namespace fs = std::filesystem;

struct SummaryStats {
  double best = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single run
  std::size_t runs = 0;
};

inline SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no runs");
  SummaryStats s;
  s.runs = values.size();
  s.best = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

inline SummaryStats summarize(std::span<const RunResult> results) {
  std::vector<double> values;
  values.reserve(results.size());
  for (const auto& r : results) values.push_back(r.best_mq);
  return summarize(std::span<const double>(values));
}

struct CaseSpec {
  std::string name;
  fs::path mdg;
  std::optional<std::size_t> pop_size;
  std::optional<std::size_t> max_evals;
  std::optional<fs::path> fis;
};

struct ExperimentConfig {
  std::vector<CaseSpec> cases;
  std::vector<Algorithm> algorithms{Algorithm::tlbo, Algorithm::atlbo};
  std::size_t runs = 20;
  std::uint64_t base_seed = 0;
  SearchConfig search;
  std::optional<fs::path> fis_path;
  fs::path output_dir = "results";
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  void validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (cases.empty()) throw std::invalid_argument("experiment has no cases");
    if (algorithms.empty()) throw std::invalid_argument("experiment has no algorithms");
    for (std::size_t i = 0; i < cases.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (cases[i].name == cases[j].name) throw std::invalid_argument("duplicate case '" + cases[i].name + "'");
  }
};

class ExperimentConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the experiment config format. Global `key = value` lines come first;
/// each `[case NAME]` section needs `mdg = PATH` and may override
/// `pop_size`, `max_evals` and `fis`. Relative paths resolve against `base_dir`.
///
/// Global keys: runs, base_seed, algorithms (space separated), pop_size,
/// max_evals, fis, output_dir, threads.
inline ExperimentConfig parse_experiment_config(std::string_view text, const fs::path& base_dir = {}) {
  ExperimentConfig cfg;
  CaseSpec* current = nullptr;
  auto resolve = [&](std::string_view p) {
    fs::path path{std::string(p)};
    return path.is_relative() ? base_dir / path : path;
  };
  for (const auto& line : detail::read_config_lines(text)) {
    const std::string where = "line " + std::to_string(line.number) + ": ";
    if (line.kind == detail::ConfigLine::Kind::section) {
      if (line.section.size() != 2 || line.section[0] != "case")
        throw ExperimentConfigError(where + "expected '[case NAME]'");
      cfg.cases.push_back({std::string(line.section[1]), {}, {}, {}, {}});
      current = &cfg.cases.back();
      continue;
    }
    if (line.kind != detail::ConfigLine::Kind::assignment) throw ExperimentConfigError(where + "expected 'key = value'");
    const auto key = line.key;
    const auto value = line.value;
    auto as_size = [&]() {
      auto v = detail::parse_int<std::size_t>(value);
      if (!v) throw ExperimentConfigError(where + "'" + std::string(key) + "' needs a non-negative integer");
      return *v;
    };
    if (current) {
      if (key == "mdg") current->mdg = resolve(value);
      else if (key == "pop_size") current->pop_size = as_size();
      else if (key == "max_evals") current->max_evals = as_size();
      else if (key == "fis") current->fis = resolve(value);
      else throw ExperimentConfigError(where + "unknown case key '" + std::string(key) + "'");
      continue;
    }
    if (key == "runs") {
      cfg.runs = as_size();
    } else if (key == "base_seed") {
      auto v = detail::parse_int<std::uint64_t>(value);
      if (!v) throw ExperimentConfigError(where + "base_seed needs a non-negative integer");
      cfg.base_seed = *v;
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (auto tok : detail::split_ws(value)) {
        auto alg = parse_algorithm(tok);
        if (!alg) throw ExperimentConfigError(where + "unknown algorithm '" + std::string(tok) + "'");
        cfg.algorithms.push_back(*alg);
      }
    } else if (key == "pop_size") {
      cfg.search.pop_size = as_size();
    } else if (key == "max_evals") {
      cfg.search.max_evals = as_size();
    } else if (key == "fis") {
      cfg.fis_path = resolve(value);
    } else if (key == "output_dir") {
      cfg.output_dir = resolve(value);
    } else if (key == "threads") {
      cfg.threads = as_size();
    } else {
      throw ExperimentConfigError(where + "unknown key '" + std::string(key) + "'");
    }
  }
  for (const auto& c : cfg.cases)
    if (c.mdg.empty()) throw ExperimentConfigError("case '" + c.name + "' has no mdg path");
  return cfg;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExperimentConfig load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_file(path), path.parent_path());
}

struct RunRecord {
  std::string case_name;
  Algorithm algorithm;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  RunResult result;
};

struct SummaryRow {
  std::string case_name;
  Algorithm algorithm;
  SummaryStats stats;
};

struct BestPartition {
  std::string case_name;
  Algorithm algorithm;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double mq = 0.0;
  std::vector<std::string> modules;
  ClusterLabels labels;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;  // ordered by (case, algorithm, run)
  std::vector<SummaryRow> summary;
  std::vector<BestPartition> best;  // one per case
};

namespace internal {

struct PreparedCase {
  const CaseSpec* spec;
  ModuleGraph graph;
  SearchConfig search;
};

inline std::string labels_to_string(const ClusterLabels& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(labels[i]);
  }
  return out;
}

}  // namespace internal

inline std::string runs_csv(const ExperimentReport& report) {
  std::string out = "case,algorithm,run,seed,best_mq,evals_used,iterations,wall_ms\n";
  for (const auto& r : report.runs) {
    out += r.case_name + ',' + std::string(to_string(r.algorithm)) + ',' + std::to_string(r.run) + ',' +
           std::to_string(r.seed) + ',' + detail::format_fixed(r.result.best_mq) + ',' +
           std::to_string(r.result.evals_used) + ',' + std::to_string(r.result.iterations) + ',' +
           detail::format_fixed(r.result.wall_time.count(), 3) + '\n';
  }
  return out;
}

/// Canonical partition of every run, keyed like runs.csv.
inline std::string partitions_csv(const ExperimentReport& report) {
  std::string out = "case,algorithm,run,labels\n";
  for (const auto& r : report.runs)
    out += r.case_name + ',' + std::string(to_string(r.algorithm)) + ',' + std::to_string(r.run) + ',' +
           internal::labels_to_string(r.result.best_labels) + '\n';
  return out;
}

inline std::string summary_csv(const ExperimentReport& report) {
  std::string out = "case,algorithm,best,std,mean\n";
  for (const auto& s : report.summary)
    out += s.case_name + ',' + std::string(to_string(s.algorithm)) + ',' + detail::format_fixed(s.stats.best) +
           ',' + detail::format_fixed(s.stats.std) + ',' + detail::format_fixed(s.stats.mean) + '\n';
  return out;
}

/// Markdown table: one row per case, "best ± std" and mean per algorithm.
inline std::string summary_table(const ExperimentReport& report, std::span<const Algorithm> algorithms) {
  std::string out = "| Case |";
  std::string rule = "|---|";
  for (auto a : algorithms) {
    std::string name(to_string(a));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    out += ' ' + name + " Best | " + name + " Mean |";
    rule += "---|---|";
  }
  out += '\n' + rule + '\n';
  std::vector<std::string> case_order;
  for (const auto& s : report.summary)
    if (std::find(case_order.begin(), case_order.end(), s.case_name) == case_order.end())
      case_order.push_back(s.case_name);
  for (const auto& c : case_order) {
    out += "| " + c + " |";
    for (auto a : algorithms) {
      auto it = std::find_if(report.summary.begin(), report.summary.end(),
                             [&](const SummaryRow& s) { return s.case_name == c && s.algorithm == a; });
      if (it == report.summary.end()) {
        out += " - | - |";
        continue;
      }
      out += ' ' + detail::format_fixed(it->stats.best, 3) + "±" +
             detail::format_fixed(it->stats.std, 3) + " | " + detail::format_fixed(it->stats.mean, 3) +
             " |";
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json best_partition_json(const BestPartition& b) {
  nlohmann::ordered_json clusters = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < b.modules.size(); ++i) clusters[b.modules[i]] = b.labels[i];
  nlohmann::ordered_json j;
  j["case"] = b.case_name;
  j["algorithm"] = std::string(to_string(b.algorithm));
  j["run"] = b.run;
  j["seed"] = b.seed;
  j["mq"] = b.mq;
  j["clusters"] = std::move(clusters);
  return j;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline void write_report(const ExperimentReport& report, const ExperimentConfig& config) {
  fs::create_directories(config.output_dir);
  write_text(config.output_dir / "runs.csv", runs_csv(report));
  write_text(config.output_dir / "partitions.csv", partitions_csv(report));
  write_text(config.output_dir / "summary.csv", summary_csv(report));
  write_text(config.output_dir / "summary.md", summary_table(report, config.algorithms));
  for (const auto& b : report.best)
    write_text(config.output_dir / ("best_" + b.case_name + ".json"), best_partition_json(b).dump(2) + "\n");
}

/// Runs every (case, algorithm, run) combination with seed base_seed + run.
/// All inputs are loaded and validated before the first run starts. Runs
/// execute on a worker pool; results are assembled in (case, algorithm, run)
/// order, so the report does not depend on scheduling.
inline ExperimentReport run_experiment(const ExperimentConfig& config, bool write_files = true) {
  config.validate();

  std::shared_ptr<const fuzzy::FuzzySystem> default_fis;
  const bool need_fis = std::find(config.algorithms.begin(), config.algorithms.end(), Algorithm::atlbo) !=
                        config.algorithms.end();
  auto load_fis = [](const fs::path& p) {
    try {
      return std::make_shared<const fuzzy::FuzzySystem>(fuzzy::load_fis_config(read_file(p)));
    } catch (const fuzzy::ConfigError& e) {
      throw std::runtime_error(p.string() + ": " + e.what());
    }
  };
  if (need_fis)
    default_fis = config.fis_path ? load_fis(*config.fis_path)
                                  : std::make_shared<const fuzzy::FuzzySystem>(fuzzy::default_system());

  std::vector<internal::PreparedCase> cases;
  for (const auto& spec : config.cases) {
    internal::PreparedCase pc{&spec, {}, config.search};
    try {
      pc.graph = parse_mdg(read_file(spec.mdg));
    } catch (const ParseError& e) {
      throw std::runtime_error(spec.mdg.string() + ": " + e.what());
    }
    if (pc.graph.size() == 0) throw std::runtime_error(spec.mdg.string() + ": graph has no modules");
    if (spec.pop_size) pc.search.pop_size = *spec.pop_size;
    if (spec.max_evals) pc.search.max_evals = *spec.max_evals;
    pc.search.fis = default_fis;
    if (need_fis && spec.fis) pc.search.fis = load_fis(*spec.fis);
    pc.search.validate();
    cases.push_back(std::move(pc));
  }

  ExperimentReport report;
  for (const auto& pc : cases)
    for (auto alg : config.algorithms)
      for (std::size_t r = 0; r < config.runs; ++r)
        report.runs.push_back({pc.spec->name, alg, r, config.base_seed + r, {}});

  const std::size_t per_case = config.algorithms.size() * config.runs;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t k = next++; k < report.runs.size(); k = next++) {
      auto& rec = report.runs[k];
      SearchConfig sc = cases[k / per_case].search;
      sc.algorithm = rec.algorithm;
      sc.seed = rec.seed;
      try {
        rec.result = run_search(cases[k / per_case].graph, sc);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, report.runs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t c = 0; c < cases.size(); ++c) {
    std::optional<BestPartition> best;
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      const std::size_t offset = c * per_case + a * config.runs;
      std::vector<double> values;
      for (std::size_t r = 0; r < config.runs; ++r) {
        const auto& rec = report.runs[offset + r];
        values.push_back(rec.result.best_mq);
        if (!best || rec.result.best_mq > best->mq)
          best = BestPartition{rec.case_name, rec.algorithm, rec.run, rec.seed, rec.result.best_mq,
                               cases[c].graph.modules(), rec.result.best_labels};
      }
      report.summary.push_back({cases[c].spec->name, config.algorithms[a], summarize(std::span<const double>(values))});
    }
    report.best.push_back(std::move(*best));
  }

  if (write_files) write_report(report, config);
  return report;
}

}  // namespace modclust::bench
