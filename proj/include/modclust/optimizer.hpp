#pragma once

// Teaching-learning based search over clusterings, plus the fuzzy-adaptive
// variant that picks one phase per learner.
//
// A solution is a real vector in [1, N]^D (N = D) that decodes to cluster
// labels by rounding. Every fitness evaluation, including the initial
// population, is charged to a fixed budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modclust/fuzzy.hpp"
#include "modclust/mdg.hpp"
#include "modclust/rng.hpp"

namespace modclust {

using Position = std::vector<double>;

enum class Phase : std::uint8_t { teacher, learner };
enum class Algorithm : std::uint8_t { tlbo, atlbo };

inline std::string_view to_string(Phase p) noexcept { return p == Phase::teacher ? "teacher" : "learner"; }
inline std::string_view to_string(Algorithm a) noexcept { return a == Algorithm::tlbo ? "tlbo" : "atlbo"; }

inline std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept {
  if (s == "tlbo") return Algorithm::tlbo;
  if (s == "atlbo") return Algorithm::atlbo;
  return std::nullopt;
}

struct SearchConfig {
  std::size_t pop_size = 40;
  std::size_t max_evals = 5000;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::atlbo;
  /// Phase-selection system for atlbo; the shipped default when null.
  std::shared_ptr<const fuzzy::FuzzySystem> fis;

  void validate() const {
    if (pop_size < 2) throw std::invalid_argument("pop_size must be at least 2");
    if (max_evals < pop_size) throw std::invalid_argument("max_evals must be at least pop_size");
  }
};

struct RunResult {
  ClusterLabels best_labels;  // canonical
  double best_mq = 0.0;
  std::size_t evals_used = 0;
  std::size_t iterations = 0;
  /// One entry per evaluation after initialisation, in execution order.
  std::vector<Phase> phase_trace;
  std::chrono::duration<double, std::milli> wall_time{0};
};

/// Fitness evaluation counter. Never lets the count exceed the limit.
class EvalBudget {
 public:
  explicit EvalBudget(std::size_t limit) : limit_(limit) {}

  std::size_t limit() const noexcept { return limit_; }
  std::size_t used() const noexcept { return used_; }
  std::size_t remaining() const noexcept { return limit_ - used_; }
  bool exhausted() const noexcept { return used_ >= limit_; }

  bool try_consume(std::size_t n = 1) noexcept {
    if (remaining() < n) return false;
    used_ += n;
    return true;
  }

 private:
  std::size_t limit_;
  std::size_t used_ = 0;
};

/// Round half up, then clamp into [1, max_label].
inline ClusterLabels decode(std::span<const double> position, int max_label) {
  ClusterLabels labels;
  labels.reserve(position.size());
  for (double x : position) {
    const double rounded = std::floor(x + 0.5);
    labels.push_back(static_cast<int>(std::clamp(rounded, 1.0, static_cast<double>(max_label))));
  }
  return labels;
}

inline ClusterLabels decode(std::span<const double> position) {
  return decode(position, static_cast<int>(position.size()));
}

struct Individual {
  Position position;
  ClusterLabels labels;
  ClusterLabels canonical;
  double fitness = 0.0;
};

/// Decodes and scores a position. Does not touch any budget.
inline Individual evaluate(const ModuleGraph& graph, Position position) {
  Individual ind;
  ind.labels = decode(position, static_cast<int>(graph.size()));
  ind.canonical = canonicalize(ind.labels);
  ind.fitness = mq(graph, ind.labels);
  ind.position = std::move(position);
  return ind;
}

/// Individuals plus the derived teacher (best, lowest index on ties) and
/// mean position, kept in sync on every replacement.
class Population {
 public:
  Population(std::vector<Individual> individuals, int max_label)
      : individuals_(std::move(individuals)), max_label_(max_label) {
    if (individuals_.empty()) throw std::invalid_argument("population must not be empty");
    refresh();
  }

  std::size_t size() const noexcept { return individuals_.size(); }
  std::size_t dimension() const noexcept { return individuals_.front().position.size(); }
  int max_label() const noexcept { return max_label_; }
  const Individual& operator[](std::size_t i) const { return individuals_.at(i); }
  const std::vector<Individual>& individuals() const noexcept { return individuals_; }

  std::size_t best_index() const noexcept { return best_; }
  std::size_t worst_index() const noexcept { return worst_; }
  const Individual& best() const noexcept { return individuals_[best_]; }
  const Position& mean() const noexcept { return mean_; }
  double max_fitness() const noexcept { return individuals_[best_].fitness; }
  double min_fitness() const noexcept { return individuals_[worst_].fitness; }

  void replace(std::size_t i, Individual ind) {
    individuals_.at(i) = std::move(ind);
    refresh();
  }

 private:
  void refresh() {
    best_ = worst_ = 0;
    for (std::size_t i = 1; i < individuals_.size(); ++i) {
      if (individuals_[i].fitness > individuals_[best_].fitness) best_ = i;
      if (individuals_[i].fitness < individuals_[worst_].fitness) worst_ = i;
    }
    const std::size_t dim = individuals_.front().position.size();
    mean_.assign(dim, 0.0);
    for (const auto& ind : individuals_)
      for (std::size_t d = 0; d < dim; ++d) mean_[d] += ind.position[d];
    for (double& m : mean_) m /= static_cast<double>(individuals_.size());
  }

  std::vector<Individual> individuals_;
  int max_label_;
  std::size_t best_ = 0;
  std::size_t worst_ = 0;
  Position mean_;
};

/// Uniform random positions in [1, N]^D; charges pop_size evaluations.
template <UniformSource R>
Population initialize_population(const ModuleGraph& graph, const SearchConfig& config, EvalBudget& budget, R& rng) {
  config.validate();
  if (graph.size() == 0) throw std::invalid_argument("graph has no modules");
  if (!budget.try_consume(config.pop_size))
    throw std::invalid_argument("evaluation budget smaller than population size");
  const double upper = static_cast<double>(graph.size());
  std::vector<Individual> individuals;
  individuals.reserve(config.pop_size);
  for (std::size_t p = 0; p < config.pop_size; ++p) {
    Position pos(graph.size());
    for (double& x : pos) x = 1.0 + rng.uniform01() * (upper - 1.0);
    individuals.push_back(evaluate(graph, std::move(pos)));
  }
  return Population(std::move(individuals), static_cast<int>(graph.size()));
}

inline void clamp_position(Position& pos, int max_label) {
  for (double& x : pos) x = std::clamp(x, 1.0, static_cast<double>(max_label));
}

/// Teacher move: x + r * (teacher - T_F * mean), T_F in {1, 2} drawn once
/// per call, r drawn per dimension.
template <UniformSource R>
Position teacher_phase_update(const Individual& learner, std::span<const double> teacher,
                              std::span<const double> mean, int max_label, R& rng) {
  const std::size_t dim = learner.position.size();
  if (teacher.size() != dim || mean.size() != dim) throw std::invalid_argument("teacher phase: dimension mismatch");
  const double teaching_factor = static_cast<double>(1 + rng.below(2));
  Position next(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double r = rng.uniform01();
    next[d] = learner.position[d] + r * (teacher[d] - teaching_factor * mean[d]);
  }
  clamp_position(next, max_label);
  return next;
}

/// Peer move: away from a peer that is not better, toward a peer that is.
template <UniformSource R>
Position learner_phase_update(const Individual& learner, const Individual& peer, int max_label, R& rng) {
  if (&learner == &peer) throw std::invalid_argument("learner phase needs a distinct peer");
  const std::size_t dim = learner.position.size();
  if (peer.position.size() != dim) throw std::invalid_argument("learner phase: dimension mismatch");
  const bool peer_better = peer.fitness > learner.fitness;
  Position next(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double r = rng.uniform01();
    const double diff = peer_better ? peer.position[d] - learner.position[d] : learner.position[d] - peer.position[d];
    next[d] = learner.position[d] + r * diff;
  }
  clamp_position(next, max_label);
  return next;
}

template <UniformSource R>
std::size_t draw_peer(std::size_t self, std::size_t pop_size, R& rng) {
  std::size_t j = rng.below(pop_size - 1);
  return j >= self ? j + 1 : j;
}

enum class AcceptOutcome : std::uint8_t { accepted, rejected, budget_exhausted };

/// Evaluates a proposal and keeps it only on strict improvement.
inline AcceptOutcome greedy_accept(Population& pop, std::size_t index, Position proposal, const ModuleGraph& graph,
                                   EvalBudget& budget) {
  if (!budget.try_consume()) return AcceptOutcome::budget_exhausted;
  Individual candidate = evaluate(graph, std::move(proposal));
  if (candidate.fitness > pop[index].fitness) {
    pop.replace(index, std::move(candidate));
    return AcceptOutcome::accepted;
  }
  return AcceptOutcome::rejected;
}

// --- phase-selection measures, all on a [0, 100] scale ---

/// Relative fitness of individual `index` between population min and max;
/// 100 when the population is uniform.
inline double quality_measure(const Population& pop, std::size_t index) {
  const double lo = pop.min_fitness();
  const double hi = pop.max_fitness();
  if (!(hi > lo)) return 100.0;
  return std::clamp(100.0 * ((pop[index].fitness - lo) / (hi - lo)), 0.0, 100.0);
}

inline std::size_t hamming(const ClusterLabels& a, const ClusterLabels& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

/// Share of positions where the canonical partitions of `best` and `current` differ.
inline double intensification_measure(const Individual& best, const Individual& current) {
  const std::size_t dim = current.canonical.size();
  if (dim == 0) return 0.0;
  return 100.0 * static_cast<double>(hamming(best.canonical, current.canonical)) / static_cast<double>(dim);
}

/// Mean normalised Hamming distance from `index` to every other individual.
inline double diversification_measure(const Population& pop, std::size_t index) {
  if (pop.size() < 2) throw std::invalid_argument("diversification needs at least two individuals");
  const auto& self = pop[index];
  const std::size_t dim = self.canonical.size();
  if (dim == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < pop.size(); ++j) {
    if (j == index) continue;
    sum += static_cast<double>(hamming(pop[j].canonical, self.canonical)) / static_cast<double>(dim);
  }
  return 100.0 * sum / static_cast<double>(pop.size() - 1);
}

struct Measures {
  double quality = 0.0;
  double intensification = 0.0;
  double diversification = 0.0;
};

inline Measures compute_measures(const Population& pop, std::size_t index) {
  return {quality_measure(pop, index), intensification_measure(pop.best(), pop[index]),
          diversification_measure(pop, index)};
}

// --- phase selection strategies ---

/// Chooses the phase for one learner. A selector may also define
/// `feedback(Phase, AcceptOutcome)` to learn from outcomes.
template <typename S>
concept PhaseSelector = requires(S& s, const Population& pop, std::size_t i) {
  { s.select(pop, i) } -> std::same_as<Phase>;
};

inline constexpr double kSelectionThreshold = 50.0;

struct NoMeasureObserver {
  void operator()(const Population&, std::size_t, const Measures&, std::optional<double>) const noexcept {}
};

/// Fuzzy controller: selection < 50 (or undefined) runs the teacher phase,
/// otherwise the learner phase. `Observer` sees every measure triple.
template <typename Observer = NoMeasureObserver>
class FuzzyPhaseSelector {
 public:
  explicit FuzzyPhaseSelector(const fuzzy::FuzzySystem& fis, Observer observer = {})
      : fis_(&fis), observer_(std::move(observer)) {
    for (auto name : {fuzzy::kQualityInput, fuzzy::kIntensificationInput, fuzzy::kDiversificationInput})
      if (!fis.find_input(name))
        throw std::invalid_argument("phase-selection system lacks input '" + std::string(name) + "'");
  }

  Phase select(const Population& pop, std::size_t index) {
    const Measures m = compute_measures(pop, index);
    const auto selection = fuzzy::infer(*fis_, m.quality, m.intensification, m.diversification);
    observer_(pop, index, m, selection);
    if (!selection || *selection < kSelectionThreshold) return Phase::teacher;
    return Phase::learner;
  }

  const Observer& observer() const noexcept { return observer_; }

 private:
  const fuzzy::FuzzySystem* fis_;
  Observer observer_;
};

namespace detail {

template <UniformSource R>
AcceptOutcome run_phase(Phase phase, Population& pop, std::size_t i, const ModuleGraph& graph, EvalBudget& budget,
                        R& rng) {
  if (budget.exhausted()) return AcceptOutcome::budget_exhausted;
  Position proposal;
  if (phase == Phase::teacher) {
    proposal = teacher_phase_update(pop[i], pop.best().position, pop.mean(), pop.max_label(), rng);
  } else {
    const std::size_t j = draw_peer(i, pop.size(), rng);
    proposal = learner_phase_update(pop[i], pop[j], pop.max_label(), rng);
  }
  return greedy_accept(pop, i, std::move(proposal), graph, budget);
}

inline void finish(RunResult& result, const Population& pop, const EvalBudget& budget,
                   std::chrono::steady_clock::time_point start) {
  result.best_labels = pop.best().canonical;
  result.best_mq = pop.best().fitness;
  result.evals_used = budget.used();
  result.wall_time = std::chrono::steady_clock::now() - start;
}

}  // namespace detail

/// Classic schedule: every learner runs the teacher phase then the learner
/// phase, each with its own evaluation. Stops the moment the budget runs out.
template <UniformSource R>
RunResult run_tlbo(const ModuleGraph& graph, const SearchConfig& config, R& rng) {
  const auto start = std::chrono::steady_clock::now();
  EvalBudget budget(config.max_evals);
  Population pop = initialize_population(graph, config, budget, rng);
  RunResult result;
  result.phase_trace.reserve(budget.remaining());
  while (!budget.exhausted()) {
    ++result.iterations;
    for (std::size_t i = 0; i < pop.size() && !budget.exhausted(); ++i) {
      for (Phase phase : {Phase::teacher, Phase::learner}) {
        if (detail::run_phase(phase, pop, i, graph, budget, rng) == AcceptOutcome::budget_exhausted) break;
        result.phase_trace.push_back(phase);
      }
    }
  }
  detail::finish(result, pop, budget, start);
  return result;
}

/// Adaptive schedule: one phase per learner, chosen by `selector`.
template <PhaseSelector Selector, UniformSource R>
RunResult run_adaptive(const ModuleGraph& graph, const SearchConfig& config, Selector& selector, R& rng) {
  const auto start = std::chrono::steady_clock::now();
  EvalBudget budget(config.max_evals);
  Population pop = initialize_population(graph, config, budget, rng);
  RunResult result;
  result.phase_trace.reserve(budget.remaining());
  while (!budget.exhausted()) {
    ++result.iterations;
    for (std::size_t i = 0; i < pop.size() && !budget.exhausted(); ++i) {
      const Phase phase = selector.select(pop, i);
      const auto outcome = detail::run_phase(phase, pop, i, graph, budget, rng);
      if (outcome == AcceptOutcome::budget_exhausted) break;
      if constexpr (requires { selector.feedback(phase, outcome); }) selector.feedback(phase, outcome);
      result.phase_trace.push_back(phase);
    }
  }
  detail::finish(result, pop, budget, start);
  return result;
}

template <UniformSource R, typename Observer = NoMeasureObserver>
RunResult run_atlbo(const ModuleGraph& graph, const SearchConfig& config, const fuzzy::FuzzySystem& fis, R& rng,
                    Observer observer = {}) {
  FuzzyPhaseSelector<Observer> selector(fis, std::move(observer));
  return run_adaptive(graph, config, selector, rng);
}

/// Single seeded run of the configured algorithm.
inline RunResult run_search(const ModuleGraph& graph, const SearchConfig& config) {
  config.validate();
  Rng rng(config.seed);
  if (config.algorithm == Algorithm::tlbo) return run_tlbo(graph, config, rng);
  if (config.fis) return run_atlbo(graph, config, *config.fis, rng);
  const auto fis = fuzzy::default_system();
  return run_atlbo(graph, config, fis, rng);
}

}  // namespace modclust
