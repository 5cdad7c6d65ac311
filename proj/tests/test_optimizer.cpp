#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "modclust/optimizer.hpp"
#include "oracles.hpp"

using namespace modclust;

namespace {

/// Replays fixed draws; `below` answers come from their own queue.
struct ScriptedRng {
  std::deque<double> uniforms;
  std::deque<std::size_t> indices;
  double fallback = 0.0;

  double uniform01() {
    if (uniforms.empty()) return fallback;
    const double v = uniforms.front();
    uniforms.pop_front();
    return v;
  }
  std::size_t below(std::size_t n) {
    if (indices.empty()) return 0;
    const std::size_t v = indices.front();
    indices.pop_front();
    return v % n;
  }
};

Individual with_position(Position p, double fitness = 0.0) {
  Individual ind;
  ind.position = std::move(p);
  ind.labels = decode(ind.position);
  ind.canonical = canonicalize(ind.labels);
  ind.fitness = fitness;
  return ind;
}

Individual with_labels(ClusterLabels labels, double fitness = 0.0) {
  Position p(labels.begin(), labels.end());
  return with_position(std::move(p), fitness);
}

ModuleGraph two_way_pair() { return parse_mdg("A B\nB A\n"); }
ModuleGraph chain() { return parse_mdg("A B\nB A\nB C\nC B\n"); }

struct ConstantSelector {
  Phase phase;
  Phase select(const Population&, std::size_t) const { return phase; }
};

}  // namespace

TEST(Rng, ReproducibleAndInRange) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    EXPECT_EQ(u, b.uniform01());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const auto k = a.below(7);
    EXPECT_EQ(k, b.below(7));
    EXPECT_LT(k, 7u);
  }
  // std::mt19937_64 is pinned by the standard: 10000th output for the default seed.
  std::mt19937_64 ref;
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ull);
  Rng seeded(5489);
  std::mt19937_64 ref2(5489);
  EXPECT_EQ(seeded.next(), ref2());
}

TEST(Decode, Examples) {
  EXPECT_EQ(decode(Position{1.2, 1.6, 3.0}), (ClusterLabels{1, 2, 3}));
  EXPECT_EQ(decode(Position{1.5, 2.5}), (ClusterLabels{2, 2}));
  EXPECT_EQ(decode(Position{1.0, 1.0, 1.0}), (ClusterLabels{1, 1, 1}));
  EXPECT_EQ(decode(Position{0.2, 9.9}, 3), (ClusterLabels{1, 3}));
}

TEST(InitializePopulation, SizeBudgetAndBounds) {
  ModuleGraph g;
  for (int i = 0; i < 6; ++i) g.add_module("M" + std::to_string(i));
  g.add_edge(0, 1, 1.0);
  SearchConfig cfg;
  EvalBudget budget(cfg.max_evals);
  Rng rng(1);
  const auto pop = initialize_population(g, cfg, budget, rng);
  EXPECT_EQ(pop.size(), 40u);
  EXPECT_EQ(budget.used(), 40u);
  for (const auto& ind : pop.individuals()) {
    ASSERT_EQ(ind.position.size(), 6u);
    for (double x : ind.position) {
      EXPECT_GE(x, 1.0);
      EXPECT_LE(x, 6.0);
    }
    EXPECT_EQ(ind.labels, decode(ind.position));
    EXPECT_EQ(ind.fitness, mq(g, ind.labels));
  }
}

TEST(InitializePopulation, Deterministic) {
  const auto g = chain();
  SearchConfig cfg;
  EvalBudget b1(cfg.max_evals), b2(cfg.max_evals);
  Rng r1(77), r2(77);
  const auto p1 = initialize_population(g, cfg, b1, r1);
  const auto p2 = initialize_population(g, cfg, b2, r2);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1[i].position, p2[i].position);
}

TEST(InitializePopulation, SingleModule) {
  const auto g = parse_mdg("Only\n");
  SearchConfig cfg;
  EvalBudget budget(cfg.max_evals);
  Rng rng(3);
  const auto pop = initialize_population(g, cfg, budget, rng);
  for (const auto& ind : pop.individuals()) {
    EXPECT_EQ(ind.position, Position{1.0});
    EXPECT_EQ(ind.fitness, pop[0].fitness);
  }
}

TEST(InitializePopulation, BudgetTooSmall) {
  SearchConfig cfg;
  cfg.pop_size = 10;
  EvalBudget budget(5);
  Rng rng(0);
  EXPECT_THROW(initialize_population(chain(), cfg, budget, rng), std::invalid_argument);
  cfg.max_evals = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.max_evals = 100;
  cfg.pop_size = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Population, BestTiesToLowestIndexAndMean) {
  Population pop({with_position({1, 2}, 0.5), with_position({3, 2}, 0.9), with_position({2, 2}, 0.9)}, 3);
  EXPECT_EQ(pop.best_index(), 1u);
  EXPECT_EQ(pop.worst_index(), 0u);
  EXPECT_EQ(pop.mean(), (Position{2, 2}));
  pop.replace(0, with_position({1, 1}, 1.0));
  EXPECT_EQ(pop.best_index(), 0u);
  EXPECT_EQ(pop.mean(), (Position{2, 5.0 / 3.0}));
}

TEST(TeacherPhase, ZeroStepLeavesPositionUnchanged) {
  ScriptedRng rng;  // r = 0 everywhere
  const auto x = with_position({2, 3});
  EXPECT_EQ(teacher_phase_update(x, Position{4, 1}, Position{3, 2}, 4, rng), (Position{2, 3}));
}

TEST(TeacherPhase, WorkedExample) {
  ScriptedRng rng{{0.5, 0.5}, {0}};  // T_F = 1
  const auto x = with_position({2, 3});
  EXPECT_EQ(teacher_phase_update(x, Position{4, 1}, Position{3, 2}, 4, rng), (Position{2.5, 2.5}));
}

TEST(TeacherPhase, TeachingFactorTwoCancels) {
  ScriptedRng rng{{0.9, 0.3}, {1}};  // T_F = 2
  const auto x = with_position({2, 3});
  EXPECT_EQ(teacher_phase_update(x, Position{4, 4}, Position{2, 2}, 4, rng), (Position{2, 3}));
}

TEST(TeacherPhase, ClampsToBounds) {
  ScriptedRng rng{{0.99, 0.99}, {1}};
  const auto x = with_position({1.5, 3.5});
  const auto next = teacher_phase_update(x, Position{1, 4}, Position{4, 1}, 4, rng);
  EXPECT_EQ(next, (Position{1, 4}));
}

TEST(LearnerPhase, ZeroStep) {
  ScriptedRng rng;
  const auto a = with_position({1, 1}, 0.2), b = with_position({3, 3}, 0.8);
  EXPECT_EQ(learner_phase_update(a, b, 3, rng), (Position{1, 1}));
}

TEST(LearnerPhase, BetterLearnerMovesAwayAndClamps) {
  ScriptedRng rng{{0.5, 0.5}, {}};
  const auto a = with_position({1, 1}, 0.8), b = with_position({3, 3}, 0.2);
  EXPECT_EQ(learner_phase_update(a, b, 3, rng), (Position{1, 1}));
}

TEST(LearnerPhase, WorseLearnerMovesToward) {
  ScriptedRng rng{{0.5, 0.5}, {}};
  const auto a = with_position({1, 1}, 0.2), b = with_position({3, 3}, 0.8);
  EXPECT_EQ(learner_phase_update(a, b, 3, rng), (Position{2, 2}));
}

TEST(LearnerPhase, TieCountsAsPeerNotBetter) {
  ScriptedRng rng{{0.5, 0.5}, {}};
  const auto a = with_position({2, 2}, 0.5), b = with_position({3, 1}, 0.5);
  EXPECT_EQ(learner_phase_update(a, b, 3, rng), (Position{1.5, 2.5}));
}

TEST(LearnerPhase, SamePeerIsAnError) {
  ScriptedRng rng;
  const auto a = with_position({1, 1});
  EXPECT_THROW(learner_phase_update(a, a, 3, rng), std::invalid_argument);
}

TEST(LearnerPhase, PeerNeverSelf) {
  Rng rng(9);
  for (std::size_t self = 0; self < 5; ++self)
    for (int k = 0; k < 200; ++k) {
      const auto j = draw_peer(self, 5, rng);
      EXPECT_NE(j, self);
      EXPECT_LT(j, 5u);
    }
}

TEST(GreedyAccept, StrictImprovementOnly) {
  const auto g = chain();
  Population pop({evaluate(g, {1, 2, 3}), evaluate(g, {1, 1, 2})}, 3);
  EvalBudget budget(10);
  EXPECT_EQ(pop.best_index(), 1u);

  EXPECT_EQ(greedy_accept(pop, 0, {1, 1, 1}, g, budget), AcceptOutcome::accepted);
  EXPECT_EQ(budget.used(), 1u);
  EXPECT_EQ(pop[0].fitness, 1.0);
  EXPECT_EQ(pop.best_index(), 0u);
  EXPECT_EQ(pop.mean(), (Position{1, 1, 1.5}));

  // Same partition, relabelled: equal MQ is rejected.
  EXPECT_EQ(greedy_accept(pop, 1, {2, 2, 1}, g, budget), AcceptOutcome::rejected);
  EXPECT_EQ(budget.used(), 2u);
  EXPECT_EQ(pop[1].position, (Position{1, 1, 2}));
}

TEST(GreedyAccept, ExhaustedBudgetDoesNotEvaluate) {
  const auto g = chain();
  Population pop({evaluate(g, {1, 2, 3}), evaluate(g, {1, 1, 2})}, 3);
  EvalBudget budget(0);
  EXPECT_EQ(greedy_accept(pop, 0, {1, 1, 1}, g, budget), AcceptOutcome::budget_exhausted);
  EXPECT_EQ(budget.used(), 0u);
  EXPECT_EQ(pop[0].fitness, 0.0);
}

TEST(QualityMeasure, Examples) {
  Population pop({with_labels({1}, 1.0), with_labels({1}, 2.0), with_labels({1}, 3.0)}, 1);
  EXPECT_EQ(quality_measure(pop, 2), 100.0);
  EXPECT_EQ(quality_measure(pop, 0), 0.0);
  EXPECT_EQ(quality_measure(pop, 1), 50.0);
  Population flat({with_labels({1}, 0.4), with_labels({1}, 0.4)}, 1);
  EXPECT_EQ(quality_measure(flat, 1), 100.0);
}

TEST(IntensificationMeasure, Examples) {
  EXPECT_EQ(intensification_measure(with_labels({1, 2, 2}), with_labels({3, 1, 1})), 0.0);
  EXPECT_EQ(intensification_measure(with_labels({1, 1, 1, 1}), with_labels({1, 2, 3, 4})), 75.0);
  EXPECT_EQ(intensification_measure(with_labels({1, 1}), with_labels({2, 1})), 50.0);
  EXPECT_EQ(intensification_measure(with_labels({1, 1, 2, 2}), with_labels({1, 1, 2, 1})), 25.0);
}

TEST(DiversificationMeasure, Examples) {
  Population same({with_labels({1, 2}), with_labels({2, 1}), with_labels({1, 2})}, 2);
  EXPECT_EQ(diversification_measure(same, 0), 0.0);
  Population mixed({with_labels({1, 1}), with_labels({1, 2}), with_labels({1, 1})}, 2);
  EXPECT_EQ(diversification_measure(mixed, 0), 25.0);
  Population single({with_labels({1, 1})}, 2);
  EXPECT_THROW(diversification_measure(single, 0), std::invalid_argument);
}

// Canonical vectors always agree at position 0, so real partitions top out at
// 100 * (D - 1) / D. The full-scale value is checked on hand-made vectors.
TEST(HammingMeasures, FullScaleOnDisjointVectors) {
  Individual a = with_labels({1, 2, 3});
  Individual b = with_labels({1, 1, 1});
  b.canonical = {2, 3, 1};
  EXPECT_EQ(intensification_measure(a, b), 100.0);
  Population pop({a, b, b}, 3);
  EXPECT_EQ(diversification_measure(pop, 0), 100.0);
}

TEST(HammingMeasures, RealPartitionsReachTheirMaximum) {
  // {A}{B}{C}{D} against {ABCD}: canonical [1,2,3,4] vs [1,1,1,1].
  EXPECT_EQ(intensification_measure(with_labels({4, 4, 4, 4}), with_labels({1, 2, 3, 4})), 75.0);
}

TEST(RunTlbo, BudgetEqualsPopulation) {
  SearchConfig cfg;
  cfg.max_evals = cfg.pop_size;
  Rng rng(4);
  const auto r = run_tlbo(chain(), cfg, rng);
  EXPECT_EQ(r.evals_used, cfg.pop_size);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_TRUE(r.phase_trace.empty());
}

TEST(RunTlbo, TwoModuleOptimum) {
  SearchConfig cfg;
  Rng rng(1);
  const auto r = run_tlbo(two_way_pair(), cfg, rng);
  EXPECT_EQ(r.best_mq, 1.0);
  EXPECT_EQ(r.best_labels, (ClusterLabels{1, 1}));
  EXPECT_EQ(r.evals_used, 5000u);
}

TEST(RunTlbo, DeterministicAndAlternatingTrace) {
  std::mt19937_64 gen(21);
  const auto g = oracle::random_graph(gen, 8, 0.3, 0.2, true);
  SearchConfig cfg;
  cfg.max_evals = 1234;
  Rng r1(13), r2(13);
  const auto a = run_tlbo(g, cfg, r1);
  const auto b = run_tlbo(g, cfg, r2);
  EXPECT_EQ(a.best_labels, b.best_labels);
  EXPECT_EQ(a.best_mq, b.best_mq);
  EXPECT_EQ(a.phase_trace, b.phase_trace);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.evals_used, 1234u);
  ASSERT_EQ(a.phase_trace.size(), 1234u - 40u);
  for (std::size_t k = 0; k < a.phase_trace.size(); ++k)
    EXPECT_EQ(a.phase_trace[k], k % 2 == 0 ? Phase::teacher : Phase::learner);
  // 1194 evaluations at 80 per sweep: 14 full sweeps and one partial.
  EXPECT_EQ(a.iterations, 15u);
}

TEST(RunAtlbo, TwoModuleOptimum) {
  SearchConfig cfg;
  Rng rng(1);
  const auto r = run_atlbo(two_way_pair(), cfg, fuzzy::default_system(), rng);
  EXPECT_EQ(r.best_mq, 1.0);
  EXPECT_EQ(r.evals_used, 5000u);
  EXPECT_EQ(r.phase_trace.size(), 4960u);
  EXPECT_EQ(r.iterations, 124u);
}

TEST(RunAdaptive, ConstantLocalSelectorOnlyRunsLearnerPhase) {
  SearchConfig cfg;
  cfg.max_evals = 600;
  ConstantSelector local{Phase::learner};
  Rng rng(2);
  const auto r = run_adaptive(chain(), cfg, local, rng);
  ASSERT_FALSE(r.phase_trace.empty());
  for (auto p : r.phase_trace) EXPECT_EQ(p, Phase::learner);
  EXPECT_EQ(r.evals_used, 600u);
}

TEST(RunAdaptive, FeedbackHookSeesEveryEvaluation) {
  struct Counting {
    std::size_t calls = 0, accepted = 0;
    Phase select(const Population&, std::size_t i) { return i % 2 ? Phase::learner : Phase::teacher; }
    void feedback(Phase, AcceptOutcome o) {
      ++calls;
      accepted += o == AcceptOutcome::accepted;
    }
  } sel;
  SearchConfig cfg;
  cfg.max_evals = 500;
  Rng rng(8);
  const auto r = run_adaptive(chain(), cfg, sel, rng);
  EXPECT_EQ(sel.calls, r.phase_trace.size());
  EXPECT_EQ(sel.calls, 460u);
}

TEST(RunAtlbo, RejectsSystemWithoutMeasureInputs) {
  const auto fis = fuzzy::load_fis_config("[input x]\nlo = 0 0 1 2\n[output s]\na = 0 0 1 2\n[rules]\nIF x IS lo THEN s IS a\n");
  SearchConfig cfg;
  Rng rng(0);
  EXPECT_THROW(run_atlbo(chain(), cfg, fis, rng), std::invalid_argument);
}

TEST(RunSearch, InvariantsOnRandomSmallGraphs) {
  std::mt19937_64 gen(1234);
  const auto fis = fuzzy::default_system();
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto g = oracle::random_graph(gen, n, 0.35, 0.2, trial % 2 == 0);
    const double optimum = brute_force_optimum(g).mq;
    for (auto alg : {Algorithm::tlbo, Algorithm::atlbo}) {
      SearchConfig cfg;
      cfg.algorithm = alg;
      cfg.max_evals = 1500;
      cfg.seed = 100 + trial;
      Rng rng(cfg.seed);

      std::vector<double> incumbent;
      auto observer = [&](const Population& pop, std::size_t index, const Measures& m, std::optional<double>) {
        incumbent.push_back(pop.max_fitness());
        for (const auto& ind : pop.individuals())
          for (double x : ind.position) {
            ASSERT_TRUE(x >= 1.0 && x <= static_cast<double>(n));
          }
        EXPECT_GE(m.quality, 0.0);
        EXPECT_LE(m.quality, 100.0);
        EXPECT_GE(m.intensification, 0.0);
        EXPECT_LE(m.intensification, 100.0);
        EXPECT_GE(m.diversification, 0.0);
        EXPECT_LE(m.diversification, 100.0);
        EXPECT_EQ(quality_measure(pop, pop.best_index()), 100.0);
        (void)index;
      };
      const auto r = alg == Algorithm::tlbo ? run_tlbo(g, cfg, rng) : run_atlbo(g, cfg, fis, rng, observer);

      EXPECT_EQ(r.evals_used, cfg.max_evals);
      EXPECT_EQ(r.best_labels, canonicalize(r.best_labels));
      EXPECT_NEAR(r.best_mq, oracle::naive_mq(g, r.best_labels), 1e-12);
      EXPECT_LE(r.best_mq, optimum + 1e-12);
      EXPECT_TRUE(std::is_sorted(incumbent.begin(), incumbent.end()));
      if (!incumbent.empty()) {
        EXPECT_GE(r.best_mq, incumbent.back());
      }
    }
  }
}

TEST(RunSearch, SeedDeterminesResult) {
  const auto g = parse_mdg("A B\nB A\nB C\nC D\nD C\nE F 2\nF E 2\nD E\n");
  SearchConfig cfg;
  cfg.seed = 99;
  const auto a = run_search(g, cfg);
  const auto b = run_search(g, cfg);
  EXPECT_EQ(a.best_labels, b.best_labels);
  EXPECT_EQ(a.phase_trace, b.phase_trace);
  EXPECT_EQ(a.iterations, b.iterations);
}
