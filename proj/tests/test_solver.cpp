#include <gtest/gtest.h>

#include <map>

#include "corpus.hpp"
#include "splitopt/errors.hpp"
#include "splitopt/greedy.hpp"
#include "splitopt/oracle.hpp"
#include "splitopt/solver.hpp"

namespace splitopt {
namespace {

SolverConfig standard(int depth, double lambda) {
  SolverConfig cfg;
  cfg.depth_budget = depth;
  cfg.lambda = lambda;
  cfg.policy = BoundsPolicy::Standard;
  return cfg;
}

TEST(StandardBounds, XorRootWithinDepthTwo) {
  const auto xr = xor_dataset();
  const auto [lb, ub] = standard_bounds(xr, xr.full_support(), 0.01, 4, 2);
  EXPECT_NEAR(ub, 0.51, 1e-12);
  EXPECT_NEAR(lb, 0.02, 1e-12);
}

TEST(StandardBounds, NoDepthLeftMeansLeafOnly) {
  const auto xr = xor_dataset();
  const auto [lb, ub] = standard_bounds(xr, xr.full_support(), 0.01, 4, 0);
  EXPECT_NEAR(lb, 0.51, 1e-12);
  EXPECT_NEAR(ub, 0.51, 1e-12);
}

TEST(StandardBounds, ConflictingDuplicatesRaiseTheLowerBound) {
  // Rows 0 and 1 are identical with opposite labels: one error is forced.
  const auto ds = BinaryDataset::from_rows({{0, 0}, {0, 0}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  EXPECT_EQ(equivalent_points_errors(ds, ds.full_support()), 1);
  const auto [lb, ub] = standard_bounds(ds, ds.full_support(), 0.01, 4, 2);
  EXPECT_NEAR(lb, 0.25 + 0.02, 1e-12);
  EXPECT_NEAR(ub, 0.51, 1e-12);
  EXPECT_NEAR(equivalent_points_bound(ds, ds.full_support(), 0.01, 4), 0.26, 1e-12);
}

TEST(Solve, XorDepthTwo) {
  const auto r = solve(xor_dataset(), standard(2, 0.01));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.objective.value, 0.04, 1e-12);
  EXPECT_EQ(r.tree.num_leaves(), 4);
  EXPECT_EQ(r.root_lb, r.root_ub);
}

TEST(Solve, XorDepthOneKeepsTheLeaf) {
  const auto r = solve(xor_dataset(), standard(1, 0.01));
  EXPECT_TRUE(r.tree.is_leaf());
  EXPECT_NEAR(r.objective.value, 0.51, 1e-12);
}

TEST(Solve, PureDatasetNeverSplits) {
  const auto ds = BinaryDataset::from_rows({{0, 1}, {1, 0}, {1, 1}, {0, 0}}, {0, 0, 0, 0});
  for (double lambda : {0.0, 0.01}) {
    const auto r = solve(ds, standard(3, lambda));
    EXPECT_TRUE(r.tree.is_leaf());
    EXPECT_EQ(r.objective.misclassified, 0);
  }
}

TEST(Solve, LargePenaltyForcesALeaf) {
  const auto ds = random_dataset(40, 5, 3);
  const auto r = solve(ds, standard(3, 0.5));
  EXPECT_TRUE(r.tree.is_leaf());
}

TEST(Solve, MatchesTheOracleOnFuzzedInstances) {
  for (const auto& inst : testing::fuzz_corpus(250, 64, 8, 3, 21)) {
    const auto r = solve(inst.data, standard(inst.depth, inst.lambda));
    const auto best = brute_force_optimal(inst.data, inst.depth, inst.lambda);
    ASSERT_TRUE(r.converged);
    const CostModel model(inst.lambda, static_cast<std::int64_t>(inst.data.n()));
    ASSERT_EQ(r.root_ub, best.cost) << "seed " << inst.seed;
    ASSERT_EQ(tree_cost(r.tree, inst.data, inst.data.full_support(), model), best.cost) << "seed " << inst.seed;
    ASSERT_LE(r.tree.depth(), inst.depth);
  }
}

TEST(Solve, CacheDoesNotChangeTheAnswer) {
  for (const auto& inst : testing::fuzz_corpus(60, 30, 5, 3, 4)) {
    auto cfg = standard(inst.depth, inst.lambda);
    const auto cached = solve(inst.data, cfg);
    cfg.use_cache = false;
    const auto uncached = solve(inst.data, cfg);
    EXPECT_EQ(cached.root_ub, uncached.root_ub) << "seed " << inst.seed;
    EXPECT_GE(uncached.stats.subproblems_created, cached.stats.subproblems_created);
  }
}

TEST(Solve, EquivalentPointsBoundDoesNotChangeTheAnswer) {
  for (const auto& inst : testing::fuzz_corpus(60, 30, 3, 3, 8)) {
    auto cfg = standard(inst.depth, inst.lambda);
    const auto with = solve(inst.data, cfg);
    cfg.equivalent_points = false;
    const auto without = solve(inst.data, cfg);
    EXPECT_EQ(with.root_ub, without.root_ub) << "seed " << inst.seed;
  }
}

TEST(Solve, BoundsOnlyTighten) {
  for (const auto& inst : testing::fuzz_corpus(40, 40, 6, 3, 13)) {
    std::map<std::pair<std::string, int>, std::pair<Cost, Cost>> last;
    bool ok = true;
    auto cfg = standard(inst.depth, inst.lambda);
    cfg.observer = [&](const SupportSet& s, int level, Cost lb, Cost ub) {
      if (lb > ub) ok = false;
      std::string key;
      for (auto w : s.mask().words()) key += std::to_string(w) + ",";
      auto [it, fresh] = last.try_emplace({key, level}, lb, ub);
      if (!fresh) {
        if (lb < it->second.first || ub > it->second.second) ok = false;
        it->second = {lb, ub};
      }
    };
    solve(inst.data, cfg);
    EXPECT_TRUE(ok) << "seed " << inst.seed;
  }
}

TEST(Solve, TinyTimeLimitReturnsAValidTree) {
  const auto ds = random_dataset(64, 8, 17);
  auto cfg = standard(4, 0.001);
  cfg.time_limit = 1e-9;
  const auto r = solve(ds, cfg);
  EXPECT_LE(r.root_lb, r.root_ub);
  const CostModel model(0.001, 64);
  EXPECT_EQ(tree_cost(r.tree, ds, ds.full_support(), model), r.root_ub);
}

TEST(Solve, RejectsBadConfigurations) {
  EXPECT_THROW(solve(xor_dataset(), standard(-1, 0.01)), std::invalid_argument);
  EXPECT_THROW(solve(xor_dataset(), standard(2, -0.5)), std::invalid_argument);
}

TEST(LookaheadSolve, BoundaryNodesTakeTheGreedyCompletion) {
  const auto xr = xor_dataset();
  SolverConfig cfg = standard(2, 0.01);
  cfg.policy = BoundsPolicy::LookaheadGreedy;
  cfg.lookahead_depth = 1;
  const CostModel model(0.01, 4);
  const auto nb = lookahead_bounds(xr, xr.full_support(), 1, cfg, model);
  EXPECT_EQ(nb.lb, nb.ub);
  ASSERT_TRUE(nb.completion.has_value());
  EXPECT_EQ(nb.ub, greedy_fit(xr, xr.full_support(), 1, model).cost);
}

TEST(LookaheadSolve, NeverWorseThanGreedyNorBetterThanOptimal) {
  for (const auto& inst : testing::fuzz_corpus(150, 48, 6, 3, 31)) {
    if (inst.depth < 1) continue;
    const CostModel model(inst.lambda, static_cast<std::int64_t>(inst.data.n()));
    for (int dl = 1; dl <= inst.depth; ++dl) {
      SolverConfig cfg = standard(inst.depth, inst.lambda);
      cfg.policy = BoundsPolicy::LookaheadGreedy;
      cfg.lookahead_depth = dl;
      const auto r = solve(inst.data, cfg);
      const Cost greedy = greedy_fit(inst.data, inst.data.full_support(), inst.depth, model).cost;
      const Cost opt = brute_force_optimal(inst.data, inst.depth, inst.lambda).cost;
      const Cost opt_dl = brute_force_optimal(inst.data, dl, inst.lambda).cost;
      EXPECT_LE(r.root_ub, greedy) << "seed " << inst.seed << " dl " << dl;
      EXPECT_LE(r.root_ub, opt_dl) << "seed " << inst.seed << " dl " << dl;
      EXPECT_GE(r.root_ub, opt) << "seed " << inst.seed << " dl " << dl;
      EXPECT_EQ(tree_cost(r.tree, inst.data, inst.data.full_support(), model), r.root_ub);
    }
  }
}

}  // namespace
}  // namespace splitopt
