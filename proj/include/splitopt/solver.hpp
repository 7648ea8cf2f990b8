#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

enum class BoundsPolicy {
  // Full search to the depth budget.
  Standard,
  // Search to the lookahead depth; nodes there are closed with a greedy tree.
  LookaheadGreedy,
};

struct SolverConfig {
  int depth_budget = 3;
  int lookahead_depth = 3;  // only read by LookaheadGreedy
  double lambda = 0.01;
  std::optional<double> time_limit;  // seconds
  BoundsPolicy policy = BoundsPolicy::Standard;
  bool use_cache = true;
  bool equivalent_points = true;
  // Test hook: called after every bound change with the node's support,
  // its distance from the root and its new bounds.
  std::function<void(const SupportSet&, int, Cost, Cost)> observer;

  void validate() const;
};

struct SolveStats {
  std::int64_t subproblems_created = 0;
  std::int64_t subproblems_solved = 0;
  std::int64_t queue_pushes = 0;
  double wall_time = 0.0;
};

struct SolveResult {
  Cost root_lb;
  Cost root_ub;
  double lower_bound = 0.0;  // objective units
  double upper_bound = 0.0;
  bool converged = false;
  Tree tree = Tree::leaf(0);
  Objective objective;
  SolveStats stats;
};

// Leaf cost as the upper bound. The lower bound is the cheaper of that leaf
// and any tree with at least two leaves, which also pays the irreducible
// error of duplicate rows with conflicting labels.
std::pair<Cost, Cost> standard_bounds(const BinaryDataset& ds, const SupportSet& s, const CostModel& model,
                                      int remaining_depth, bool equivalent_points = true);
std::pair<double, double> standard_bounds(const BinaryDataset& ds, const SupportSet& s, double lambda,
                                          std::int64_t n_global, int remaining_depth);

// Rows of s that no tree can classify correctly: per group of identical
// feature vectors, the minority label count.
std::int64_t equivalent_points_errors(const BinaryDataset& ds, const SupportSet& s);
// lambda + equivalent_points_errors / N.
double equivalent_points_bound(const BinaryDataset& ds, const SupportSet& s, double lambda, std::int64_t n_global);

struct NodeBounds {
  Cost lb;
  Cost ub;
  std::optional<Tree> completion;  // set at the lookahead boundary
};

// Bounds for a node `level` edges below the root. At the lookahead depth
// the node is closed with the greedy tree for the remaining budget.
NodeBounds lookahead_bounds(const BinaryDataset& ds, const SupportSet& s, int level, const SolverConfig& cfg,
                            const CostModel& model);

// Branch and bound over (support, depth) subproblems. Stops when the root
// bounds meet or the time limit passes; the tree is the best found so far.
SolveResult solve(const BinaryDataset& ds, const SolverConfig& cfg);
SolveResult solve(const BinaryDataset& ds, const SupportSet& root, const SolverConfig& cfg, const CostModel& model);

}  // namespace splitopt
