#pragma once

#include <cstdint>
#include <optional>

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/solver.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

struct FitRequest {
  double lambda = 0.01;
  int depth_budget = 5;
  int lookahead_depth = 2;
  bool postprocess = true;
  std::optional<double> time_limit;  // per solver call, seconds
  int threads = 1;                   // postprocessing workers

  void validate() const;
};

struct FitResult {
  Tree tree = Tree::leaf(0);
  Objective objective;
  Cost cost;
  // Objective of the lookahead tree before postprocessing.
  double lookahead_objective = 0.0;
  // False when some solver call hit its time limit.
  bool converged = true;
  int prefix_leaves = 0;
  int leaves_replaced = 0;
  SolveStats stats;  // summed over solver calls
};

// lambda * parent_count / child_count.
double renormalize_lambda(double lambda, std::int64_t parent_count, std::int64_t child_count);

// Optimizes the top lookahead_depth levels with greedy completions below,
// then (optionally) re-solves each prefix leaf exactly with the remaining
// depth and keeps strict improvements.
FitResult split_fit(const BinaryDataset& ds, const FitRequest& req);
FitResult split_fit(const BinaryDataset& ds, const SupportSet& s, const FitRequest& req, const CostModel& model);

// Picks the best root split under greedy completions, then recurses into
// each child with one level less, until a leaf is chosen.
FitResult licketysplit_fit(const BinaryDataset& ds, double lambda, int depth);
FitResult licketysplit_fit(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model);

}  // namespace splitopt
