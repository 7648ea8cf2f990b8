#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

// Entropy ties closer than this count as ties.
inline constexpr double kEntropyTolerance = 1e-12;

struct LevelStat {
  int level = 0;                 // root = 0
  std::int64_t numerator = 0;    // greedy internal nodes at the level
  std::int64_t denominator = 0;  // all internal nodes at the level
  double proportion = 0.0;       // meaningful only when defined()

  bool defined() const { return denominator > 0; }
};

// True when the node's feature attains the minimum weighted child entropy
// on its support; any member of a tied argmin counts.
bool is_greedy_split(const BinaryDataset& ds, const SupportSet& s, std::size_t feature);

// Share of internal nodes at the level, over all trees, whose split is
// greedy. Throws NoNodesAtLevel when no tree has an internal node there.
LevelStat greedy_split_proportion(const BinaryDataset& ds, const std::vector<Tree>& trees, int level);
// Every level holding at least one internal node, root first.
std::vector<LevelStat> greedy_split_profile(const BinaryDataset& ds, const std::vector<Tree>& trees);

// Loss of t on s minus the loss of a greedy tree of the same depth and leaf
// count, both at lambda. The greedy tree's penalty is found by bisection;
// throws NoMatchingSparsity when no penalty yields that leaf count.
double optimality_gap(const BinaryDataset& ds, const Tree& t, const SupportSet& s, double lambda,
                      std::int64_t n_global);

struct GapProfile {
  // Mean gap over the subtree roots at each level (internal nodes only).
  std::vector<double> level_means;
  std::vector<std::int64_t> level_counts;
  bool monotone = true;  // level means non-increasing, root first
  bool matched = true;   // false when some subtree had no equal-leaf greedy tree
};

GapProfile gap_profile(const BinaryDataset& ds, const Tree& t, double lambda);

struct MonotoneGapSummary {
  std::int64_t monotone = 0;
  std::int64_t considered = 0;
  std::int64_t unmatched = 0;  // excluded from both counts above
  double fraction = 1.0;       // monotone / considered, 1 when nothing is considered
};

MonotoneGapSummary monotone_gap_fraction(const BinaryDataset& ds, const std::vector<Tree>& trees, double lambda);

struct Multiplicity {
  std::vector<double> variances;  // one per training row
  double mean = 0.0;
  double stddev = 0.0;  // population, over rows
};

// Per-row population variance of the 0/1 predictions across the trees.
Multiplicity predictive_multiplicity(const BinaryDataset& ds, const std::vector<Tree>& trees);

struct Precision {
  std::int64_t total = 0;
  std::int64_t within = 0;           // cost <= reference + epsilon
  std::int64_t within_slack = 0;     // cost <= reference + epsilon + slack
  double precision = 0.0;
  double slackened_precision = 0.0;
};

// Recomputes every candidate's cost on the full dataset and compares it with
// the reference optimum. Costs come from the same model, so the test is exact.
Precision precision_vs_reference(const BinaryDataset& ds, const std::vector<Tree>& candidates, Cost reference,
                                 const CostModel& model, double epsilon, double slack);

}  // namespace splitopt
