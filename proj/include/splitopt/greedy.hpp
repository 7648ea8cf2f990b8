#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

struct SplitScore {
  std::size_t feature = 0;
  double weighted_entropy = 0.0;  // nats
};

// H(p) in nats, with H(0) = H(1) = 0.
double binary_entropy(double p);

// Size-weighted entropy of the two children of s under feature f. Empty
// children contribute nothing.
double weighted_child_entropy(const BinaryDataset& ds, const SupportSet& s, std::size_t f);

// Minimizes weighted_child_entropy over features whose split leaves both
// children non-empty; smallest index wins ties. Empty when s is pure or no
// feature separates it.
std::optional<SplitScore> best_split(const BinaryDataset& ds, const SupportSet& s);

struct GreedyResult {
  Tree tree;
  Cost cost;
};

// CART-style growth: split on the best feature while depth remains, and keep
// a split only when the children's total cost is strictly below the leaf's.
// depth counts edge levels, so depth 0 always yields a leaf.
GreedyResult greedy_fit(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model);

std::pair<Tree, Objective> greedy_fit(const BinaryDataset& ds, const SupportSet& s, int depth, double lambda,
                                      std::int64_t n_global);

}  // namespace splitopt
