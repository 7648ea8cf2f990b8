#pragma once

#include <cstddef>
#include <cstdint>

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/rashomon.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

// Exhaustive search is exponential in depth and feature count; these
// limits keep it at test scale.
struct OracleLimits {
  std::size_t max_n = 64;
  std::size_t max_k = 8;
  int max_depth = 3;
  std::uint64_t max_trees = 50'000'000;

  void check(const BinaryDataset& ds, int depth) const;
};

struct OracleOptimum {
  Objective objective;
  Cost cost;
  Tree tree = Tree::leaf(0);
};

// Minimum objective over all trees of depth <= depth, memoized by support.
// Witness ties: leaf first, then the smallest feature.
OracleOptimum brute_force_optimal(const BinaryDataset& ds, int depth, double lambda, const OracleLimits& limits = {});

// A second search sharing none of the bitset machinery: plain recursion on
// row lists, scored by routing every row through predict.
OracleOptimum naive_optimal(const BinaryDataset& ds, int depth, double lambda, const OracleLimits& limits = {});

// Every canonical tree of depth <= depth within epsilon of the optimum,
// from full per-support lists. An infinite epsilon lists every canonical
// tree.
TreeSet brute_force_rashomon(const BinaryDataset& ds, int depth, double lambda, double epsilon,
                             const OracleLimits& limits = {});
// Same universe, explicit cost bound.
TreeSet brute_force_rashomon_bound(const BinaryDataset& ds, int depth, const CostModel& model, Cost bound,
                                   const OracleLimits& limits = {});

}  // namespace splitopt
