#pragma once

#include <cstdint>
#include <vector>

#include "splitopt/synthetic.hpp"

namespace splitopt::testing {

struct Instance {
  BinaryDataset data;
  int depth;
  double lambda;
  std::uint64_t seed;
};

inline constexpr double kLambdas[] = {0.0, 0.001, 0.01, 0.1};

// Seeded fuzz corpus within the oracle limits.
inline std::vector<Instance> fuzz_corpus(std::size_t count, std::size_t max_n, std::size_t max_k, int max_depth,
                                         std::uint64_t base_seed = 1) {
  std::vector<Instance> out;
  CounterRng rng(base_seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 1 + rng.below(max_n);
    const std::size_t k = 1 + rng.below(max_k);
    const int depth = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_depth) + 1));
    const double lambda = kLambdas[rng.below(4)];
    const std::uint64_t seed = base_seed * 1000003 + i;
    out.push_back(Instance{random_dataset(n, k, seed), depth, lambda, seed});
  }
  return out;
}

}  // namespace splitopt::testing
