#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "splitopt/dataset.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

// Counter-based generator: draw i is mix64(seed + i * 0x9e3779b97f4a7c15).
// Integer-only, so streams match bit for bit on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next() { return mix64(seed_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }
  // Uniform in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);
  bool bit() { return (next() >> 63) != 0; }
  // True with probability numerator / 2^32.
  bool chance(std::uint32_t numerator) { return (next() >> 32) < numerator; }
  static std::uint32_t probability(double p);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

enum class SyntheticKind {
  Xor,             // the four-row XOR table
  XorMajority,     // y = x1 xor Maj(x2..xd), else Maj(x_{d+1}..x_{2d})
  TribesMajority,  // y = Tribes(first block), else Maj(rest)
  PlantedTree,     // labels from a random full tree, flipped with the noise rate
};

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::Xor;
  int depth = 4;      // Maj block size for xor_majority, tree depth for planted
  int lookahead = 2;  // Tribes block size
  double noise = 0.05;
  std::size_t n = 1000;
  std::size_t k = 10;  // planted only
  std::uint64_t seed = 7;

  // "xor", "xor_majority:d=4,eps=0.05", "tribes_majority:dl=8,d=9,eps=0.05",
  // "planted:d=5,k=40,eps=0.05"; n and seed may appear in any of them.
  static SyntheticSpec parse(const std::string& text);
};

struct SyntheticData {
  BinaryDataset data;
  // Accuracy a tree reading the signal block can reach (1 - noise) and the
  // ceiling for a tree that misses it (1/2 + noise).
  double signal_accuracy = 1.0;
  double greedy_ceiling = 1.0;
  std::optional<Tree> planted;
};

SyntheticData generate(const SyntheticSpec& spec);

BinaryDataset xor_dataset();

// 1 when at least half of the bits are 1.
bool majority(const bool* bits, std::size_t count);

// Largest w in [1, ell] with (1 - 2^-w)^(ell / w) <= 1/2.
int tribes_width(int ell);

// Fuzzing corpus: uniform bits, labels from a random tree of depth 1..3
// with 10% flips, or pure coin flips for a quarter of the seeds.
BinaryDataset random_dataset(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace splitopt
