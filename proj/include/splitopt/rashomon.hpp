#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/tree.hpp"

namespace splitopt {

inline constexpr std::uint64_t kDefaultMaxTrees = 10'000'000;

// Canonical trees with their costs, sorted by cost (generation order breaks
// ties). Every cost is <= bound.
struct TreeSet {
  std::vector<Tree> trees;
  std::vector<Cost> costs;
  Cost bound;

  std::size_t size() const { return trees.size(); }
  bool empty() const { return trees.empty(); }
};

// Every canonical tree of depth <= depth on s whose cost is <= bound. A
// canonical tree has no split with an empty side and no split whose two
// children are equal leaves. Throws BudgetExceeded past max_trees.
TreeSet enumerate_rashomon(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model, Cost bound,
                           std::uint64_t max_trees = kDefaultMaxTrees);
TreeSet enumerate_rashomon(const BinaryDataset& ds, const SupportSet& s, int depth, double lambda,
                           std::int64_t n_global, double bound, std::uint64_t max_trees = kDefaultMaxTrees);

struct RashomonConfig {
  double lambda = 0.01;
  double epsilon = 0.01;
  int depth_budget = 3;
  int lookahead_depth = 2;
  std::uint64_t max_trees = kDefaultMaxTrees;

  void validate() const;
};

// One node of a prefix tree. Internal nodes split on a feature; the others
// carry an attachment: the list of subtrees that may hang there.
struct PrefixNode {
  int feature = -1;
  int on_true = -1;
  int on_false = -1;
  int attachment = -1;
  std::uint64_t count = 0;  // distinct trees rooted here
};

struct Prefix {
  Tree shape = Tree::leaf(0);  // attachment points shown as leaves
  Cost cost;                   // objective with greedy completions
  std::vector<PrefixNode> nodes;  // nodes[0] is the root
};

struct PrefixForest {
  RashomonConfig config;
  std::int64_t n_global = 1;
  Cost lookahead_optimum;
  double lookahead_optimum_value = 0.0;
  std::vector<Prefix> prefixes;
  std::vector<TreeSet> attachments;
  std::vector<std::uint64_t> p_counts;
  std::uint64_t t_count = 0;
};

// Near-optimal trees built from near-optimal lookahead prefixes. Each
// prefix leaf at the lookahead depth takes every subtree at least as good as
// the greedy completion there; earlier prefix leaves stay leaves.
PrefixForest resplit(const BinaryDataset& ds, const RashomonConfig& cfg);

// Annotates every node of the prefix with its tree count and returns the
// root's. A split whose children are both attachments skips the pairs that
// would put two equal leaves side by side.
std::uint64_t enumerate_subtree_counts(Prefix& prefix, const std::vector<TreeSet>& attachments);

// Running totals of the per-prefix counts.
void rset_count(PrefixForest& forest);

Tree tree_at_index(const PrefixForest& forest, std::uint64_t index);

// Directory form: manifest.json plus one prefix_NNNNN.json per prefix.
void write_forest(const PrefixForest& forest, const BinaryDataset& ds, const std::filesystem::path& dir);

// Indexed access that only reads the manifest and the owning prefix file.
class ForestReader {
 public:
  explicit ForestReader(const std::filesystem::path& dir);

  std::uint64_t t_count() const { return t_count_; }
  const std::vector<std::uint64_t>& p_counts() const { return p_counts_; }
  const nlohmann::json& manifest() const { return manifest_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  Tree tree_at_index(std::uint64_t index) const;

 private:
  std::filesystem::path dir_;
  nlohmann::json manifest_;
  std::vector<std::uint64_t> p_counts_;
  std::vector<std::string> feature_names_;
  std::uint64_t t_count_ = 0;
};

}  // namespace splitopt
