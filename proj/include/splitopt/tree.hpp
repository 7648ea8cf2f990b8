#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "splitopt/cost.hpp"
#include "splitopt/dataset.hpp"

namespace splitopt {

// Immutable binary decision tree. Subtrees are shared, so copies are cheap
// and enumerated tree sets reuse common children.
class Tree {
 public:
  static Tree leaf(int prediction);
  // on_true is taken when the feature is 1.
  static Tree split(std::size_t feature, Tree on_true, Tree on_false);

  bool is_leaf() const { return node_->feature < 0; }
  int prediction() const { return node_->prediction; }
  std::size_t feature() const { return static_cast<std::size_t>(node_->feature); }
  const Tree& on_true() const { return node_->children[0]; }
  const Tree& on_false() const { return node_->children[1]; }

  std::int64_t num_leaves() const { return node_->leaves; }
  int depth() const { return node_->depth; }

  // Compact prefix encoding; equal strings iff structurally equal trees.
  std::string encode() const;

  friend bool operator==(const Tree& a, const Tree& b);

 private:
  struct Node {
    int feature = -1;
    int prediction = 0;
    std::int64_t leaves = 1;
    int depth = 0;
    std::vector<Tree> children;
  };
  explicit Tree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

struct Objective {
  std::int64_t misclassified = 0;
  std::int64_t leaves = 1;
  double lambda = 0.0;
  std::int64_t n_global = 1;
  double value = 0.0;
};

int predict(const Tree& t, const BinaryDataset& ds, std::size_t row);
std::vector<int> predict_all(const Tree& t, const BinaryDataset& ds);

// Rows of s whose prediction differs from the label.
std::int64_t misclassified(const Tree& t, const BinaryDataset& ds, const SupportSet& s);

// misclassified / n_global + lambda * leaves over the rows of s.
Objective objective(const Tree& t, const BinaryDataset& ds, const SupportSet& s, double lambda, std::int64_t n_global);
Objective objective(const Tree& t, const BinaryDataset& ds, double lambda);

// Exact counterpart used for comparisons.
Cost tree_cost(const Tree& t, const BinaryDataset& ds, const SupportSet& s, const CostModel& model);

std::int64_t num_leaves(const Tree& t);
int depth(const Tree& t);

// Repeatedly merges sibling leaves with equal predictions.
Tree canonicalize(const Tree& t);
bool is_canonical(const Tree& t);

// {"leaf": 0|1} or {"feature": name-or-index, "true": ..., "false": ...}.
// Features are written by name when names are given.
nlohmann::json tree_to_json(const Tree& t, const std::vector<std::string>* feature_names = nullptr);
Tree tree_from_json(const nlohmann::json& doc, const std::vector<std::string>* feature_names = nullptr);

// A fitted tree with its training context.
struct Model {
  Tree tree = Tree::leaf(0);
  std::string algorithm;
  double lambda = 0.0;
  int depth_budget = 0;
  int lookahead_depth = 0;
  Objective objective;
  std::vector<std::string> feature_names;
  std::string dataset_fingerprint;
};

nlohmann::json model_to_json(const Model& m);
Model model_from_json(const nlohmann::json& doc);

}  // namespace splitopt
