#include "splitopt/greedy.hpp"

#include <cmath>

#include "splitopt/errors.hpp"

namespace splitopt {

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

namespace {

double weighted_term(std::int64_t size, std::int64_t pos, std::int64_t total) {
  if (size == 0) return 0.0;
  const double frac = static_cast<double>(size) / static_cast<double>(total);
  return frac * binary_entropy(static_cast<double>(pos) / static_cast<double>(size));
}

}  // namespace

double weighted_child_entropy(const BinaryDataset& ds, const SupportSet& s, std::size_t f) {
  if (s.empty()) throw EmptySupport();
  if (f >= ds.k()) throw FeatureOutOfRange(f, ds.k());
  const auto on = static_cast<std::int64_t>(count_and(s.mask(), ds.feature(f)));
  const auto on_pos = static_cast<std::int64_t>(count_and(s.mask(), ds.feature(f), ds.labels()));
  return weighted_term(on, on_pos, s.count()) + weighted_term(s.count() - on, s.pos_count() - on_pos, s.count());
}

std::optional<SplitScore> best_split(const BinaryDataset& ds, const SupportSet& s) {
  if (s.empty() || s.pure()) return std::nullopt;
  std::optional<SplitScore> best;
  for (std::size_t f = 0; f < ds.k(); ++f) {
    const auto on = static_cast<std::int64_t>(count_and(s.mask(), ds.feature(f)));
    if (on == 0 || on == s.count()) continue;
    const auto on_pos = static_cast<std::int64_t>(count_and(s.mask(), ds.feature(f), ds.labels()));
    const double h =
        weighted_term(on, on_pos, s.count()) + weighted_term(s.count() - on, s.pos_count() - on_pos, s.count());
    if (!best || h < best->weighted_entropy) best = SplitScore{f, h};
  }
  return best;
}

GreedyResult greedy_fit(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model) {
  if (depth < 0) throw std::invalid_argument("depth budget must be >= 0");
  const Cost leaf_cost = model.leaf(s.minority());
  GreedyResult leaf{Tree::leaf(s.majority_label()), leaf_cost};
  // A split costs at least two leaves, so it cannot strictly beat this leaf.
  if (depth == 0 || leaf_cost <= model.per_leaf() + model.per_leaf()) return leaf;
  const auto split = best_split(ds, s);
  if (!split) return leaf;
  auto [on, off] = split_support(ds, s, split->feature);
  GreedyResult left = greedy_fit(ds, on, depth - 1, model);
  GreedyResult right = greedy_fit(ds, off, depth - 1, model);
  const Cost total = left.cost + right.cost;
  if (total < leaf_cost) return GreedyResult{Tree::split(split->feature, std::move(left.tree), std::move(right.tree)), total};
  return leaf;
}

std::pair<Tree, Objective> greedy_fit(const BinaryDataset& ds, const SupportSet& s, int depth, double lambda,
                                      std::int64_t n_global) {
  const CostModel model(lambda, n_global);
  GreedyResult r = greedy_fit(ds, s, depth, model);
  Objective o = objective(r.tree, ds, s, lambda, n_global);
  return {std::move(r.tree), o};
}

}  // namespace splitopt
