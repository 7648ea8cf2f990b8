#include "splitopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "splitopt/errors.hpp"
#include "splitopt/greedy.hpp"

namespace splitopt {

bool is_greedy_split(const BinaryDataset& ds, const SupportSet& s, std::size_t feature) {
  const auto best = best_split(ds, s);
  if (!best) return false;
  return weighted_child_entropy(ds, s, feature) <= best->weighted_entropy + kEntropyTolerance;
}

namespace {

void tally_levels(const BinaryDataset& ds, const Tree& t, const SupportSet& s, int level,
                  std::map<int, LevelStat>& out) {
  if (t.is_leaf()) return;
  LevelStat& stat = out[level];
  stat.level = level;
  ++stat.denominator;
  if (is_greedy_split(ds, s, t.feature())) ++stat.numerator;
  auto [on, off] = split_support(ds, s, t.feature());
  tally_levels(ds, t.on_true(), on, level + 1, out);
  tally_levels(ds, t.on_false(), off, level + 1, out);
}

std::map<int, LevelStat> tally_all(const BinaryDataset& ds, const std::vector<Tree>& trees) {
  if (trees.empty()) throw std::invalid_argument("tree set is empty");
  std::map<int, LevelStat> out;
  const SupportSet root = ds.full_support();
  for (const auto& t : trees) tally_levels(ds, t, root, 0, out);
  for (auto& [level, stat] : out) {
    stat.proportion = static_cast<double>(stat.numerator) / static_cast<double>(stat.denominator);
  }
  return out;
}

}  // namespace

LevelStat greedy_split_proportion(const BinaryDataset& ds, const std::vector<Tree>& trees, int level) {
  const auto all = tally_all(ds, trees);
  const auto it = all.find(level);
  if (it == all.end()) throw NoNodesAtLevel(level);
  return it->second;
}

std::vector<LevelStat> greedy_split_profile(const BinaryDataset& ds, const std::vector<Tree>& trees) {
  std::vector<LevelStat> out;
  for (const auto& [level, stat] : tally_all(ds, trees)) out.push_back(stat);
  return out;
}

double optimality_gap(const BinaryDataset& ds, const Tree& t, const SupportSet& s, double lambda,
                      std::int64_t n_global) {
  if (s.empty()) throw EmptySupport();
  const std::int64_t target = t.num_leaves();
  const int d = t.depth();
  auto leaves_at = [&](double penalty) {
    return greedy_fit(ds, s, d, CostModel(penalty, n_global)).tree.num_leaves();
  };

  // Leaf count falls as the penalty grows; bracket the target and bisect.
  std::optional<Tree> match;
  double lo = 0.0;
  double hi = 1.0;
  const auto at_lo = greedy_fit(ds, s, d, CostModel(lo, n_global)).tree;
  if (at_lo.num_leaves() == target) match = at_lo;
  if (!match && at_lo.num_leaves() < target) throw NoMatchingSparsity(target);
  if (!match && leaves_at(hi) == target) match = greedy_fit(ds, s, d, CostModel(hi, n_global)).tree;
  for (int iter = 0; !match && iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    Tree g = greedy_fit(ds, s, d, CostModel(mid, n_global)).tree;
    if (g.num_leaves() == target) {
      match = std::move(g);
    } else if (g.num_leaves() > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!match) throw NoMatchingSparsity(target);

  // Equal leaf counts, so the penalties cancel and only the errors differ.
  const Objective mine = objective(t, ds, s, lambda, n_global);
  const Objective greedy = objective(*match, ds, s, lambda, n_global);
  return static_cast<double>(mine.misclassified - greedy.misclassified) / static_cast<double>(n_global);
}

namespace {

void collect_gaps(const BinaryDataset& ds, const Tree& t, const SupportSet& s, int level, double lambda,
                  std::int64_t n_global, std::vector<double>& sums, std::vector<std::int64_t>& counts,
                  bool& matched) {
  if (t.is_leaf()) return;
  if (static_cast<std::size_t>(level) >= sums.size()) {
    sums.resize(level + 1, 0.0);
    counts.resize(level + 1, 0);
  }
  try {
    sums[level] += optimality_gap(ds, t, s, lambda, n_global);
    ++counts[level];
  } catch (const NoMatchingSparsity&) {
    matched = false;
  }
  auto [on, off] = split_support(ds, s, t.feature());
  collect_gaps(ds, t.on_true(), on, level + 1, lambda, n_global, sums, counts, matched);
  collect_gaps(ds, t.on_false(), off, level + 1, lambda, n_global, sums, counts, matched);
}

}  // namespace

GapProfile gap_profile(const BinaryDataset& ds, const Tree& t, double lambda) {
  GapProfile out;
  std::vector<double> sums;
  collect_gaps(ds, t, ds.full_support(), 0, lambda, static_cast<std::int64_t>(ds.n()), sums, out.level_counts,
               out.matched);
  out.level_means.resize(sums.size(), 0.0);
  double previous = INFINITY;
  for (std::size_t l = 0; l < sums.size(); ++l) {
    if (out.level_counts[l] == 0) continue;
    out.level_means[l] = sums[l] / static_cast<double>(out.level_counts[l]);
    if (out.level_means[l] > previous + kEntropyTolerance) out.monotone = false;
    previous = out.level_means[l];
  }
  return out;
}

MonotoneGapSummary monotone_gap_fraction(const BinaryDataset& ds, const std::vector<Tree>& trees, double lambda) {
  MonotoneGapSummary out;
  for (const auto& t : trees) {
    const GapProfile p = gap_profile(ds, t, lambda);
    if (!p.matched) {
      ++out.unmatched;
      continue;
    }
    ++out.considered;
    if (p.monotone) ++out.monotone;
  }
  if (out.considered > 0) out.fraction = static_cast<double>(out.monotone) / static_cast<double>(out.considered);
  return out;
}

Multiplicity predictive_multiplicity(const BinaryDataset& ds, const std::vector<Tree>& trees) {
  if (trees.size() < 2) throw std::invalid_argument("predictive multiplicity needs at least two trees");
  std::vector<std::int64_t> ones(ds.n(), 0);
  for (const auto& t : trees) {
    const auto p = predict_all(t, ds);
    for (std::size_t r = 0; r < ds.n(); ++r) ones[r] += p[r];
  }
  Multiplicity out;
  out.variances.resize(ds.n());
  const auto m = static_cast<double>(trees.size());
  for (std::size_t r = 0; r < ds.n(); ++r) {
    const double p = static_cast<double>(ones[r]) / m;
    out.variances[r] = p * (1.0 - p);
  }
  if (ds.n() == 0) return out;
  double sum = 0.0;
  for (double v : out.variances) sum += v;
  out.mean = sum / static_cast<double>(ds.n());
  double sq = 0.0;
  for (double v : out.variances) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(ds.n()));
  return out;
}

Precision precision_vs_reference(const BinaryDataset& ds, const std::vector<Tree>& candidates, Cost reference,
                                 const CostModel& model, double epsilon, double slack) {
  if (slack < 0.0) throw std::invalid_argument("slack must be >= 0");
  Precision out;
  const SupportSet root = ds.full_support();
  const Cost strict = reference + model.slack(epsilon);
  const Cost loose = strict + model.slack(slack);
  for (const auto& t : candidates) {
    const Cost c = tree_cost(t, ds, root, model);
    ++out.total;
    if (c <= strict) ++out.within;
    if (c <= loose) ++out.within_slack;
  }
  if (out.total > 0) {
    out.precision = static_cast<double>(out.within) / static_cast<double>(out.total);
    out.slackened_precision = static_cast<double>(out.within_slack) / static_cast<double>(out.total);
  }
  return out;
}

}  // namespace splitopt
