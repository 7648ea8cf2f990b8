#include "splitopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "splitopt/errors.hpp"

namespace splitopt {

void OracleLimits::check(const BinaryDataset& ds, int depth) const {
  if (ds.n() > max_n || ds.k() > max_k || depth > max_depth || depth < 0) {
    throw LimitsExceeded("oracle limits exceeded: n=" + std::to_string(ds.n()) + " k=" + std::to_string(ds.k()) +
                         " depth=" + std::to_string(depth));
  }
}

namespace {

using MemoKey = std::pair<std::vector<std::uint64_t>, int>;

MemoKey memo_key(const Bitset& mask, int r) {
  return {std::vector<std::uint64_t>(mask.words().begin(), mask.words().end()), r};
}

struct Best {
  Cost cost;
  Tree tree;
};

class OptimalSearch {
 public:
  OptimalSearch(const BinaryDataset& ds, const CostModel& model) : ds_(ds), model_(model) {}

  Best solve(const Bitset& mask, int r) {
    const auto key = memo_key(mask, r);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    const auto count = static_cast<std::int64_t>(mask.count());
    const auto pos = static_cast<std::int64_t>(count_and(mask, ds_.labels()));
    const int label = pos > count - pos ? 1 : 0;
    Best best{model_.leaf(std::min(pos, count - pos)), Tree::leaf(label)};
    if (r > 0) {
      for (std::size_t f = 0; f < ds_.k(); ++f) {
        Bitset on = mask & ds_.feature(f);
        Bitset off = mask.and_not(ds_.feature(f));
        if (on.none() || off.none()) continue;
        Best a = solve(on, r - 1);
        Best b = solve(off, r - 1);
        if (a.cost + b.cost < best.cost) best = Best{a.cost + b.cost, Tree::split(f, a.tree, b.tree)};
      }
    }
    memo_.emplace(key, best);
    return best;
  }

 private:
  const BinaryDataset& ds_;
  const CostModel& model_;
  std::map<MemoKey, Best> memo_;
};

// Independent recursion over explicit row lists.
struct NaiveBest {
  std::int64_t errors;
  std::int64_t leaves;
  Tree tree;
};

NaiveBest naive(const BinaryDataset& ds, const std::vector<std::size_t>& rows, int r, const CostModel& model) {
  std::int64_t ones = 0;
  for (auto row : rows) ones += ds.label(row);
  const auto zeros = static_cast<std::int64_t>(rows.size()) - ones;
  NaiveBest best = ones > zeros ? NaiveBest{zeros, 1, Tree::leaf(1)} : NaiveBest{ones, 1, Tree::leaf(0)};
  if (r == 0) return best;
  for (std::size_t f = 0; f < ds.k(); ++f) {
    std::vector<std::size_t> yes;
    std::vector<std::size_t> no;
    for (auto row : rows) (ds.value(row, f) ? yes : no).push_back(row);
    if (yes.empty() || no.empty()) continue;
    NaiveBest a = naive(ds, yes, r - 1, model);
    NaiveBest b = naive(ds, no, r - 1, model);
    const std::int64_t errors = a.errors + b.errors;
    const std::int64_t leaves = a.leaves + b.leaves;
    if (model.cost(errors, leaves) < model.cost(best.errors, best.leaves)) {
      best = NaiveBest{errors, leaves, Tree::split(f, a.tree, b.tree)};
    }
  }
  return best;
}

struct Listed {
  Tree tree;
  Cost cost;
};
using ListPtr = std::shared_ptr<const std::vector<Listed>>;

// Full lists of canonical trees per (support, depth), sorted by cost.
class FullLists {
 public:
  FullLists(const BinaryDataset& ds, const CostModel& model, std::uint64_t cap) : ds_(ds), model_(model), cap_(cap) {}

  ListPtr all(const Bitset& mask, int r) {
    const auto key = memo_key(mask, r);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    auto out = std::make_shared<std::vector<Listed>>();
    const auto count = static_cast<std::int64_t>(mask.count());
    const auto pos = static_cast<std::int64_t>(count_and(mask, ds_.labels()));
    out->push_back(Listed{Tree::leaf(0), model_.leaf(pos)});
    out->push_back(Listed{Tree::leaf(1), model_.leaf(count - pos)});
    if (r > 0) {
      for (std::size_t f = 0; f < ds_.k(); ++f) {
        Bitset on = mask & ds_.feature(f);
        Bitset off = mask.and_not(ds_.feature(f));
        if (on.none() || off.none()) continue;
        const ListPtr a = all(on, r - 1);
        const ListPtr b = all(off, r - 1);
        for (const auto& x : *a) {
          for (const auto& y : *b) {
            if (x.tree.is_leaf() && y.tree.is_leaf() && x.tree.prediction() == y.tree.prediction()) continue;
            out->push_back(Listed{Tree::split(f, x.tree, y.tree), x.cost + y.cost});
          }
        }
        total_ += a->size() * b->size();
        if (total_ > cap_) throw LimitsExceeded("oracle tree list exceeds its cap");
      }
    }
    std::stable_sort(out->begin(), out->end(), [](const Listed& p, const Listed& q) { return p.cost < q.cost; });
    memo_.emplace(key, out);
    return out;
  }

 private:
  const BinaryDataset& ds_;
  const CostModel& model_;
  std::uint64_t cap_;
  std::uint64_t total_ = 0;
  std::map<MemoKey, ListPtr> memo_;
};

}  // namespace

OracleOptimum brute_force_optimal(const BinaryDataset& ds, int depth, double lambda, const OracleLimits& limits) {
  limits.check(ds, depth);
  const CostModel model(lambda, static_cast<std::int64_t>(ds.n()));
  OptimalSearch search(ds, model);
  Best best = search.solve(Bitset(ds.n(), true), depth);
  OracleOptimum out;
  out.cost = best.cost;
  out.tree = best.tree;
  out.objective = objective(best.tree, ds, lambda);
  return out;
}

OracleOptimum naive_optimal(const BinaryDataset& ds, int depth, double lambda, const OracleLimits& limits) {
  limits.check(ds, depth);
  const CostModel model(lambda, static_cast<std::int64_t>(ds.n()));
  std::vector<std::size_t> rows(ds.n());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  NaiveBest best = naive(ds, rows, depth, model);

  // Score the witness row by row.
  std::int64_t wrong = 0;
  for (std::size_t r = 0; r < ds.n(); ++r) wrong += predict(best.tree, ds, r) != ds.label(r) ? 1 : 0;
  if (wrong != best.errors) throw std::logic_error("naive oracle witness disagrees with its own count");
  OracleOptimum out;
  out.cost = model.cost(wrong, best.tree.num_leaves());
  out.tree = best.tree;
  out.objective.misclassified = wrong;
  out.objective.leaves = best.tree.num_leaves();
  out.objective.lambda = lambda;
  out.objective.n_global = static_cast<std::int64_t>(ds.n());
  out.objective.value = static_cast<double>(wrong) / static_cast<double>(ds.n()) +
                        lambda * static_cast<double>(best.tree.num_leaves());
  return out;
}

TreeSet brute_force_rashomon_bound(const BinaryDataset& ds, int depth, const CostModel& model, Cost bound,
                                   const OracleLimits& limits) {
  limits.check(ds, depth);
  FullLists lists(ds, model, limits.max_trees);
  const Bitset root(ds.n(), true);
  std::vector<Listed> admitted;
  const auto count = static_cast<std::int64_t>(ds.n());
  const auto pos = static_cast<std::int64_t>(ds.labels().count());
  for (int label = 0; label < 2; ++label) {
    const Cost c = model.leaf(label == 0 ? pos : count - pos);
    if (c <= bound) admitted.push_back(Listed{Tree::leaf(label), c});
  }
  if (depth > 0) {
    for (std::size_t f = 0; f < ds.k(); ++f) {
      Bitset on = root & ds.feature(f);
      Bitset off = root.and_not(ds.feature(f));
      if (on.none() || off.none()) continue;
      const ListPtr a = lists.all(on, depth - 1);
      const ListPtr b = lists.all(off, depth - 1);
      for (const auto& x : *a) {
        if (x.cost + b->front().cost > bound) break;
        for (const auto& y : *b) {
          if (x.cost + y.cost > bound) break;
          if (x.tree.is_leaf() && y.tree.is_leaf() && x.tree.prediction() == y.tree.prediction()) continue;
          admitted.push_back(Listed{Tree::split(f, x.tree, y.tree), x.cost + y.cost});
          if (admitted.size() > limits.max_trees) throw LimitsExceeded("oracle Rashomon set exceeds its cap");
        }
      }
    }
  }
  std::stable_sort(admitted.begin(), admitted.end(), [](const Listed& p, const Listed& q) { return p.cost < q.cost; });
  TreeSet out;
  out.bound = bound;
  for (auto& e : admitted) {
    out.trees.push_back(std::move(e.tree));
    out.costs.push_back(e.cost);
  }
  return out;
}

TreeSet brute_force_rashomon(const BinaryDataset& ds, int depth, double lambda, double epsilon,
                             const OracleLimits& limits) {
  limits.check(ds, depth);
  const CostModel model(lambda, static_cast<std::int64_t>(ds.n()));
  const Cost optimum = OptimalSearch(ds, model).solve(Bitset(ds.n(), true), depth).cost;
  const Cost bound = std::isinf(epsilon) ? Cost::infinity() : optimum + model.slack(epsilon);
  return brute_force_rashomon_bound(ds, depth, model, bound, limits);
}

}  // namespace splitopt
