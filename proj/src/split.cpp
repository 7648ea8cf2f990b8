#include "splitopt/split.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "splitopt/errors.hpp"

namespace splitopt {

void FitRequest::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (depth_budget < 1) throw std::invalid_argument("depth budget must be >= 1");
  if (lookahead_depth < 1 || lookahead_depth > depth_budget) {
    throw std::invalid_argument("lookahead depth must satisfy 1 <= lookahead <= depth budget");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double renormalize_lambda(double lambda, std::int64_t parent_count, std::int64_t child_count) {
  if (child_count < 1) throw EmptyChild();
  return lambda * static_cast<double>(parent_count) / static_cast<double>(child_count);
}

namespace {

void add_stats(SolveStats& into, const SolveStats& from) {
  into.subproblems_created += from.subproblems_created;
  into.subproblems_solved += from.subproblems_solved;
  into.queue_pushes += from.queue_pushes;
}

struct PrefixLeaf {
  Tree current;
  SupportSet support;
  int depth;
};

void collect_prefix_leaves(const BinaryDataset& ds, const Tree& t, const SupportSet& s, int depth, int lookahead,
                           std::vector<PrefixLeaf>& out) {
  if (t.is_leaf() || depth == lookahead) {
    out.push_back(PrefixLeaf{t, s, depth});
    return;
  }
  auto [on, off] = split_support(ds, s, t.feature());
  collect_prefix_leaves(ds, t.on_true(), on, depth + 1, lookahead, out);
  collect_prefix_leaves(ds, t.on_false(), off, depth + 1, lookahead, out);
}

// Rebuilds the prefix, consuming replacements in collection order.
Tree graft(const Tree& t, int depth, int lookahead, const std::vector<Tree>& replacements, std::size_t& next) {
  if (t.is_leaf() || depth == lookahead) return replacements[next++];
  Tree left = graft(t.on_true(), depth + 1, lookahead, replacements, next);
  Tree right = graft(t.on_false(), depth + 1, lookahead, replacements, next);
  return Tree::split(t.feature(), std::move(left), std::move(right));
}

struct LeafOutcome {
  Tree tree = Tree::leaf(0);
  bool replaced = false;
  bool converged = true;
  SolveStats stats;
};

LeafOutcome optimize_leaf(const BinaryDataset& ds, const PrefixLeaf& leaf, const FitRequest& req,
                          const CostModel& model) {
  LeafOutcome out;
  out.tree = leaf.current;
  const int remaining = req.depth_budget - leaf.depth;
  if (remaining <= 0 || leaf.support.empty()) return out;
  const CostModel local = model.rescaled(leaf.support.count());
  const Cost current = tree_cost(leaf.current, ds, leaf.support, local);
  if (current == standard_bounds(ds, leaf.support, local, remaining).first) return out;

  SolverConfig cfg;
  cfg.depth_budget = remaining;
  cfg.lookahead_depth = remaining;
  cfg.lambda = local.lambda();
  cfg.time_limit = req.time_limit;
  cfg.policy = BoundsPolicy::Standard;
  SolveResult r = solve(ds, leaf.support, cfg, local);
  out.converged = r.converged;
  out.stats = r.stats;
  if (tree_cost(r.tree, ds, leaf.support, local) < current) {
    out.tree = std::move(r.tree);
    out.replaced = true;
  }
  return out;
}

}  // namespace

FitResult split_fit(const BinaryDataset& ds, const SupportSet& s, const FitRequest& req, const CostModel& model) {
  req.validate();
  if (s.empty()) throw EmptySupport();
  const auto start = std::chrono::steady_clock::now();

  SolverConfig cfg;
  cfg.depth_budget = req.depth_budget;
  cfg.lookahead_depth = req.lookahead_depth;
  cfg.lambda = model.lambda();
  cfg.time_limit = req.time_limit;
  cfg.policy = BoundsPolicy::LookaheadGreedy;
  SolveResult phase1 = solve(ds, s, cfg, model);

  FitResult result;
  result.converged = phase1.converged;
  result.lookahead_objective = phase1.objective.value;
  add_stats(result.stats, phase1.stats);
  Tree tree = phase1.tree;

  std::vector<PrefixLeaf> leaves;
  collect_prefix_leaves(ds, tree, s, 0, req.lookahead_depth, leaves);
  result.prefix_leaves = static_cast<int>(leaves.size());

  if (req.postprocess) {
    std::vector<LeafOutcome> outcomes(leaves.size());
    const auto workers = static_cast<std::size_t>(std::min<int>(req.threads, static_cast<int>(leaves.size())));
    if (workers <= 1) {
      for (std::size_t i = 0; i < leaves.size(); ++i) outcomes[i] = optimize_leaf(ds, leaves[i], req, model);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      std::exception_ptr failure;
      std::mutex failure_lock;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < leaves.size(); i = next++) {
            try {
              outcomes[i] = optimize_leaf(ds, leaves[i], req, model);
            } catch (...) {
              std::lock_guard lock(failure_lock);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
      for (auto& t : pool) t.join();
      if (failure) std::rethrow_exception(failure);
    }
    std::vector<Tree> replacements;
    for (auto& o : outcomes) {
      result.converged = result.converged && o.converged;
      result.leaves_replaced += o.replaced ? 1 : 0;
      add_stats(result.stats, o.stats);
      replacements.push_back(std::move(o.tree));
    }
    std::size_t next_leaf = 0;
    tree = graft(tree, 0, req.lookahead_depth, replacements, next_leaf);
  }

  result.tree = std::move(tree);
  result.cost = tree_cost(result.tree, ds, s, model);
  result.objective = objective(result.tree, ds, s, model.lambda(), model.n_global());
  result.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitResult split_fit(const BinaryDataset& ds, const FitRequest& req) {
  const CostModel model(req.lambda, static_cast<std::int64_t>(ds.n()));
  return split_fit(ds, ds.full_support(), req, model);
}

namespace {

Tree lickety(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model, FitResult& acc) {
  if (depth == 0) return Tree::leaf(s.majority_label());
  FitRequest req;
  req.lambda = model.lambda();
  req.depth_budget = depth;
  req.lookahead_depth = 1;
  req.postprocess = false;
  const FitResult step = split_fit(ds, s, req, model);
  add_stats(acc.stats, step.stats);
  acc.converged = acc.converged && step.converged;
  if (step.tree.is_leaf()) return step.tree;
  const std::size_t f = step.tree.feature();
  auto [on, off] = split_support(ds, s, f);
  Tree left = lickety(ds, on, depth - 1, model.rescaled(on.count()), acc);
  Tree right = lickety(ds, off, depth - 1, model.rescaled(off.count()), acc);
  return Tree::split(f, std::move(left), std::move(right));
}

}  // namespace

FitResult licketysplit_fit(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model) {
  if (depth < 0) throw std::invalid_argument("depth budget must be >= 0");
  if (s.empty()) throw EmptySupport();
  const auto start = std::chrono::steady_clock::now();
  FitResult result;
  result.tree = lickety(ds, s, depth, model, result);
  result.cost = tree_cost(result.tree, ds, s, model);
  result.objective = objective(result.tree, ds, s, model.lambda(), model.n_global());
  result.lookahead_objective = result.objective.value;
  result.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitResult licketysplit_fit(const BinaryDataset& ds, double lambda, int depth) {
  if (depth < 1) throw std::invalid_argument("depth budget must be >= 1");
  const CostModel model(lambda, static_cast<std::int64_t>(ds.n()));
  return licketysplit_fit(ds, ds.full_support(), depth, model);
}

}  // namespace splitopt
