#include "splitopt/solver.hpp"

#include <array>
#include <cassert>
#include <chrono>
#include <deque>
#include <stdexcept>
#include <unordered_map>

#include "splitopt/errors.hpp"
#include "splitopt/greedy.hpp"

namespace splitopt {

void SolverConfig::validate() const {
  if (depth_budget < 0) throw std::invalid_argument("depth budget must be >= 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (policy == BoundsPolicy::LookaheadGreedy && (lookahead_depth < 1 || lookahead_depth > depth_budget)) {
    throw std::invalid_argument("lookahead depth must satisfy 1 <= lookahead <= depth budget");
  }
  if (time_limit && !(*time_limit > 0.0)) throw std::invalid_argument("time limit must be > 0");
}

namespace {

// Per-group label tallies reused across calls.
class GroupTally {
 public:
  explicit GroupTally(const BinaryDataset& ds) : ds_(ds) {
    if (ds.has_conflicting_duplicates()) counts_.assign(ds.num_groups(), {0, 0});
  }

  std::int64_t errors(const SupportSet& s) {
    if (counts_.empty() || s.pure()) return 0;
    const auto& groups = ds_.row_groups();
    const auto& labels = ds_.labels();
    touched_.clear();
    s.mask().for_each_set([&](std::size_t r) {
      auto& c = counts_[groups[r]];
      if (c[0] == 0 && c[1] == 0) touched_.push_back(groups[r]);
      ++c[labels.test(r) ? 1 : 0];
    });
    std::int64_t total = 0;
    for (auto g : touched_) {
      total += std::min(counts_[g][0], counts_[g][1]);
      counts_[g] = {0, 0};
    }
    return total;
  }

 private:
  const BinaryDataset& ds_;
  std::vector<std::array<std::int64_t, 2>> counts_;
  std::vector<std::uint32_t> touched_;
};

std::pair<Cost, Cost> bounds_with(const SupportSet& s, const CostModel& model, int remaining_depth,
                                  std::int64_t equivalent_errors) {
  const Cost ub = model.leaf(s.minority());
  if (remaining_depth <= 0) return {ub, ub};
  const Cost split_floor = model.cost(equivalent_errors, 2);
  return {min(ub, split_floor), ub};
}

}  // namespace

std::int64_t equivalent_points_errors(const BinaryDataset& ds, const SupportSet& s) {
  GroupTally tally(ds);
  return tally.errors(s);
}

double equivalent_points_bound(const BinaryDataset& ds, const SupportSet& s, double lambda, std::int64_t n_global) {
  return lambda + static_cast<double>(equivalent_points_errors(ds, s)) / static_cast<double>(n_global);
}

std::pair<Cost, Cost> standard_bounds(const BinaryDataset& ds, const SupportSet& s, const CostModel& model,
                                      int remaining_depth, bool equivalent_points) {
  if (s.empty()) throw EmptySupport();
  const std::int64_t eq = equivalent_points && remaining_depth > 0 ? equivalent_points_errors(ds, s) : 0;
  return bounds_with(s, model, remaining_depth, eq);
}

std::pair<double, double> standard_bounds(const BinaryDataset& ds, const SupportSet& s, double lambda,
                                          std::int64_t n_global, int remaining_depth) {
  const CostModel model(lambda, n_global);
  const auto [lb, ub] = standard_bounds(ds, s, model, remaining_depth);
  return {model.objective(lb), model.objective(ub)};
}

NodeBounds lookahead_bounds(const BinaryDataset& ds, const SupportSet& s, int level, const SolverConfig& cfg,
                            const CostModel& model) {
  if (level > cfg.lookahead_depth) throw std::invalid_argument("level below the lookahead depth");
  if (level == cfg.lookahead_depth) {
    GreedyResult g = greedy_fit(ds, s, cfg.depth_budget - cfg.lookahead_depth, model);
    return NodeBounds{g.cost, g.cost, std::move(g.tree)};
  }
  const auto [lb, ub] = standard_bounds(ds, s, model, cfg.depth_budget - level, cfg.equivalent_points);
  return NodeBounds{lb, ub, std::nullopt};
}

namespace {

constexpr std::uint32_t kNoNode = ~std::uint32_t{0};

struct Split {
  std::uint32_t feature;
  std::uint32_t on_true;
  std::uint32_t on_false;
};

struct Node {
  Node(SupportSet s, int lvl) : support(std::move(s)), level(lvl) {}

  SupportSet support;
  int level;
  Cost leaf;
  Cost lb;
  Cost ub;
  bool boundary = false;
  bool expanded = false;
  bool queued[2] = {false, false};
  std::vector<Split> splits;
  std::vector<std::uint32_t> parents;
};

struct NodeKey {
  std::uint64_t hash;
  const Bitset* mask;
  int level;

  friend bool operator==(const NodeKey& a, const NodeKey& b) {
    return a.hash == b.hash && a.level == b.level && *a.mask == *b.mask;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    return static_cast<std::size_t>(mix64(k.hash ^ static_cast<std::uint64_t>(k.level)));
  }
};

class Engine {
 public:
  Engine(const BinaryDataset& ds, const SolverConfig& cfg, const CostModel& model)
      : ds_(ds), cfg_(cfg), model_(model), tally_(ds) {
    frontier_ = cfg.policy == BoundsPolicy::LookaheadGreedy ? cfg.lookahead_depth : cfg.depth_budget;
  }

  SolveResult run(const SupportSet& root_support) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint32_t root = find_or_create(root_support, 0, kNoNode);
    push(root, 0);

    bool timed_out = false;
    std::int64_t pops = 0;
    while (nodes_[root].lb != nodes_[root].ub) {
      std::uint32_t id = kNoNode;
      for (int band = 1; band >= 0 && id == kNoNode; --band) {
        if (!queue_[band].empty()) {
          id = queue_[band].front();
          queue_[band].pop_front();
          nodes_[id].queued[band] = false;
        }
      }
      if (id == kNoNode) throw std::logic_error("solver queue drained before the root converged");
      if (cfg_.time_limit && (++pops & 255) == 0) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (elapsed.count() > *cfg_.time_limit) {
          timed_out = true;
          break;
        }
      }
      process(id);
    }

    SolveResult result;
    result.root_lb = nodes_[root].lb;
    result.root_ub = nodes_[root].ub;
    result.lower_bound = model_.objective(result.root_lb);
    result.upper_bound = model_.objective(result.root_ub);
    result.converged = !timed_out && result.root_lb == result.root_ub;
    result.tree = extract(root);
    result.objective =
        objective(result.tree, ds_, root_support, model_.lambda(), model_.n_global());
    result.stats.subproblems_created = static_cast<std::int64_t>(nodes_.size());
    for (const auto& n : nodes_) result.stats.subproblems_solved += n.lb == n.ub ? 1 : 0;
    result.stats.queue_pushes = pushes_;
    result.stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

 private:
  std::uint32_t find_or_create(const SupportSet& s, int level, std::uint32_t parent) {
    std::uint32_t id = kNoNode;
    const std::uint64_t hash = s.mask().hash();
    if (cfg_.use_cache) {
      const auto it = index_.find(NodeKey{hash, &s.mask(), level});
      if (it != index_.end()) id = it->second;
    }
    if (id == kNoNode) {
      id = static_cast<std::uint32_t>(nodes_.size());
      Node& n = nodes_.emplace_back(Node{s, level});
      n.leaf = model_.leaf(s.minority());
      if (cfg_.policy == BoundsPolicy::LookaheadGreedy && level == cfg_.lookahead_depth) {
        n.boundary = true;
        n.lb = n.ub = greedy_fit(ds_, n.support, cfg_.depth_budget - level, model_).cost;
      } else {
        const int remaining = cfg_.depth_budget - level;
        const std::int64_t eq = cfg_.equivalent_points && remaining > 0 ? tally_.errors(n.support) : 0;
        std::tie(n.lb, n.ub) = bounds_with(n.support, model_, level >= frontier_ ? 0 : remaining, eq);
      }
      if (cfg_.use_cache) index_.emplace(NodeKey{hash, &n.support.mask(), level}, id);
      notify(n);
    }
    if (parent != kNoNode) {
      auto& parents = nodes_[id].parents;
      if (parents.empty() || parents.back() != parent) parents.push_back(parent);
    }
    return id;
  }

  void expand(std::uint32_t id) {
    const int level = nodes_[id].level;
    std::vector<Split> splits;
    for (std::size_t f = 0; f < ds_.k(); ++f) {
      const SupportSet& s = nodes_[id].support;
      const auto on = count_and(s.mask(), ds_.feature(f));
      if (on == 0 || on == static_cast<std::size_t>(s.count())) continue;
      auto [left, right] = split_support(ds_, s, f);
      const std::uint32_t l = find_or_create(left, level + 1, id);
      const std::uint32_t r = find_or_create(right, level + 1, id);
      splits.push_back(Split{static_cast<std::uint32_t>(f), l, r});
    }
    nodes_[id].splits = std::move(splits);
    nodes_[id].expanded = true;
  }

  void process(std::uint32_t id) {
    if (nodes_[id].lb == nodes_[id].ub) return;
    if (!nodes_[id].expanded) expand(id);
    Node& p = nodes_[id];

    Cost best_lb = Cost::infinity();
    Cost best_ub = Cost::infinity();
    for (const auto& sp : p.splits) {
      const Node& l = nodes_[sp.on_true];
      const Node& r = nodes_[sp.on_false];
      best_lb = min(best_lb, l.lb + r.lb);
      best_ub = min(best_ub, l.ub + r.ub);
    }
    const Cost new_ub = min(p.ub, min(p.leaf, best_ub));
    const Cost new_lb = min(new_ub, max(p.lb, best_lb));
    assert(new_lb >= p.lb && new_ub <= p.ub);
    if (new_lb != p.lb || new_ub != p.ub) {
      p.lb = new_lb;
      p.ub = new_ub;
      notify(p);
      for (auto parent : p.parents) push(parent, 1);
    }
    if (p.lb == p.ub) return;

    for (const auto& sp : p.splits) {
      const Node& l = nodes_[sp.on_true];
      const Node& r = nodes_[sp.on_false];
      const Cost split_lb = l.lb + r.lb;
      if (!(split_lb < l.ub + r.ub) || split_lb > p.ub) continue;
      if (l.lb != l.ub) push(sp.on_true, 0);
      if (r.lb != r.ub) push(sp.on_false, 0);
    }
  }

  void push(std::uint32_t id, int band) {
    Node& n = nodes_[id];
    if (n.queued[band]) return;
    n.queued[band] = true;
    queue_[band].push_back(id);
    ++pushes_;
  }

  void notify(const Node& n) const {
    if (cfg_.observer) cfg_.observer(n.support, n.level, n.lb, n.ub);
  }

  // Follows the cheapest known completion; the leaf wins ties, then the
  // smallest feature.
  Tree extract(std::uint32_t id) const {
    const Node& n = nodes_[id];
    if (n.boundary) return greedy_fit(ds_, n.support, cfg_.depth_budget - n.level, model_).tree;
    Cost best = n.leaf;
    const Split* choice = nullptr;
    for (const auto& sp : n.splits) {
      const Cost c = nodes_[sp.on_true].ub + nodes_[sp.on_false].ub;
      if (c < best) {
        best = c;
        choice = &sp;
      }
    }
    if (choice == nullptr) {
      if (n.ub != n.leaf) throw IncompleteGraph();
      return Tree::leaf(n.support.majority_label());
    }
    return Tree::split(choice->feature, extract(choice->on_true), extract(choice->on_false));
  }

  const BinaryDataset& ds_;
  const SolverConfig& cfg_;
  const CostModel& model_;
  GroupTally tally_;
  int frontier_ = 0;
  std::deque<Node> nodes_;
  std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> index_;
  std::deque<std::uint32_t> queue_[2];
  std::int64_t pushes_ = 0;
};

}  // namespace

SolveResult solve(const BinaryDataset& ds, const SupportSet& root, const SolverConfig& cfg, const CostModel& model) {
  cfg.validate();
  if (root.empty()) throw EmptySupport();
  Engine engine(ds, cfg, model);
  return engine.run(root);
}

SolveResult solve(const BinaryDataset& ds, const SolverConfig& cfg) {
  const CostModel model(cfg.lambda, static_cast<std::int64_t>(ds.n()));
  return solve(ds, ds.full_support(), cfg, model);
}

}  // namespace splitopt
