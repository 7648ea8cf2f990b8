#include "splitopt/rashomon.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "splitopt/errors.hpp"
#include "splitopt/greedy.hpp"

namespace splitopt {

void RashomonConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (depth_budget < 0) throw std::invalid_argument("depth budget must be >= 0");
  if (lookahead_depth < 1 || lookahead_depth > depth_budget) {
    throw std::invalid_argument("lookahead depth must satisfy 1 <= lookahead <= depth budget");
  }
  if (max_trees < 1) throw std::invalid_argument("tree cap must be >= 1");
}

namespace {

struct Entry {
  Tree tree;
  Cost cost;
};
using EntryList = std::shared_ptr<const std::vector<Entry>>;

struct CellKey {
  std::uint64_t hash;
  int remaining;
  Bitset mask;

  friend bool operator==(const CellKey& a, const CellKey& b) {
    return a.hash == b.hash && a.remaining == b.remaining && a.mask == b.mask;
  }
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(mix64(k.hash + static_cast<std::uint64_t>(k.remaining)));
  }
};

struct Cell {
  bool has_optimum = false;
  Cost optimum;
  EntryList list;
  Cost list_budget;
};

// Budgeted enumeration over (support, remaining depth) cells. In tree mode
// a cell lists canonical trees. In prefix mode it lists prefix shapes: a
// leaf with remaining depth 0 stands for the greedy completion there, any
// other leaf for a plain majority leaf.
class Enumerator {
 public:
  enum class Mode { Trees, Prefixes };

  Enumerator(const BinaryDataset& ds, const CostModel& model, std::uint64_t max_trees, Mode mode,
             int completion_depth = 0)
      : ds_(ds), model_(model), max_trees_(max_trees), mode_(mode), completion_depth_(completion_depth) {}

  Cost optimum(const SupportSet& s, int r) {
    Cell& cell = cell_for(s, r);
    if (cell.has_optimum) return cell.optimum;
    Cost best;
    if (mode_ == Mode::Prefixes && r == 0) {
      best = greedy_fit(ds_, s, completion_depth_, model_).cost;
    } else {
      best = model_.leaf(s.minority());
      const Cost two_leaves = model_.per_leaf() + model_.per_leaf();
      if (r > 0 && (mode_ == Mode::Prefixes || best > two_leaves)) {
        for (std::size_t f = 0; f < ds_.k(); ++f) {
          if (!separates(s, f)) continue;
          auto [on, off] = split_support(ds_, s, f);
          const Cost lo = optimum(on, r - 1);
          if (lo >= best) continue;
          best = min(best, lo + optimum(off, r - 1));
        }
      }
    }
    Cell& again = cell_for(s, r);
    again.has_optimum = true;
    again.optimum = best;
    return best;
  }

  // Entries with cost <= budget come first; the list may hold more.
  EntryList list(const SupportSet& s, int r, Cost budget) {
    {
      Cell& cell = cell_for(s, r);
      if (cell.list && budget <= cell.list_budget) return cell.list;
    }
    auto out = std::make_shared<std::vector<Entry>>();
    if (mode_ == Mode::Prefixes) {
      const Cost own = r == 0 ? optimum(s, 0) : model_.leaf(s.minority());
      if (own <= budget) out->push_back(Entry{Tree::leaf(s.majority_label()), own});
    } else {
      const Cost zero = model_.leaf(s.pos_count());
      const Cost one = model_.leaf(s.neg_count());
      if (zero <= budget) out->push_back(Entry{Tree::leaf(0), zero});
      if (one <= budget) out->push_back(Entry{Tree::leaf(1), one});
    }
    if (r > 0) {
      for (std::size_t f = 0; f < ds_.k(); ++f) {
        if (!separates(s, f)) continue;
        auto [on, off] = split_support(ds_, s, f);
        const Cost lo_on = optimum(on, r - 1);
        const Cost lo_off = optimum(off, r - 1);
        if (lo_on + lo_off > budget) continue;
        const EntryList left = list(on, r - 1, budget - lo_off);
        const EntryList right = list(off, r - 1, budget - lo_on);
        for (const auto& l : *left) {
          if (l.cost + lo_off > budget) break;
          for (const auto& rr : *right) {
            const Cost c = l.cost + rr.cost;
            if (c > budget) break;
            if (mode_ == Mode::Trees && l.tree.is_leaf() && rr.tree.is_leaf() &&
                l.tree.prediction() == rr.tree.prediction()) {
              continue;
            }
            out->push_back(Entry{Tree::split(f, l.tree, rr.tree), c});
            if (out->size() > max_trees_) throw BudgetExceeded(max_trees_);
          }
        }
      }
    }
    std::stable_sort(out->begin(), out->end(), [](const Entry& a, const Entry& b) { return a.cost < b.cost; });
    Cell& cell = cell_for(s, r);
    cell.list = out;
    cell.list_budget = budget;
    return cell.list;
  }

 private:
  bool separates(const SupportSet& s, std::size_t f) const {
    const auto on = count_and(s.mask(), ds_.feature(f));
    return on != 0 && on != static_cast<std::size_t>(s.count());
  }

  Cell& cell_for(const SupportSet& s, int r) { return cells_[CellKey{s.mask().hash(), r, s.mask()}]; }

  const BinaryDataset& ds_;
  const CostModel& model_;
  std::uint64_t max_trees_;
  Mode mode_;
  int completion_depth_;
  std::unordered_map<CellKey, Cell, CellKeyHash> cells_;
};

TreeSet to_tree_set(const EntryList& list, Cost bound) {
  TreeSet out;
  out.bound = bound;
  for (const auto& e : *list) {
    if (e.cost > bound) break;
    out.trees.push_back(e.tree);
    out.costs.push_back(e.cost);
  }
  return out;
}

}  // namespace

TreeSet enumerate_rashomon(const BinaryDataset& ds, const SupportSet& s, int depth, const CostModel& model, Cost bound,
                           std::uint64_t max_trees) {
  if (depth < 0) throw std::invalid_argument("depth budget must be >= 0");
  if (s.empty()) throw EmptySupport();
  Enumerator e(ds, model, max_trees, Enumerator::Mode::Trees);
  return to_tree_set(e.list(s, depth, bound), bound);
}

TreeSet enumerate_rashomon(const BinaryDataset& ds, const SupportSet& s, int depth, double lambda,
                           std::int64_t n_global, double bound, std::uint64_t max_trees) {
  const CostModel model(lambda, n_global);
  return enumerate_rashomon(ds, s, depth, model, model.slack(bound), max_trees);
}

namespace {

// Positions of Leaf{0} and Leaf{1} in an attachment, or -1.
std::array<std::int64_t, 2> leaf_positions(const TreeSet& set) {
  std::array<std::int64_t, 2> pos{-1, -1};
  for (std::size_t i = 0; i < set.trees.size(); ++i) {
    if (set.trees[i].is_leaf()) pos[static_cast<std::size_t>(set.trees[i].prediction())] = static_cast<std::int64_t>(i);
  }
  return pos;
}

// Flat positions (left * |right| + right) of equal-leaf pairs, ascending.
std::vector<std::uint64_t> excluded_pairs(const TreeSet& left, const TreeSet& right) {
  const auto a = leaf_positions(left);
  const auto b = leaf_positions(right);
  std::vector<std::uint64_t> out;
  for (std::size_t v = 0; v < 2; ++v) {
    if (a[v] >= 0 && b[v] >= 0) {
      out.push_back(static_cast<std::uint64_t>(a[v]) * right.size() + static_cast<std::uint64_t>(b[v]));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw BudgetExceeded(UINT64_MAX, "tree count overflows 64 bits");
  return out;
}

std::uint64_t count_node(Prefix& prefix, int id, const std::vector<TreeSet>& attachments) {
  PrefixNode& node = prefix.nodes[static_cast<std::size_t>(id)];
  if (node.attachment >= 0) {
    node.count = attachments[static_cast<std::size_t>(node.attachment)].size();
    return node.count;
  }
  const std::uint64_t left = count_node(prefix, node.on_true, attachments);
  const std::uint64_t right = count_node(prefix, node.on_false, attachments);
  PrefixNode& n = prefix.nodes[static_cast<std::size_t>(id)];
  const auto& lt = prefix.nodes[static_cast<std::size_t>(n.on_true)];
  const auto& rt = prefix.nodes[static_cast<std::size_t>(n.on_false)];
  std::uint64_t total = checked_mul(left, right);
  if (lt.attachment >= 0 && rt.attachment >= 0) {
    total -= excluded_pairs(attachments[static_cast<std::size_t>(lt.attachment)],
                            attachments[static_cast<std::size_t>(rt.attachment)])
                 .size();
  }
  n.count = total;
  return total;
}

Tree decode(const Prefix& prefix, int id, std::uint64_t index, const std::vector<TreeSet>& attachments) {
  const PrefixNode& node = prefix.nodes[static_cast<std::size_t>(id)];
  if (node.attachment >= 0) return attachments[static_cast<std::size_t>(node.attachment)].trees.at(index);
  const PrefixNode& lt = prefix.nodes[static_cast<std::size_t>(node.on_true)];
  const PrefixNode& rt = prefix.nodes[static_cast<std::size_t>(node.on_false)];
  std::uint64_t left_index = 0;
  std::uint64_t right_index = 0;
  if (lt.attachment >= 0 && rt.attachment >= 0) {
    const auto& a = attachments[static_cast<std::size_t>(lt.attachment)];
    const auto& b = attachments[static_cast<std::size_t>(rt.attachment)];
    std::uint64_t raw = index;
    for (auto skipped : excluded_pairs(a, b)) {
      if (raw >= skipped) ++raw;
    }
    left_index = raw / b.size();
    right_index = raw % b.size();
  } else {
    left_index = index / rt.count;
    right_index = index % rt.count;
  }
  return Tree::split(static_cast<std::size_t>(node.feature), decode(prefix, node.on_true, left_index, attachments),
                     decode(prefix, node.on_false, right_index, attachments));
}

std::string describe_path(const std::vector<std::pair<std::size_t, bool>>& path) {
  std::string out = "root";
  for (const auto& [f, side] : path) out += "/" + std::to_string(f) + (side ? "=1" : "=0");
  return out;
}

}  // namespace

std::uint64_t enumerate_subtree_counts(Prefix& prefix, const std::vector<TreeSet>& attachments) {
  if (prefix.nodes.empty()) return 0;
  return count_node(prefix, 0, attachments);
}

void rset_count(PrefixForest& forest) {
  forest.p_counts.clear();
  std::uint64_t running = 0;
  for (const auto& p : forest.prefixes) {
    if (__builtin_add_overflow(running, p.nodes.front().count, &running)) {
      throw BudgetExceeded(UINT64_MAX, "tree count overflows 64 bits");
    }
    forest.p_counts.push_back(running);
  }
  forest.t_count = running;
}

PrefixForest resplit(const BinaryDataset& ds, const RashomonConfig& cfg) {
  cfg.validate();
  const CostModel model(cfg.lambda, static_cast<std::int64_t>(ds.n()));
  const SupportSet root = ds.full_support();
  const int completion = cfg.depth_budget - cfg.lookahead_depth;
  Enumerator prefixes(ds, model, cfg.max_trees, Enumerator::Mode::Prefixes, completion);
  Enumerator subtrees(ds, model, cfg.max_trees, Enumerator::Mode::Trees);

  PrefixForest forest;
  forest.config = cfg;
  forest.n_global = static_cast<std::int64_t>(ds.n());
  forest.lookahead_optimum = prefixes.optimum(root, cfg.lookahead_depth);
  forest.lookahead_optimum_value = model.objective(forest.lookahead_optimum);
  const Cost budget = forest.lookahead_optimum + model.slack(cfg.epsilon);
  const EntryList shapes = prefixes.list(root, cfg.lookahead_depth, budget);

  // Attachments are shared by (support, kind).
  std::unordered_map<CellKey, int, CellKeyHash> attachment_ids;
  std::vector<std::pair<std::size_t, bool>> path;

  auto attach = [&](const SupportSet& s, int level) -> int {
    const bool boundary = level == cfg.lookahead_depth;
    CellKey key{s.mask().hash(), boundary ? 1 : 0, s.mask()};
    if (const auto it = attachment_ids.find(key); it != attachment_ids.end()) return it->second;
    TreeSet set;
    try {
      if (boundary) {
        const Cost greedy = greedy_fit(ds, s, completion, model).cost;
        set = to_tree_set(subtrees.list(s, completion, greedy), greedy);
      } else {
        const Cost leaf = model.leaf(s.minority());
        set = to_tree_set(subtrees.list(s, 0, leaf), leaf);
      }
    } catch (const BudgetExceeded&) {
      throw BudgetExceeded(cfg.max_trees, "prefix leaf " + describe_path(path));
    }
    const int id = static_cast<int>(forest.attachments.size());
    forest.attachments.push_back(std::move(set));
    attachment_ids.emplace(std::move(key), id);
    return id;
  };

  for (const auto& entry : *shapes) {
    if (entry.cost > budget) break;
    Prefix prefix;
    prefix.shape = entry.tree;
    prefix.cost = entry.cost;
    auto build = [&](auto&& self, const Tree& t, const SupportSet& s, int level) -> int {
      const int id = static_cast<int>(prefix.nodes.size());
      prefix.nodes.emplace_back();
      if (t.is_leaf()) {
        prefix.nodes[static_cast<std::size_t>(id)].attachment = attach(s, level);
        return id;
      }
      auto [on, off] = split_support(ds, s, t.feature());
      path.emplace_back(t.feature(), true);
      const int l = self(self, t.on_true(), on, level + 1);
      path.back().second = false;
      const int r = self(self, t.on_false(), off, level + 1);
      path.pop_back();
      auto& node = prefix.nodes[static_cast<std::size_t>(id)];
      node.feature = static_cast<int>(t.feature());
      node.on_true = l;
      node.on_false = r;
      return id;
    };
    build(build, prefix.shape, root, 0);
    if (enumerate_subtree_counts(prefix, forest.attachments) == 0) continue;
    forest.prefixes.push_back(std::move(prefix));
  }
  rset_count(forest);
  return forest;
}

Tree tree_at_index(const PrefixForest& forest, std::uint64_t index) {
  if (index >= forest.t_count) throw IndexOutOfRange(index, forest.t_count);
  const auto it = std::upper_bound(forest.p_counts.begin(), forest.p_counts.end(), index);
  const auto p = static_cast<std::size_t>(it - forest.p_counts.begin());
  const std::uint64_t local = index - (p == 0 ? 0 : forest.p_counts[p - 1]);
  return decode(forest.prefixes[p], 0, local, forest.attachments);
}

namespace {

std::string prefix_file_name(std::size_t i) {
  std::ostringstream out;
  out << "prefix_" << std::setw(5) << std::setfill('0') << i << ".json";
  return out.str();
}

nlohmann::json node_to_json(const Prefix& prefix, int id, const PrefixForest& forest,
                            const std::vector<std::string>& names, const CostModel& model) {
  const PrefixNode& node = prefix.nodes[static_cast<std::size_t>(id)];
  nlohmann::json out;
  out["count"] = node.count;
  if (node.attachment >= 0) {
    const TreeSet& set = forest.attachments[static_cast<std::size_t>(node.attachment)];
    nlohmann::json trees = nlohmann::json::array();
    nlohmann::json objectives = nlohmann::json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
      trees.push_back(tree_to_json(set.trees[i], &names));
      objectives.push_back(model.objective(set.costs[i]));
    }
    out["attachment"] = std::move(trees);
    out["objectives"] = std::move(objectives);
    return out;
  }
  out["feature"] = names[static_cast<std::size_t>(node.feature)];
  out["true"] = node_to_json(prefix, node.on_true, forest, names, model);
  out["false"] = node_to_json(prefix, node.on_false, forest, names, model);
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw MissingFile(path.string());
  out << doc.dump(1) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string(), e.what());
  }
}

int node_from_json(const nlohmann::json& doc, Prefix& prefix, std::vector<TreeSet>& attachments,
                   const std::vector<std::string>& names, const std::string& where) {
  if (!doc.is_object() || !doc.contains("count")) throw SchemaError(where, "prefix node needs a count");
  const int id = static_cast<int>(prefix.nodes.size());
  prefix.nodes.emplace_back();
  prefix.nodes.back().count = doc.at("count").get<std::uint64_t>();
  if (doc.contains("attachment")) {
    TreeSet set;
    for (const auto& t : doc.at("attachment")) set.trees.push_back(tree_from_json(t, &names));
    prefix.nodes[static_cast<std::size_t>(id)].attachment = static_cast<int>(attachments.size());
    attachments.push_back(std::move(set));
    return id;
  }
  if (!doc.contains("feature") || !doc.contains("true") || !doc.contains("false")) {
    throw SchemaError(where, "prefix node needs feature, true, false");
  }
  const auto name = doc.at("feature").get<std::string>();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw SchemaError(where + "/feature", "unknown feature " + name);
  const int l = node_from_json(doc.at("true"), prefix, attachments, names, where + "/true");
  const int r = node_from_json(doc.at("false"), prefix, attachments, names, where + "/false");
  auto& node = prefix.nodes[static_cast<std::size_t>(id)];
  node.feature = static_cast<int>(it - names.begin());
  node.on_true = l;
  node.on_false = r;
  return id;
}

}  // namespace

void write_forest(const PrefixForest& forest, const BinaryDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const CostModel model(forest.config.lambda, forest.n_global);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < forest.prefixes.size(); ++i) {
    const Prefix& p = forest.prefixes[i];
    nlohmann::json doc;
    doc["index"] = i;
    doc["count"] = p.nodes.front().count;
    doc["lookahead_objective"] = model.objective(p.cost);
    doc["root"] = node_to_json(p, 0, forest, ds.feature_names(), model);
    write_json(dir / prefix_file_name(i), doc);
    files.push_back(prefix_file_name(i));
  }
  nlohmann::json manifest;
  manifest["format"] = "splitopt-forest";
  manifest["version"] = 1;
  manifest["config"] = {{"lambda", forest.config.lambda},
                        {"epsilon", forest.config.epsilon},
                        {"depth_budget", forest.config.depth_budget},
                        {"lookahead_depth", forest.config.lookahead_depth},
                        {"max_trees", forest.config.max_trees}};
  manifest["n"] = forest.n_global;
  manifest["dataset_fingerprint"] = ds.fingerprint();
  manifest["feature_names"] = ds.feature_names();
  manifest["lookahead_optimum"] = forest.lookahead_optimum_value;
  manifest["p_counts"] = forest.p_counts;
  manifest["t_count"] = forest.t_count;
  manifest["prefixes"] = files;
  write_json(dir / "manifest.json", manifest);
}

ForestReader::ForestReader(const std::filesystem::path& dir) : dir_(dir) {
  manifest_ = read_json(dir / "manifest.json");
  try {
    p_counts_ = manifest_.at("p_counts").get<std::vector<std::uint64_t>>();
    t_count_ = manifest_.at("t_count").get<std::uint64_t>();
    feature_names_ = manifest_.at("feature_names").get<std::vector<std::string>>();
    if (manifest_.at("prefixes").size() != p_counts_.size()) throw SchemaError("/prefixes", "length mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("manifest.json", e.what());
  }
  if (!p_counts_.empty() && p_counts_.back() != t_count_) throw SchemaError("/t_count", "differs from p_counts");
}

Tree ForestReader::tree_at_index(std::uint64_t index) const {
  if (index >= t_count_) throw IndexOutOfRange(index, t_count_);
  const auto it = std::upper_bound(p_counts_.begin(), p_counts_.end(), index);
  const auto p = static_cast<std::size_t>(it - p_counts_.begin());
  const std::uint64_t local = index - (p == 0 ? 0 : p_counts_[p - 1]);
  const auto file = manifest_.at("prefixes").at(p).get<std::string>();
  const nlohmann::json doc = read_json(dir_ / file);
  Prefix prefix;
  std::vector<TreeSet> attachments;
  node_from_json(doc.at("root"), prefix, attachments, feature_names_, file);
  return decode(prefix, 0, local, attachments);
}

}  // namespace splitopt
