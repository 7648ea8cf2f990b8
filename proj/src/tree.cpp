#include "splitopt/tree.hpp"

#include <algorithm>
#include <stdexcept>

#include "splitopt/errors.hpp"

namespace splitopt {

Tree Tree::leaf(int prediction) {
  if (prediction != 0 && prediction != 1) throw std::invalid_argument("leaf prediction must be 0 or 1");
  static const Tree zero(std::make_shared<const Node>(Node{-1, 0, 1, 0, {}}));
  static const Tree one(std::make_shared<const Node>(Node{-1, 1, 1, 0, {}}));
  return prediction == 0 ? zero : one;
}

Tree Tree::split(std::size_t feature, Tree on_true, Tree on_false) {
  Node node;
  node.feature = static_cast<int>(feature);
  node.leaves = on_true.num_leaves() + on_false.num_leaves();
  node.depth = 1 + std::max(on_true.depth(), on_false.depth());
  node.children = {std::move(on_true), std::move(on_false)};
  return Tree(std::make_shared<const Node>(std::move(node)));
}

namespace {

void encode_into(const Tree& t, std::string& out) {
  if (t.is_leaf()) {
    out += t.prediction() == 1 ? '1' : '0';
    return;
  }
  out += '(';
  out += std::to_string(t.feature());
  out += ' ';
  encode_into(t.on_true(), out);
  out += ' ';
  encode_into(t.on_false(), out);
  out += ')';
}

}  // namespace

std::string Tree::encode() const {
  std::string out;
  encode_into(*this, out);
  return out;
}

bool operator==(const Tree& a, const Tree& b) {
  if (a.node_ == b.node_) return true;
  if (a.is_leaf() || b.is_leaf()) return a.is_leaf() && b.is_leaf() && a.prediction() == b.prediction();
  return a.feature() == b.feature() && a.num_leaves() == b.num_leaves() && a.on_true() == b.on_true() &&
         a.on_false() == b.on_false();
}

int predict(const Tree& t, const BinaryDataset& ds, std::size_t row) {
  if (row >= ds.n()) throw RowOutOfRange(row, ds.n());
  const Tree* node = &t;
  while (!node->is_leaf()) {
    if (node->feature() >= ds.k()) throw FeatureOutOfRange(node->feature(), ds.k());
    node = ds.value(row, node->feature()) ? &node->on_true() : &node->on_false();
  }
  return node->prediction();
}

std::vector<int> predict_all(const Tree& t, const BinaryDataset& ds) {
  std::vector<int> out(ds.n());
  for (std::size_t r = 0; r < ds.n(); ++r) out[r] = predict(t, ds, r);
  return out;
}

namespace {

std::int64_t misclassified_mask(const Tree& t, const BinaryDataset& ds, const Bitset& mask) {
  if (t.is_leaf()) {
    const Bitset& wrong = t.prediction() == 1 ? ds.negative_labels() : ds.labels();
    return static_cast<std::int64_t>(count_and(mask, wrong));
  }
  if (t.feature() >= ds.k()) throw FeatureOutOfRange(t.feature(), ds.k());
  const Bitset& bits = ds.feature(t.feature());
  return misclassified_mask(t.on_true(), ds, mask & bits) + misclassified_mask(t.on_false(), ds, mask.and_not(bits));
}

}  // namespace

std::int64_t misclassified(const Tree& t, const BinaryDataset& ds, const SupportSet& s) {
  return misclassified_mask(t, ds, s.mask());
}

Objective objective(const Tree& t, const BinaryDataset& ds, const SupportSet& s, double lambda, std::int64_t n_global) {
  Objective o;
  o.misclassified = misclassified(t, ds, s);
  o.leaves = t.num_leaves();
  o.lambda = lambda;
  o.n_global = n_global;
  o.value = static_cast<double>(o.misclassified) / static_cast<double>(n_global) +
            lambda * static_cast<double>(o.leaves);
  return o;
}

Objective objective(const Tree& t, const BinaryDataset& ds, double lambda) {
  return objective(t, ds, ds.full_support(), lambda, static_cast<std::int64_t>(ds.n()));
}

Cost tree_cost(const Tree& t, const BinaryDataset& ds, const SupportSet& s, const CostModel& model) {
  return model.cost(misclassified(t, ds, s), t.num_leaves());
}

std::int64_t num_leaves(const Tree& t) { return t.num_leaves(); }
int depth(const Tree& t) { return t.depth(); }

Tree canonicalize(const Tree& t) {
  if (t.is_leaf()) return t;
  Tree left = canonicalize(t.on_true());
  Tree right = canonicalize(t.on_false());
  if (left.is_leaf() && right.is_leaf() && left.prediction() == right.prediction()) return left;
  if (left == t.on_true() && right == t.on_false()) return t;
  return Tree::split(t.feature(), std::move(left), std::move(right));
}

bool is_canonical(const Tree& t) {
  if (t.is_leaf()) return true;
  const auto& a = t.on_true();
  const auto& b = t.on_false();
  if (a.is_leaf() && b.is_leaf() && a.prediction() == b.prediction()) return false;
  return is_canonical(a) && is_canonical(b);
}

nlohmann::json tree_to_json(const Tree& t, const std::vector<std::string>* feature_names) {
  if (t.is_leaf()) return nlohmann::json{{"leaf", t.prediction()}};
  nlohmann::json out = nlohmann::json::object();
  if (feature_names != nullptr) {
    if (t.feature() >= feature_names->size()) throw FeatureOutOfRange(t.feature(), feature_names->size());
    out["feature"] = (*feature_names)[t.feature()];
  } else {
    out["feature"] = t.feature();
  }
  out["true"] = tree_to_json(t.on_true(), feature_names);
  out["false"] = tree_to_json(t.on_false(), feature_names);
  return out;
}

namespace {

constexpr int kMaxJsonDepth = 256;

Tree parse_node(const nlohmann::json& doc, const std::vector<std::string>* names, const std::string& path,
                int level) {
  if (level > kMaxJsonDepth) throw SchemaError(path, "tree nested too deeply");
  if (!doc.is_object()) throw SchemaError(path, "expected an object");
  if (doc.contains("leaf")) {
    const auto& v = doc.at("leaf");
    if (doc.size() != 1 || !v.is_number_integer() || (v.get<std::int64_t>() != 0 && v.get<std::int64_t>() != 1)) {
      throw SchemaError(path + "/leaf", "leaf must be exactly {\"leaf\": 0|1}");
    }
    return Tree::leaf(v.get<int>());
  }
  if (!doc.contains("feature") || !doc.contains("true") || !doc.contains("false") || doc.size() != 3) {
    throw SchemaError(path, "internal node needs exactly feature, true, false");
  }
  const auto& f = doc.at("feature");
  std::size_t feature = 0;
  if (f.is_number_unsigned()) {
    feature = f.get<std::size_t>();
    if (names != nullptr && feature >= names->size()) throw SchemaError(path + "/feature", "index out of range");
  } else if (f.is_string()) {
    if (names == nullptr) throw SchemaError(path + "/feature", "feature names unavailable");
    const auto name = f.get<std::string>();
    const auto it = std::find(names->begin(), names->end(), name);
    if (it == names->end()) throw SchemaError(path + "/feature", "unknown feature '" + name + "'");
    feature = static_cast<std::size_t>(it - names->begin());
  } else {
    throw SchemaError(path + "/feature", "expected a name or a non-negative index");
  }
  return Tree::split(feature, parse_node(doc.at("true"), names, path + "/true", level + 1),
                     parse_node(doc.at("false"), names, path + "/false", level + 1));
}

}  // namespace

Tree tree_from_json(const nlohmann::json& doc, const std::vector<std::string>* feature_names) {
  return parse_node(doc, feature_names, "", 0);
}

nlohmann::json model_to_json(const Model& m) {
  const auto* names = m.feature_names.empty() ? nullptr : &m.feature_names;
  return nlohmann::json{
      {"algorithm", m.algorithm},
      {"lambda", m.lambda},
      {"depth_budget", m.depth_budget},
      {"lookahead_depth", m.lookahead_depth},
      {"objective",
       {{"misclassified", m.objective.misclassified},
        {"leaves", m.objective.leaves},
        {"n", m.objective.n_global},
        {"value", m.objective.value}}},
      {"feature_names", m.feature_names},
      {"dataset_fingerprint", m.dataset_fingerprint},
      {"tree", tree_to_json(m.tree, names)},
  };
}

Model model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("", "model document must be an object");
  Model m;
  try {
    m.algorithm = doc.value("algorithm", std::string{});
    m.lambda = doc.at("lambda").get<double>();
    m.depth_budget = doc.at("depth_budget").get<int>();
    m.lookahead_depth = doc.value("lookahead_depth", 0);
    m.feature_names = doc.value("feature_names", std::vector<std::string>{});
    m.dataset_fingerprint = doc.value("dataset_fingerprint", std::string{});
    const auto& o = doc.at("objective");
    m.objective.misclassified = o.at("misclassified").get<std::int64_t>();
    m.objective.leaves = o.at("leaves").get<std::int64_t>();
    m.objective.n_global = o.value("n", std::int64_t{1});
    m.objective.value = o.at("value").get<double>();
    m.objective.lambda = m.lambda;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("", e.what());
  }
  if (!doc.contains("tree")) throw SchemaError("/tree", "missing");
  m.tree = tree_from_json(doc.at("tree"), m.feature_names.empty() ? nullptr : &m.feature_names);
  return m;
}

}  // namespace splitopt
