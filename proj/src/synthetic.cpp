#include "splitopt/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace splitopt {

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::uint32_t CounterRng::probability(double p) {
  if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("probability must be in [0, 1]");
  const double scaled = std::round(p * 4294967296.0);
  return scaled >= 4294967295.0 ? 0xffffffffU : static_cast<std::uint32_t>(scaled);
}

bool majority(const bool* bits, std::size_t count) {
  std::size_t ones = 0;
  for (std::size_t i = 0; i < count; ++i) ones += bits[i] ? 1 : 0;
  return 2 * ones >= count;
}

int tribes_width(int ell) {
  if (ell < 1) throw std::invalid_argument("Tribes input length must be >= 1");
  int best = 1;
  for (int w = 1; w <= ell; ++w) {
    const double value = std::pow(1.0 - std::ldexp(1.0, -w), static_cast<double>(ell) / w);
    if (value <= 0.5) best = w;
  }
  return best;
}

BinaryDataset xor_dataset() {
  return BinaryDataset::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
}

namespace {

Tree random_tree(CounterRng& rng, std::size_t k, int depth, std::vector<bool>& used) {
  if (depth == 0) return Tree::leaf(rng.bit() ? 1 : 0);
  std::size_t f = 0;
  do {
    f = static_cast<std::size_t>(rng.below(k));
  } while (used[f]);
  used[f] = true;
  Tree a = random_tree(rng, k, depth - 1, used);
  Tree b = random_tree(rng, k, depth - 1, used);
  used[f] = false;
  return Tree::split(f, std::move(a), std::move(b));
}

int route(const Tree& t, const std::vector<bool>& x) {
  const Tree* node = &t;
  while (!node->is_leaf()) node = x[node->feature()] ? &node->on_true() : &node->on_false();
  return node->prediction();
}

BinaryDataset from_bits(const std::vector<std::vector<bool>>& rows, const std::vector<int>& labels) {
  const std::size_t n = rows.size();
  const std::size_t k = rows.front().size();
  std::vector<Bitset> features(k, Bitset(n));
  Bitset y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < k; ++f) features[f].set(r, rows[r][f]);
    y.set(r, labels[r] == 1);
  }
  return BinaryDataset(std::move(features), std::move(y));
}

std::vector<std::vector<bool>> uniform_rows(CounterRng& rng, std::size_t n, std::size_t k) {
  std::vector<std::vector<bool>> rows(n, std::vector<bool>(k));
  for (auto& row : rows) {
    for (std::size_t f = 0; f < k; ++f) row[f] = rng.bit();
  }
  return rows;
}

bool block_majority(const std::vector<bool>& x, std::size_t begin, std::size_t end) {
  std::size_t ones = 0;
  for (std::size_t i = begin; i < end; ++i) ones += x[i] ? 1 : 0;
  return 2 * ones >= end - begin;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.kind == SyntheticKind::Xor) return SyntheticData{xor_dataset(), 1.0, 0.5, std::nullopt};
  if (spec.n < 1) throw std::invalid_argument("n must be >= 1");
  CounterRng rng(spec.seed);
  const std::uint32_t noise = CounterRng::probability(spec.noise);
  std::vector<int> labels(spec.n);
  std::vector<std::vector<bool>> rows;
  std::optional<Tree> planted;

  switch (spec.kind) {
    case SyntheticKind::XorMajority: {
      if (spec.depth < 2) throw std::invalid_argument("xor_majority needs d >= 2");
      const auto d = static_cast<std::size_t>(spec.depth);
      rows = uniform_rows(rng, spec.n, 2 * d);
      for (std::size_t r = 0; r < spec.n; ++r) {
        const auto& x = rows[r];
        const bool clean = x[0] != block_majority(x, 1, d);
        labels[r] = rng.chance(noise) ? block_majority(x, d, 2 * d) : clean;
      }
      break;
    }
    case SyntheticKind::TribesMajority: {
      if (spec.lookahead < 1 || spec.depth < 1) throw std::invalid_argument("tribes_majority needs dl, d >= 1");
      const auto ell = static_cast<std::size_t>(spec.lookahead);
      const auto w = static_cast<std::size_t>(tribes_width(spec.lookahead));
      const std::size_t t = ell / w;
      const std::size_t k = ell + 2 * static_cast<std::size_t>(spec.depth);
      rows = uniform_rows(rng, spec.n, k);
      for (std::size_t r = 0; r < spec.n; ++r) {
        const auto& x = rows[r];
        bool tribes = false;
        for (std::size_t block = 0; block < t && !tribes; ++block) {
          bool all = true;
          for (std::size_t i = block * w; i < (block + 1) * w; ++i) all = all && x[i];
          tribes = all;
        }
        labels[r] = rng.chance(noise) ? block_majority(x, ell, k) : tribes;
      }
      break;
    }
    case SyntheticKind::PlantedTree: {
      if (spec.depth < 0 || spec.k < static_cast<std::size_t>(spec.depth) || spec.k == 0) {
        throw std::invalid_argument("planted needs 0 <= d <= k");
      }
      std::vector<bool> used(spec.k, false);
      planted = random_tree(rng, spec.k, spec.depth, used);
      rows = uniform_rows(rng, spec.n, spec.k);
      for (std::size_t r = 0; r < spec.n; ++r) {
        const int clean = route(*planted, rows[r]);
        labels[r] = rng.chance(noise) ? 1 - clean : clean;
      }
      break;
    }
    case SyntheticKind::Xor:
      break;
  }
  return SyntheticData{from_bits(rows, labels), 1.0 - spec.noise, 0.5 + spec.noise, planted};
}

BinaryDataset random_dataset(std::size_t n, std::size_t k, std::uint64_t seed) {
  CounterRng rng(mix64(seed) ^ 0x5eedULL);
  auto rows = uniform_rows(rng, n, k);
  std::vector<int> labels(n);
  if (rng.below(4) == 0) {
    for (auto& y : labels) y = rng.bit() ? 1 : 0;
  } else {
    std::vector<bool> used(k, false);
    const int depth = static_cast<int>(std::min<std::uint64_t>(1 + rng.below(3), k));
    const Tree t = random_tree(rng, k, depth, used);
    const std::uint32_t flip = CounterRng::probability(0.1);
    for (std::size_t r = 0; r < n; ++r) {
      const int clean = route(t, rows[r]);
      labels[r] = rng.chance(flip) ? 1 - clean : clean;
    }
  }
  return from_bits(rows, labels);
}

namespace {

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw std::invalid_argument("bad number '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw std::invalid_argument("bad integer '" + text + "'");
  return v;
}

}  // namespace

SyntheticSpec SyntheticSpec::parse(const std::string& text) {
  SyntheticSpec spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "xor") {
    spec.kind = SyntheticKind::Xor;
  } else if (kind == "xor_majority") {
    spec.kind = SyntheticKind::XorMajority;
  } else if (kind == "tribes_majority") {
    spec.kind = SyntheticKind::TribesMajority;
  } else if (kind == "planted") {
    spec.kind = SyntheticKind::PlantedTree;
  } else {
    throw std::invalid_argument("unknown generator '" + kind + "'");
  }
  if (colon == std::string::npos) return spec;
  std::size_t start = colon + 1;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "d") {
      spec.depth = static_cast<int>(parse_unsigned(value));
    } else if (key == "dl") {
      spec.lookahead = static_cast<int>(parse_unsigned(value));
    } else if (key == "eps") {
      spec.noise = parse_double(value);
    } else if (key == "n") {
      spec.n = parse_unsigned(value);
    } else if (key == "k") {
      spec.k = parse_unsigned(value);
    } else if (key == "seed") {
      spec.seed = parse_unsigned(value);
    } else {
      throw std::invalid_argument("unknown generator parameter '" + key + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return spec;
}

}  // namespace splitopt
