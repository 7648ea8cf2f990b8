#include "splitopt/binarize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "splitopt/errors.hpp"

namespace splitopt {

namespace {

std::vector<double> sorted_distinct(const std::vector<double>& column) {
  std::vector<double> v = column;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Thresholds at or above the column maximum give a constant feature.
void drop_constant(std::vector<double>& thresholds, const std::vector<double>& column) {
  if (column.empty()) {
    thresholds.clear();
    return;
  }
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  std::erase_if(thresholds, [&](double t) { return t < *lo || t >= *hi; });
}

const char* method_name(BinarizeMethod m) {
  switch (m) {
    case BinarizeMethod::Quantile:
      return "quantile";
    case BinarizeMethod::Exhaustive:
      return "exhaustive";
    case BinarizeMethod::ThresholdGuess:
      return "threshold_guess";
  }
  return "exhaustive";
}

int parse_int(const std::string& text, const std::string& what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad " + what + " in binarizer spec: '" + text + "'");
  }
  return value;
}

}  // namespace

BinarizerSpec BinarizerSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string::npos ? std::string::npos : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  BinarizerSpec spec;
  if (parts[0] == "exhaustive" && parts.size() == 1) {
    spec.method = BinarizeMethod::Exhaustive;
  } else if (parts[0] == "quantile" && parts.size() <= 2) {
    spec.method = BinarizeMethod::Quantile;
    if (parts.size() == 2) spec.quantiles = parse_int(parts[1], "quantile count");
  } else if ((parts[0] == "guess" || parts[0] == "threshold_guess") && parts.size() <= 3) {
    spec.method = BinarizeMethod::ThresholdGuess;
    if (parts.size() >= 2) spec.n_estimators = parse_int(parts[1], "estimator count");
    if (parts.size() == 3) spec.max_thresholds = parse_int(parts[2], "threshold cap");
  } else {
    throw std::invalid_argument("unknown binarizer spec '" + text + "'");
  }
  spec.validate();
  return spec;
}

std::string BinarizerSpec::to_string() const {
  switch (method) {
    case BinarizeMethod::Quantile:
      return "quantile:" + std::to_string(quantiles);
    case BinarizeMethod::Exhaustive:
      return "exhaustive";
    case BinarizeMethod::ThresholdGuess:
      return "guess:" + std::to_string(n_estimators) +
             (max_thresholds > 0 ? ":" + std::to_string(max_thresholds) : std::string{});
  }
  return "exhaustive";
}

void BinarizerSpec::validate() const {
  if (quantiles < 1) throw std::invalid_argument("quantile count must be >= 1");
  if (n_estimators < 1) throw std::invalid_argument("estimator count must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be > 0");
  if (max_thresholds < 0) throw std::invalid_argument("threshold cap must be >= 0");
}

std::string format_threshold(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<double> exhaustive_thresholds(const std::vector<double>& column) {
  const auto v = sorted_distinct(column);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) out.push_back(std::midpoint(v[i], v[i + 1]));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> quantile_thresholds(const std::vector<double>& column, int q) {
  if (q < 1) throw std::invalid_argument("quantile count must be >= 1");
  if (column.empty()) return {};
  std::vector<double> v = column;
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  const double last = static_cast<double>(v.size() - 1);
  for (int i = 1; i <= q; ++i) {
    const double pos = last * static_cast<double>(i) / static_cast<double>(q + 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    out.push_back(v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  drop_constant(out, column);
  return out;
}

namespace {

struct Stump {
  std::size_t column;
  double threshold;
  double low_value;   // added when value <= threshold
  double high_value;  // added otherwise
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<std::vector<double>> guess_thresholds(const RawDataset& raw, int n_estimators, double learning_rate,
                                                  int max_thresholds) {
  raw.validate();
  const std::size_t n = raw.n();
  const std::size_t cols = raw.num_columns();
  const auto positives = static_cast<std::size_t>(std::count(raw.labels.begin(), raw.labels.end(), 1));
  if (n < 2 || positives == 0 || positives == n) throw SingleClassLabels();

  std::vector<std::vector<std::size_t>> order(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    order[c].resize(n);
    std::iota(order[c].begin(), order[c].end(), 0);
    std::stable_sort(order[c].begin(), order[c].end(),
                     [&](std::size_t a, std::size_t b) { return raw.columns[c][a] < raw.columns[c][b]; });
  }

  const double prior = static_cast<double>(positives) / static_cast<double>(n);
  const double base = std::log(prior / (1.0 - prior));
  std::vector<double> score(n, base);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<Stump> stumps;
  std::map<std::pair<std::size_t, double>, double> importance;

  for (int round = 0; round < n_estimators; ++round) {
    double g_total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double p = sigmoid(score[r]);
      grad[r] = static_cast<double>(raw.labels[r]) - p;
      hess[r] = p * (1.0 - p);
      g_total += grad[r];
    }
    // Least-squares stump on the negative gradient.
    double best_gain = 0.0;
    std::size_t best_col = cols;
    double best_threshold = 0.0;
    const double total_term = g_total * g_total / static_cast<double>(n);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& col = raw.columns[c];
      double g_left = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t r = order[c][i];
        g_left += grad[r];
        const double here = col[r];
        const double next = col[order[c][i + 1]];
        if (here == next) continue;
        const auto n_left = static_cast<double>(i + 1);
        const double n_right = static_cast<double>(n) - n_left;
        const double g_right = g_total - g_left;
        const double gain = g_left * g_left / n_left + g_right * g_right / n_right - total_term;
        if (gain > best_gain) {
          best_gain = gain;
          best_col = c;
          best_threshold = std::midpoint(here, next);
        }
      }
    }
    if (best_col == cols) break;

    double g_low = 0.0;
    double h_low = 0.0;
    double g_high = 0.0;
    double h_high = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (raw.columns[best_col][r] <= best_threshold) {
        g_low += grad[r];
        h_low += hess[r];
      } else {
        g_high += grad[r];
        h_high += hess[r];
      }
    }
    Stump stump{best_col, best_threshold, g_low / std::max(h_low, 1e-12), g_high / std::max(h_high, 1e-12)};
    for (std::size_t r = 0; r < n; ++r) {
      score[r] += learning_rate * (raw.columns[best_col][r] <= best_threshold ? stump.low_value : stump.high_value);
    }
    stumps.push_back(stump);
    importance[{best_col, best_threshold}] += best_gain;
  }

  // Drop thresholds, least important first, while the ensemble's training
  // predictions stay the same.
  std::vector<bool> reference(n);
  for (std::size_t r = 0; r < n; ++r) reference[r] = score[r] > 0.0;

  std::vector<std::tuple<double, std::size_t, double>> ranked;
  for (const auto& [key, gain] : importance) ranked.emplace_back(gain, key.first, key.second);
  std::sort(ranked.begin(), ranked.end());

  auto apply = [&](std::size_t c, double t, double sign) {
    for (const auto& s : stumps) {
      if (s.column != c || s.threshold != t) continue;
      for (std::size_t r = 0; r < n; ++r) {
        score[r] += sign * learning_rate * (raw.columns[c][r] <= t ? s.low_value : s.high_value);
      }
    }
  };

  std::vector<std::tuple<double, std::size_t, double>> kept;
  for (const auto& [gain, c, t] : ranked) {
    apply(c, t, -1.0);
    bool same = true;
    for (std::size_t r = 0; r < n && same; ++r) same = (score[r] > 0.0) == reference[r];
    if (!same) {
      apply(c, t, +1.0);
      kept.emplace_back(gain, c, t);
    }
  }
  if (max_thresholds > 0 && kept.size() > static_cast<std::size_t>(max_thresholds)) {
    // kept is in ascending importance; retain the tail.
    kept.erase(kept.begin(), kept.end() - max_thresholds);
  }

  std::vector<std::vector<double>> out(cols);
  for (const auto& [gain, c, t] : kept) out[c].push_back(t);
  for (auto& list : out) std::sort(list.begin(), list.end());
  return out;
}

Binarizer Binarizer::fit(const RawDataset& raw, const BinarizerSpec& spec) {
  spec.validate();
  raw.validate();
  Binarizer b;
  b.spec_ = spec;
  b.label_name_ = raw.label_name;
  b.columns_ = raw.column_names;
  switch (spec.method) {
    case BinarizeMethod::Exhaustive:
      for (const auto& col : raw.columns) b.thresholds_.push_back(exhaustive_thresholds(col));
      break;
    case BinarizeMethod::Quantile:
      for (const auto& col : raw.columns) b.thresholds_.push_back(quantile_thresholds(col, spec.quantiles));
      break;
    case BinarizeMethod::ThresholdGuess:
      b.thresholds_ = guess_thresholds(raw, spec.n_estimators, spec.learning_rate, spec.max_thresholds);
      break;
  }
  if (b.num_features() == 0) throw DegenerateDataset();
  return b;
}

std::size_t Binarizer::num_features() const {
  std::size_t total = 0;
  for (const auto& t : thresholds_) total += t.size();
  return total;
}

BinaryDataset Binarizer::transform(const RawDataset& raw) const {
  raw.validate();
  const std::size_t n = raw.n();
  std::vector<Bitset> features;
  std::vector<std::string> names;
  std::vector<FeatureOrigin> origin;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (thresholds_[c].empty()) continue;
    const auto it = std::find(raw.column_names.begin(), raw.column_names.end(), columns_[c]);
    if (it == raw.column_names.end()) throw SchemaError("/columns/" + std::to_string(c), "missing column " + columns_[c]);
    const auto& values = raw.columns[static_cast<std::size_t>(it - raw.column_names.begin())];
    for (double t : thresholds_[c]) {
      Bitset bits(n);
      for (std::size_t r = 0; r < n; ++r) bits.set(r, values[r] <= t);
      features.push_back(std::move(bits));
      names.push_back(columns_[c] + "<=" + format_threshold(t));
      origin.push_back(FeatureOrigin{c, t});
    }
  }
  Bitset labels(n);
  for (std::size_t r = 0; r < n; ++r) labels.set(r, raw.labels[r] == 1);
  return BinaryDataset(std::move(features), std::move(labels), std::move(names), std::move(origin));
}

nlohmann::json Binarizer::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  switch (spec_.method) {
    case BinarizeMethod::Quantile:
      params["q"] = spec_.quantiles;
      break;
    case BinarizeMethod::Exhaustive:
      break;
    case BinarizeMethod::ThresholdGuess:
      params["n_estimators"] = spec_.n_estimators;
      params["learning_rate"] = spec_.learning_rate;
      params["max_thresholds"] = spec_.max_thresholds;
      break;
  }
  return nlohmann::json{{"method", method_name(spec_.method)},
                        {"params", params},
                        {"label", label_name_},
                        {"columns", columns_},
                        {"thresholds", thresholds_}};
}

Binarizer Binarizer::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("", "binarizer document must be an object");
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw SchemaError(std::string("/") + key, "missing");
    return doc.at(key);
  };
  Binarizer b;
  const auto& method = require("method");
  const auto& params = require("params");
  if (!method.is_string() || !params.is_object()) throw SchemaError("/method", "bad method or params");
  const std::string m = method.get<std::string>();
  try {
    if (m == "quantile") {
      b.spec_.method = BinarizeMethod::Quantile;
      b.spec_.quantiles = params.at("q").get<int>();
    } else if (m == "exhaustive") {
      b.spec_.method = BinarizeMethod::Exhaustive;
    } else if (m == "threshold_guess") {
      b.spec_.method = BinarizeMethod::ThresholdGuess;
      b.spec_.n_estimators = params.at("n_estimators").get<int>();
      b.spec_.learning_rate = params.at("learning_rate").get<double>();
      b.spec_.max_thresholds = params.at("max_thresholds").get<int>();
    } else {
      throw SchemaError("/method", "unknown method " + m);
    }
    b.columns_ = require("columns").get<std::vector<std::string>>();
    b.thresholds_ = require("thresholds").get<std::vector<std::vector<double>>>();
    if (doc.contains("label")) b.label_name_ = doc.at("label").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("/params", e.what());
  }
  if (b.columns_.size() != b.thresholds_.size()) throw SchemaError("/thresholds", "length differs from columns");
  for (std::size_t c = 0; c < b.thresholds_.size(); ++c) {
    const auto& t = b.thresholds_[c];
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!(t[i - 1] < t[i])) throw SchemaError("/thresholds/" + std::to_string(c), "not strictly increasing");
    }
  }
  b.spec_.validate();
  return b;
}

BinaryDataset binarize(const RawDataset& raw, const BinarizerSpec& spec) {
  return Binarizer::fit(raw, spec).transform(raw);
}

}  // namespace splitopt
