#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "splitopt/dataset.hpp"

namespace splitopt {

enum class BinarizeMethod { Quantile, Exhaustive, ThresholdGuess };

struct BinarizerSpec {
  BinarizeMethod method = BinarizeMethod::Exhaustive;
  int quantiles = 10;
  int n_estimators = 40;
  double learning_rate = 0.1;
  int max_thresholds = 0;  // 0: no cap

  // Accepts "exhaustive", "quantile:q", "guess:n_est" and
  // "guess:n_est:max_thresholds".
  static BinarizerSpec parse(const std::string& text);
  std::string to_string() const;
  void validate() const;
};

// Per-column thresholds learned on one dataset and replayable on another.
// Binary feature j is [column value <= threshold].
class Binarizer {
 public:
  static Binarizer fit(const RawDataset& raw, const BinarizerSpec& spec);

  // Columns are matched by name, so the input may be a different split of
  // the same table.
  BinaryDataset transform(const RawDataset& raw) const;

  const BinarizerSpec& spec() const { return spec_; }
  const std::vector<std::string>& columns() const { return columns_; }
  // thresholds()[c] is strictly increasing; empty for dropped columns.
  const std::vector<std::vector<double>>& thresholds() const { return thresholds_; }
  std::size_t num_features() const;

  nlohmann::json to_json() const;
  static Binarizer from_json(const nlohmann::json& doc);

 private:
  BinarizerSpec spec_;
  std::string label_name_ = "label";
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> thresholds_;
};

BinaryDataset binarize(const RawDataset& raw, const BinarizerSpec& spec);

// Building blocks, exposed for tests.
std::vector<double> exhaustive_thresholds(const std::vector<double>& column);
std::vector<double> quantile_thresholds(const std::vector<double>& column, int q);
// One threshold list per column, from boosted logistic stumps.
std::vector<std::vector<double>> guess_thresholds(const RawDataset& raw, int n_estimators, double learning_rate,
                                                  int max_thresholds);

// Shortest round-trip decimal form, used in feature names like "age<=30.5".
std::string format_threshold(double value);

}  // namespace splitopt
