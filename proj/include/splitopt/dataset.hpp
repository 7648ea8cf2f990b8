#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splitopt/bitset.hpp"

namespace splitopt {

// Numeric table before discretization. Column-major; labels are 0/1.
struct RawDataset {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;
  std::vector<std::uint8_t> labels;
  std::string label_name = "label";

  std::size_t n() const { return labels.size(); }
  std::size_t num_columns() const { return columns.size(); }

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;

  // Rows in the given order (indices may repeat).
  RawDataset select_rows(const std::vector<std::size_t>& rows) const;
};

// Reads a header-first, comma-separated file. The label column is looked up
// by name, or the last column is used when no name is given.
RawDataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column = std::nullopt);
RawDataset parse_csv(std::istream& in, const std::optional<std::string>& label_column = std::nullopt);

// Writes the dataset back out with the label as the last column.
void write_csv(const std::filesystem::path& path, const RawDataset& raw);

// Where a binary feature came from: [column value <= threshold].
struct FeatureOrigin {
  std::size_t column = 0;
  double threshold = 0.0;
};

class SupportSet;

// Binary feature matrix stored one bitset per feature, plus a label bitset.
class BinaryDataset {
 public:
  BinaryDataset(std::vector<Bitset> features, Bitset labels, std::vector<std::string> feature_names = {},
                std::vector<FeatureOrigin> provenance = {});

  // Row-major convenience constructor; names default to x0..x{k-1}.
  static BinaryDataset from_rows(const std::vector<std::vector<int>>& rows, const std::vector<int>& labels,
                                 std::vector<std::string> feature_names = {});
  // Every feature column must already hold only 0/1 values.
  static BinaryDataset from_raw_binary(const RawDataset& raw);

  std::size_t n() const { return labels_.size(); }
  std::size_t k() const { return features_.size(); }
  const Bitset& feature(std::size_t f) const { return features_[f]; }
  const Bitset& labels() const { return labels_; }
  const Bitset& negative_labels() const { return negatives_; }
  bool value(std::size_t row, std::size_t f) const { return features_[f].test(row); }
  int label(std::size_t row) const { return labels_.test(row) ? 1 : 0; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<FeatureOrigin>& provenance() const { return provenance_; }
  std::optional<std::size_t> feature_index(const std::string& name) const;

  SupportSet full_support() const;

  // Rows with identical feature vectors share a group id (dense, 0-based).
  const std::vector<std::uint32_t>& row_groups() const { return row_groups_; }
  std::size_t num_groups() const { return num_groups_; }
  // True when some group holds both labels (the equivalent-points bound can
  // then be positive).
  bool has_conflicting_duplicates() const { return has_conflicts_; }

  // Stable content hash of the bits and labels, hex encoded.
  std::string fingerprint() const;

  // Back to a 0/1 table with the same column names.
  RawDataset to_raw() const;

 private:
  void index_rows();

  std::vector<Bitset> features_;
  Bitset labels_;
  Bitset negatives_;
  std::vector<std::string> feature_names_;
  std::vector<FeatureOrigin> provenance_;
  std::vector<std::uint32_t> row_groups_;
  std::size_t num_groups_ = 0;
  bool has_conflicts_ = false;
};

// The rows reaching a tree node, with cached label counts.
class SupportSet {
 public:
  SupportSet(const BinaryDataset& ds, Bitset mask);

  const Bitset& mask() const { return mask_; }
  std::int64_t count() const { return count_; }
  std::int64_t pos_count() const { return pos_; }
  std::int64_t neg_count() const { return count_ - pos_; }
  std::int64_t minority() const { return std::min(pos_, count_ - pos_); }
  // Majority label; ties predict 0.
  int majority_label() const { return pos_ > count_ - pos_ ? 1 : 0; }
  bool empty() const { return count_ == 0; }
  bool pure() const { return pos_ == 0 || pos_ == count_; }

  friend bool operator==(const SupportSet& a, const SupportSet& b) { return a.mask_ == b.mask_; }

 private:
  SupportSet(Bitset mask, std::int64_t count, std::int64_t pos) : mask_(std::move(mask)), count_(count), pos_(pos) {}
  friend std::pair<SupportSet, SupportSet> split_support(const BinaryDataset&, const SupportSet&, std::size_t);

  Bitset mask_;
  std::int64_t count_ = 0;
  std::int64_t pos_ = 0;
};

// (D(f), D(f-bar)): rows of s where feature f is 1, and where it is 0.
std::pair<SupportSet, SupportSet> split_support(const BinaryDataset& ds, const SupportSet& s, std::size_t f);

// Cache key for a support. Holds the mask itself, so equal keys imply equal
// masks; the hash only speeds up lookup.
struct SupportKey {
  std::uint64_t hash = 0;
  Bitset mask;

  friend bool operator==(const SupportKey& a, const SupportKey& b) { return a.hash == b.hash && a.mask == b.mask; }
};

struct SupportKeyHash {
  std::size_t operator()(const SupportKey& key) const { return static_cast<std::size_t>(key.hash); }
};

SupportKey canonical_key(const SupportSet& s);

}  // namespace splitopt
