#include "splitopt/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "splitopt/errors.hpp"

namespace splitopt {

void RawDataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("dataset has no rows");
  if (columns.size() != column_names.size()) throw std::invalid_argument("column name count mismatch");
  for (const auto& col : columns) {
    if (col.size() != labels.size()) throw std::invalid_argument("column length differs from label length");
  }
  for (auto y : labels) {
    if (y > 1) throw std::invalid_argument("labels must be 0 or 1");
  }
}

RawDataset RawDataset::select_rows(const std::vector<std::size_t>& rows) const {
  RawDataset out;
  out.column_names = column_names;
  out.label_name = label_name;
  out.columns.assign(columns.size(), {});
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.columns[c].reserve(rows.size());
    for (auto r : rows) out.columns[c].push_back(columns[c].at(r));
  }
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(labels.at(r));
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

RawDataset parse_csv(std::istream& in, const std::optional<std::string>& label_column) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, 0, "missing header row");
  const auto header = split_fields(line);
  if (header.size() < 2) throw ParseError(0, 0, "need at least one feature column and a label column");

  std::size_t label_idx = header.size() - 1;
  if (label_column) {
    label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == *label_column) label_idx = i;
    }
    if (label_idx == header.size()) throw ParseError(0, 0, "label column '" + *label_column + "' not in header");
  }

  RawDataset raw;
  raw.label_name = std::string(header[label_idx]);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != label_idx) raw.column_names.emplace_back(header[i]);
  }
  raw.columns.assign(raw.column_names.size(), {});

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(row, std::min(fields.size(), header.size()) + 1,
                       "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].empty()) throw ParseError(row, i + 1, "missing value");
      const auto value = parse_number(fields[i]);
      if (!value) throw ParseError(row, i + 1, "not a finite number: '" + std::string(fields[i]) + "'");
      if (i == label_idx) {
        if (*value != 0.0 && *value != 1.0) throw NonBinaryLabel(row);
        raw.labels.push_back(static_cast<std::uint8_t>(*value));
      } else {
        raw.columns[out_col++].push_back(*value);
      }
    }
  }
  if (row == 0) throw ParseError(0, 0, "no data rows");
  return raw;
}

RawDataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path.string());
  return parse_csv(in, label_column);
}

void write_csv(const std::filesystem::path& path, const RawDataset& raw) {
  std::ofstream out(path);
  if (!out) throw MissingFile(path.string());
  for (const auto& name : raw.column_names) out << name << ',';
  out << raw.label_name << '\n';
  for (std::size_t r = 0; r < raw.n(); ++r) {
    for (const auto& col : raw.columns) out << format_number(col[r]) << ',';
    out << static_cast<int>(raw.labels[r]) << '\n';
  }
}

BinaryDataset::BinaryDataset(std::vector<Bitset> features, Bitset labels, std::vector<std::string> feature_names,
                             std::vector<FeatureOrigin> provenance)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      provenance_(std::move(provenance)) {
  if (features_.empty()) throw std::invalid_argument("dataset needs at least one feature");
  if (labels_.size() == 0) throw std::invalid_argument("dataset needs at least one row");
  for (const auto& f : features_) {
    if (f.size() != labels_.size()) throw std::invalid_argument("feature length differs from label length");
  }
  if (feature_names_.empty()) {
    for (std::size_t f = 0; f < features_.size(); ++f) feature_names_.push_back("x" + std::to_string(f));
  }
  if (feature_names_.size() != features_.size()) throw std::invalid_argument("feature name count mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names_) {
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate feature name: " + name);
  }
  if (!provenance_.empty() && provenance_.size() != features_.size()) {
    throw std::invalid_argument("provenance size mismatch");
  }
  negatives_ = labels_.flipped();
  index_rows();
}

BinaryDataset BinaryDataset::from_rows(const std::vector<std::vector<int>>& rows, const std::vector<int>& labels,
                                       std::vector<std::string> feature_names) {
  if (rows.size() != labels.size()) throw std::invalid_argument("row count differs from label count");
  if (rows.empty()) throw std::invalid_argument("dataset needs at least one row");
  const std::size_t n = rows.size();
  const std::size_t k = rows.front().size();
  std::vector<Bitset> features(k, Bitset(n));
  Bitset y(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != k) throw std::invalid_argument("ragged rows");
    for (std::size_t f = 0; f < k; ++f) {
      if (rows[r][f] != 0 && rows[r][f] != 1) throw std::invalid_argument("features must be 0 or 1");
      features[f].set(r, rows[r][f] == 1);
    }
    if (labels[r] != 0 && labels[r] != 1) throw NonBinaryLabel(r + 1);
    y.set(r, labels[r] == 1);
  }
  return BinaryDataset(std::move(features), std::move(y), std::move(feature_names));
}

BinaryDataset BinaryDataset::from_raw_binary(const RawDataset& raw) {
  raw.validate();
  const std::size_t n = raw.n();
  std::vector<Bitset> features(raw.num_columns(), Bitset(n));
  for (std::size_t c = 0; c < raw.num_columns(); ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const double v = raw.columns[c][r];
      if (v != 0.0 && v != 1.0) throw ParseError(r + 1, c + 1, "expected a binary feature value");
      features[c].set(r, v == 1.0);
    }
  }
  Bitset y(n);
  for (std::size_t r = 0; r < n; ++r) y.set(r, raw.labels[r] == 1);
  return BinaryDataset(std::move(features), std::move(y), raw.column_names);
}

std::optional<std::size_t> BinaryDataset::feature_index(const std::string& name) const {
  for (std::size_t f = 0; f < feature_names_.size(); ++f) {
    if (feature_names_[f] == name) return f;
  }
  return std::nullopt;
}

SupportSet BinaryDataset::full_support() const { return SupportSet(*this, Bitset(n(), true)); }

void BinaryDataset::index_rows() {
  const std::size_t rows = n();
  std::vector<std::uint64_t> h(rows, 0x243f6a8885a308d3ULL);
  for (std::size_t f = 0; f < k(); ++f) {
    const auto& bits = features_[f];
    for (std::size_t r = 0; r < rows; ++r) h[r] = mix64(h[r] ^ (2 * f + (bits.test(r) ? 1 : 0)));
  }
  auto same_row = [&](std::size_t a, std::size_t b) {
    for (const auto& bits : features_) {
      if (bits.test(a) != bits.test(b)) return false;
    }
    return true;
  };

  row_groups_.assign(rows, 0);
  std::vector<std::size_t> representative;
  std::vector<std::uint8_t> label_seen;  // bit 0: has negative, bit 1: has positive
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  for (std::size_t r = 0; r < rows; ++r) {
    auto& bucket = buckets[h[r]];
    std::uint32_t group = 0;
    bool found = false;
    for (auto g : bucket) {
      if (same_row(representative[g], r)) {
        group = g;
        found = true;
        break;
      }
    }
    if (!found) {
      group = static_cast<std::uint32_t>(representative.size());
      representative.push_back(r);
      label_seen.push_back(0);
      bucket.push_back(group);
    }
    row_groups_[r] = group;
    label_seen[group] |= labels_.test(r) ? 2 : 1;
  }
  num_groups_ = representative.size();
  has_conflicts_ = false;
  for (auto seen : label_seen) has_conflicts_ = has_conflicts_ || seen == 3;
}

std::string BinaryDataset::fingerprint() const {
  // 64-bit FNV-1a over a fixed little-endian encoding.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  auto feed_string = [&](const std::string& s) {
    feed(s.size());
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(n());
  feed(k());
  for (const auto& name : feature_names_) feed_string(name);
  for (const auto& f : features_) {
    for (auto w : f.words()) feed(w);
  }
  for (auto w : labels_.words()) feed(w);
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

RawDataset BinaryDataset::to_raw() const {
  RawDataset raw;
  raw.column_names = feature_names_;
  raw.columns.assign(k(), std::vector<double>(n(), 0.0));
  for (std::size_t f = 0; f < k(); ++f) {
    features_[f].for_each_set([&](std::size_t r) { raw.columns[f][r] = 1.0; });
  }
  raw.labels.resize(n());
  for (std::size_t r = 0; r < n(); ++r) raw.labels[r] = static_cast<std::uint8_t>(label(r));
  return raw;
}

SupportSet::SupportSet(const BinaryDataset& ds, Bitset mask) : mask_(std::move(mask)) {
  if (mask_.size() != ds.n()) throw std::invalid_argument("support mask length differs from dataset size");
  count_ = static_cast<std::int64_t>(mask_.count());
  pos_ = static_cast<std::int64_t>(count_and(mask_, ds.labels()));
}

std::pair<SupportSet, SupportSet> split_support(const BinaryDataset& ds, const SupportSet& s, std::size_t f) {
  if (f >= ds.k()) throw FeatureOutOfRange(f, ds.k());
  Bitset on = s.mask() & ds.feature(f);
  Bitset off = s.mask().and_not(ds.feature(f));
  const auto on_count = static_cast<std::int64_t>(on.count());
  const auto on_pos = static_cast<std::int64_t>(count_and(on, ds.labels()));
  SupportSet left(std::move(on), on_count, on_pos);
  SupportSet right(std::move(off), s.count() - on_count, s.pos_count() - on_pos);
  return {std::move(left), std::move(right)};
}

SupportKey canonical_key(const SupportSet& s) { return SupportKey{s.mask().hash(), s.mask()}; }

}  // namespace splitopt
