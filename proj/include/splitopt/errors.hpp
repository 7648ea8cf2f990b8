#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace splitopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// dataset

class MissingFile : public Error {
 public:
  explicit MissingFile(const std::string& path) : Error("cannot open file: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Rows are 1-based data rows (the header is not counted); columns are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : Error("parse error at row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what),
        row_(row),
        col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class NonBinaryLabel : public Error {
 public:
  explicit NonBinaryLabel(std::size_t row)
      : Error("label at row " + std::to_string(row) + " is not 0 or 1"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class DegenerateDataset : public Error {
 public:
  DegenerateDataset() : Error("every column is constant; no binary features remain") {}
};

class SingleClassLabels : public Error {
 public:
  SingleClassLabels() : Error("threshold guessing needs both label classes") {}
};

class FeatureOutOfRange : public Error {
 public:
  FeatureOutOfRange(std::size_t feature, std::size_t k)
      : Error("feature " + std::to_string(feature) + " out of range (k=" + std::to_string(k) + ")") {}
};

class RowOutOfRange : public Error {
 public:
  RowOutOfRange(std::size_t row, std::size_t n)
      : Error("row " + std::to_string(row) + " out of range (n=" + std::to_string(n) + ")") {}
};

class EmptySupport : public Error {
 public:
  EmptySupport() : Error("operation requires a non-empty support set") {}
};

// tree_model

class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error("schema error at " + path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// solver / split

class IncompleteGraph : public Error {
 public:
  IncompleteGraph() : Error("dependency graph lacks a child required for extraction") {}
};

class EmptyChild : public Error {
 public:
  EmptyChild() : Error("cannot renormalize the penalty for an empty subproblem") {}
};

// rashomon

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::uint64_t limit, const std::string& where = {})
      : Error("tree set exceeded the cap of " + std::to_string(limit) + " trees" +
              (where.empty() ? std::string{} : " (" + where + ")") +
              "; raise lambda or lower epsilon"),
        limit_(limit) {}
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
};

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(std::uint64_t index, std::uint64_t count)
      : Error("tree index " + std::to_string(index) + " out of range (t_count=" + std::to_string(count) + ")") {}
};

// analysis

class NoNodesAtLevel : public Error {
 public:
  explicit NoNodesAtLevel(int level) : Error("no internal nodes at level " + std::to_string(level)) {}
};

class NoMatchingSparsity : public Error {
 public:
  explicit NoMatchingSparsity(std::int64_t leaves)
      : Error("no penalty makes the greedy tree have " + std::to_string(leaves) + " leaves") {}
};

// oracle

class LimitsExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace splitopt
