#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace splitopt {

// Regularized objective scaled by N and held in fixed point:
//   errors * 2^S + leaves * C,   C = round(lambda * N * 2^S)
// Integer addition keeps subproblem costs exactly additive, so every bound
// comparison in the solvers is exact. Only costs built by the same CostModel
// are comparable.
class Cost {
 public:
  using Rep = __int128;

  constexpr Cost() = default;
  constexpr explicit Cost(Rep raw) : raw_(raw) {}

  static constexpr Cost infinity() { return Cost(Rep{1} << 124); }

  constexpr Rep raw() const { return raw_; }
  constexpr bool is_infinite() const { return raw_ >= infinity().raw_; }

  constexpr Cost& operator+=(Cost other) {
    raw_ += other.raw_;
    return *this;
  }
  constexpr Cost& operator-=(Cost other) {
    raw_ -= other.raw_;
    return *this;
  }
  friend constexpr Cost operator+(Cost a, Cost b) { return a += b; }
  friend constexpr Cost operator-(Cost a, Cost b) { return a -= b; }
  friend constexpr bool operator==(Cost a, Cost b) = default;
  friend constexpr std::strong_ordering operator<=>(Cost a, Cost b) { return a.raw_ <=> b.raw_; }

  std::string debug_string() const;

 private:
  Rep raw_ = 0;
};

constexpr Cost min(Cost a, Cost b) { return b < a ? b : a; }
constexpr Cost max(Cost a, Cost b) { return a < b ? b : a; }

// Converts (misclassified, leaves) counts to Cost for a fixed penalty and
// global sample size, and back to the reported objective value
//   misclassified / N + lambda * leaves.
class CostModel {
 public:
  CostModel(double lambda, std::int64_t n_global);

  double lambda() const { return lambda_; }
  std::int64_t n_global() const { return n_global_; }
  // lambda * N: what one leaf costs, measured in misclassified rows.
  double leaf_penalty() const { return leaf_penalty_; }
  int shift() const { return shift_; }
  // False only when lambda * N needed more fractional bits than fit.
  bool exact() const { return exact_; }

  Cost cost(std::int64_t misclassified, std::int64_t leaves) const {
    return Cost((static_cast<Cost::Rep>(misclassified) << shift_) + static_cast<Cost::Rep>(leaves) * per_leaf_);
  }
  Cost leaf(std::int64_t misclassified) const { return cost(misclassified, 1); }
  Cost per_leaf() const { return Cost(per_leaf_); }

  // Objective value in global units (divided by N).
  double objective(Cost c) const;
  // An additive slack such as epsilon, in global units, rounded to the grid.
  Cost slack(double value) const;

  // Same per-leaf penalty in misclassification units, reported against a
  // smaller dataset: lambda_sub = lambda * N / n_sub. Costs stay comparable.
  CostModel rescaled(std::int64_t n_sub) const;

  friend bool operator==(const CostModel& a, const CostModel& b) {
    return a.shift_ == b.shift_ && a.per_leaf_ == b.per_leaf_ && a.n_global_ == b.n_global_;
  }

 private:
  CostModel() = default;

  double lambda_ = 0.0;
  std::int64_t n_global_ = 1;
  double leaf_penalty_ = 0.0;
  int shift_ = 0;
  Cost::Rep per_leaf_ = 0;
  bool exact_ = true;
};

}  // namespace splitopt
