#include "splitopt/cost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace splitopt {

namespace {

// Headroom: errors and leaves never exceed 2^33, so the largest finite value
// (N + 2N * lambda * N) * 2^S must stay below the infinity sentinel 2^124.
constexpr int kMaxBits = 118;

int bit_length(double value) {
  if (value < 1.0) return 0;
  int exp = 0;
  std::frexp(value, &exp);
  return exp;
}

}  // namespace

std::string Cost::debug_string() const {
  if (is_infinite()) return "inf";
  Rep v = raw_;
  const bool negative = v < 0;
  if (negative) v = -v;
  std::string digits;
  do {
    digits.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  } while (v != 0);
  if (negative) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

CostModel::CostModel(double lambda, std::int64_t n_global) : lambda_(lambda), n_global_(n_global) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (n_global < 1) throw std::invalid_argument("n_global must be >= 1");
  leaf_penalty_ = lambda * static_cast<double>(n_global);
  if (leaf_penalty_ == 0.0) {
    shift_ = 0;
    per_leaf_ = 0;
    return;
  }
  // leaf_penalty = mantissa * 2^exponent with an odd integer mantissa.
  int exp = 0;
  const double frac = std::frexp(leaf_penalty_, &exp);
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  int exponent = exp - 53;
  const int tz = std::countr_zero(mantissa);
  mantissa >>= tz;
  exponent += tz;

  const int needed = std::max(0, -exponent);
  const double magnitude = static_cast<double>(n_global) * (1.0 + 2.0 * leaf_penalty_);
  const int budget = kMaxBits - bit_length(magnitude) - 1;
  if (budget < 0) throw std::invalid_argument("lambda * N too large for the cost representation");
  shift_ = std::min(needed, budget);
  exact_ = shift_ == needed;
  const int scale = exponent + shift_;
  if (scale >= 0) {
    per_leaf_ = static_cast<Cost::Rep>(mantissa) << scale;
  } else {
    // Round half up when the grid cannot hold every bit of lambda * N.
    const int drop = -scale;
    per_leaf_ = drop >= 64 ? 0 : static_cast<Cost::Rep>((mantissa + (std::uint64_t{1} << (drop - 1))) >> drop);
  }
}

double CostModel::objective(Cost c) const {
  if (c.is_infinite()) return INFINITY;
  const long double scaled = std::ldexp(static_cast<long double>(c.raw()), -shift_);
  return static_cast<double>(scaled / static_cast<long double>(n_global_));
}

Cost CostModel::slack(double value) const {
  if (std::isinf(value) && value > 0) return Cost::infinity();
  const long double scaled =
      std::ldexp(static_cast<long double>(value) * static_cast<long double>(n_global_), shift_);
  if (scaled >= std::ldexp(1.0L, 124)) return Cost::infinity();
  return Cost(static_cast<Cost::Rep>(std::roundl(scaled)));
}

CostModel CostModel::rescaled(std::int64_t n_sub) const {
  if (n_sub < 1) throw std::invalid_argument("rescaled: n_sub must be >= 1");
  CostModel out = *this;
  out.n_global_ = n_sub;
  out.lambda_ = leaf_penalty_ / static_cast<double>(n_sub);
  return out;
}

}  // namespace splitopt
