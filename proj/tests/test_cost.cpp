#include <gtest/gtest.h>

#include "splitopt/cost.hpp"

namespace splitopt {
namespace {

TEST(CostModel, ObjectiveRoundTrips) {
  const CostModel model(0.01, 4);
  EXPECT_NEAR(model.objective(model.cost(2, 1)), 0.51, 1e-15);
  EXPECT_NEAR(model.objective(model.cost(0, 4)), 0.04, 1e-15);
  EXPECT_TRUE(model.exact());
}

TEST(CostModel, AdditionIsExact) {
  // 0.1 + 0.2 is not 0.3 in doubles; here ten leaves cost ten times one.
  const CostModel model(0.1, 1000);
  Cost sum;
  for (int i = 0; i < 10; ++i) sum += model.per_leaf();
  EXPECT_EQ(sum, model.cost(0, 10));
  EXPECT_EQ(model.cost(3, 2) + model.cost(4, 5), model.cost(7, 7));
}

TEST(CostModel, OneLeafEqualsItsErrorEquivalent) {
  // lambda * N = 5 rows: one extra leaf costs exactly five errors.
  const CostModel model(0.05, 100);
  EXPECT_EQ(model.cost(0, 2), model.cost(5, 1));
  EXPECT_LT(model.cost(4, 2), model.cost(10, 1));
}

TEST(CostModel, ZeroPenalty) {
  const CostModel model(0.0, 7);
  EXPECT_EQ(model.cost(3, 1), model.cost(3, 50));
  EXPECT_NEAR(model.objective(model.cost(3, 2)), 3.0 / 7.0, 1e-15);
}

TEST(CostModel, SlackRoundsToTheGrid) {
  const CostModel model(0.01, 4);
  EXPECT_EQ(model.slack(0.0), Cost(0));
  // epsilon 0.25 over 4 rows is exactly one error.
  EXPECT_EQ(model.slack(0.25), model.cost(1, 0));
}

TEST(CostModel, RescaledKeepsCostsComparable) {
  const CostModel model(0.01, 100);
  const CostModel sub = model.rescaled(25);
  EXPECT_EQ(sub.per_leaf(), model.per_leaf());
  EXPECT_EQ(sub.cost(3, 2), model.cost(3, 2));
  EXPECT_DOUBLE_EQ(sub.lambda(), 0.04);
  EXPECT_EQ(sub.n_global(), 25);
}

TEST(CostModel, RejectsNegativePenalty) {
  EXPECT_THROW(CostModel(-0.1, 10), std::invalid_argument);
  EXPECT_THROW(CostModel(0.1, 0), std::invalid_argument);
}

TEST(Cost, InfinityDominates) {
  const CostModel model(0.5, 1'000'000);
  EXPECT_LT(model.cost(1'000'000, 64), Cost::infinity());
  EXPECT_TRUE(Cost::infinity().is_infinite());
  EXPECT_FALSE(model.cost(5, 5).is_infinite());
}

}  // namespace
}  // namespace splitopt
