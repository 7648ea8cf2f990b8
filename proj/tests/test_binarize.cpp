#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "splitopt/binarize.hpp"
#include "splitopt/errors.hpp"
#include "splitopt/synthetic.hpp"

namespace splitopt {
namespace {

RawDataset table(std::vector<std::vector<double>> columns, std::vector<std::uint8_t> labels) {
  RawDataset raw;
  for (std::size_t c = 0; c < columns.size(); ++c) raw.column_names.push_back("c" + std::to_string(c));
  raw.columns = std::move(columns);
  raw.labels = std::move(labels);
  return raw;
}

BinarizerSpec exhaustive() { return BinarizerSpec::parse("exhaustive"); }

TEST(ExhaustiveThresholds, MidpointsOfDistinctValues) {
  EXPECT_EQ(exhaustive_thresholds({1.0, 3.0, 5.0}), (std::vector<double>{2.0, 4.0}));
  EXPECT_EQ(exhaustive_thresholds({5.0, 1.0, 3.0, 3.0}), (std::vector<double>{2.0, 4.0}));
  EXPECT_TRUE(exhaustive_thresholds({1.0, 1.0, 1.0}).empty());
}

TEST(Binarize, ExhaustiveColumn) {
  const auto ds = binarize(table({{1.0, 3.0, 5.0}}, {0, 1, 1}), exhaustive());
  ASSERT_EQ(ds.k(), 2u);
  EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"c0<=2", "c0<=4"}));
  EXPECT_EQ(ds.provenance()[1].threshold, 4.0);
  EXPECT_TRUE(ds.value(0, 0));
  EXPECT_FALSE(ds.value(1, 0));
  EXPECT_TRUE(ds.value(1, 1));
}

TEST(Binarize, ConstantColumnsDropped) {
  const auto ds = binarize(table({{1, 1, 1}, {0, 2, 4}}, {0, 1, 1}), exhaustive());
  EXPECT_EQ(ds.k(), 2u);
  for (const auto& origin : ds.provenance()) EXPECT_EQ(origin.column, 1u);
  EXPECT_THROW(binarize(table({{1, 1, 1}, {2, 2, 2}}, {0, 1, 1}), exhaustive()), DegenerateDataset);
}

TEST(Binarize, XorColumnsComeBackComplemented) {
  // [x <= 0.5] is 1 exactly when x is 0.
  const auto raw = xor_dataset().to_raw();
  const auto ds = binarize(raw, exhaustive());
  ASSERT_EQ(ds.k(), 2u);
  for (std::size_t f = 0; f < 2; ++f) {
    EXPECT_EQ(ds.provenance()[f].threshold, 0.5);
    for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(ds.value(r, f), raw.columns[f][r] == 0.0);
  }
  EXPECT_EQ(ds.labels(), xor_dataset().labels());
}

TEST(Binarize, ExhaustiveIsLosslessForThresholdSplits) {
  CounterRng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    std::vector<double> col(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = static_cast<double>(rng.below(6)) * 0.5;
      y[i] = rng.bit() ? 1 : 0;
    }
    if (std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; })) continue;
    const auto ds = binarize(table({col}, y), exhaustive());
    std::set<std::vector<bool>> partitions;
    for (std::size_t f = 0; f < ds.k(); ++f) {
      std::vector<bool> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = ds.value(i, f);
      partitions.insert(p);
    }
    for (double t = -0.25; t <= 3.0; t += 0.25) {
      std::vector<bool> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = col[i] <= t;
      const bool trivial = std::all_of(p.begin(), p.end(), [](bool b) { return b; }) ||
                           std::none_of(p.begin(), p.end(), [](bool b) { return b; });
      if (!trivial) EXPECT_TRUE(partitions.count(p)) << "threshold " << t;
    }
  }
}

TEST(QuantileThresholds, InteriorAndDeduplicated) {
  std::vector<double> col;
  for (int i = 1; i <= 9; ++i) col.push_back(i);
  // Interior quantiles at 1/4, 2/4, 3/4 of 1..9.
  EXPECT_EQ(quantile_thresholds(col, 3), (std::vector<double>{3.0, 5.0, 7.0}));
  // Positions 0.8, 1.6, 2.4 land on 1; position 3.2 interpolates to 1.2.
  const auto low = quantile_thresholds({1, 1, 1, 1, 2}, 4);
  ASSERT_EQ(low.size(), 2u);
  EXPECT_EQ(low[0], 1.0);
  EXPECT_NEAR(low[1], 1.2, 1e-12);
  const auto t = quantile_thresholds(col, 20);
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
  EXPECT_EQ(std::set<double>(t.begin(), t.end()).size(), t.size());
}

TEST(GuessThresholds, RecoversTheInformativeCut) {
  std::vector<double> signal, noise;
  std::vector<std::uint8_t> y;
  CounterRng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double v = static_cast<double>(rng.below(100));
    signal.push_back(v);
    noise.push_back(static_cast<double>(rng.below(100)));
    y.push_back(v > 42.0 ? 1 : 0);
  }
  const auto raw = table({signal, noise}, y);
  const auto cuts = guess_thresholds(raw, 40, 0.1, 0);
  ASSERT_FALSE(cuts[0].empty());
  for (std::size_t c = 0; c < cuts.size(); ++c) EXPECT_TRUE(std::is_sorted(cuts[c].begin(), cuts[c].end()));
  const auto ds = binarize(raw, BinarizerSpec::parse("guess:40"));
  const auto ds2 = binarize(raw, BinarizerSpec::parse("guess:40"));
  EXPECT_EQ(ds.fingerprint(), ds2.fingerprint());
  EXPECT_LE(binarize(raw, BinarizerSpec::parse("guess:40:1")).k(), 1u);
}

TEST(GuessThresholds, NeedsBothClasses) {
  EXPECT_THROW(binarize(table({{1, 2, 3}}, {1, 1, 1}), BinarizerSpec::parse("guess:10")), SingleClassLabels);
}

TEST(BinarizerSpec, ParseAndPrint) {
  EXPECT_EQ(BinarizerSpec::parse("quantile:7").quantiles, 7);
  EXPECT_EQ(BinarizerSpec::parse("guess:25:12").max_thresholds, 12);
  EXPECT_EQ(BinarizerSpec::parse("guess:25").to_string(), "guess:25");
  EXPECT_THROW(BinarizerSpec::parse("quantile:0"), std::invalid_argument);
  EXPECT_THROW(BinarizerSpec::parse("bogus"), std::invalid_argument);
}

TEST(Binarizer, JsonRoundTripAndTransform) {
  const auto train = table({{1, 3, 5, 7}, {0, 0, 1, 1}}, {0, 1, 1, 0});
  const auto fitted = Binarizer::fit(train, exhaustive());
  const auto again = Binarizer::from_json(nlohmann::json::parse(fitted.to_json().dump()));
  EXPECT_EQ(again.thresholds(), fitted.thresholds());
  EXPECT_EQ(again.transform(train).fingerprint(), fitted.transform(train).fingerprint());

  RawDataset test = table({{2.5, 6}, {0, 1}}, {1, 0});
  std::swap(test.column_names[0], test.column_names[1]);
  std::swap(test.columns[0], test.columns[1]);
  const auto out = fitted.transform(test);
  EXPECT_EQ(out.k(), fitted.num_features());
  // Row 0 has c0 = 2.5: above the cut at 2, below the one at 4.
  EXPECT_TRUE(out.value(0, 1));
  EXPECT_FALSE(out.value(0, 0));

  RawDataset missing = table({{1, 2}}, {0, 1});
  EXPECT_THROW(fitted.transform(missing), SchemaError);

  auto bad = fitted.to_json();
  bad["thresholds"][0] = nlohmann::json::array({3.0, 2.0});
  EXPECT_THROW(Binarizer::from_json(bad), SchemaError);
}

}  // namespace
}  // namespace splitopt
