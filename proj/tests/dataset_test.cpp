#include <gtest/gtest.h>

#include <random>

#include "nvp/dataset.hpp"
#include "nvp/quantile.hpp"

namespace nvp {
namespace {

TEST(Dataset, RejectsInvalidSamples) {
  EXPECT_THROW(Dataset(std::vector<Sample>{}), std::invalid_argument);
  EXPECT_THROW(Dataset({{1.0, {0.1}, -2.0}}), std::invalid_argument);
  EXPECT_THROW(Dataset({{1.0, {0.1}, 2.0}, {1.0, {0.1, 0.2}, 2.0}}), std::invalid_argument);
  EXPECT_THROW(Dataset({{1.0, {std::nan("")}, 2.0}}), std::invalid_argument);
}

TEST(Dataset, FitsMinMaxScaling) {
  const Dataset data({{10.0, {1.0, 5.0}, 3.0}, {20.0, {3.0, 5.0}, 4.0}, {15.0, {2.0, 5.0}, 1.0}});
  EXPECT_EQ(data.size(), 3u);
  EXPECT_EQ(data.feature_dim(), 2u);
  EXPECT_DOUBLE_EQ(data.scaling().price.lo, 10.0);
  EXPECT_DOUBLE_EQ(data.scaling().price.hi, 20.0);
  EXPECT_DOUBLE_EQ(data.scaling().scale_price(15.0), 0.5);
  // Constant column maps to 0.
  EXPECT_DOUBLE_EQ(data.scaling().scale_features(std::vector<double>{2.0, 5.0})[1], 0.0);

  const Dataset s = data.scaled();
  for (const auto& smp : s.samples()) {
    EXPECT_GE(smp.price, 0.0);
    EXPECT_LE(smp.price, 1.0);
    for (double v : smp.features) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(s.demands(), data.demands());
}

TEST(FeatureScaling, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 200; ++t) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const Interval r{a, b};
    const double v = std::uniform_real_distribution<double>(a, b)(rng);
    EXPECT_NEAR(FeatureScaling::unscale(r, FeatureScaling::scale(r, v)), v, 1e-12 * (1.0 + std::abs(v)));
  }
}

TEST(WeightedQuantile, Basics) {
  const std::vector<double> v{5.0, 1.0, 3.0, 2.0, 4.0};
  const std::vector<double> w(5, 0.2);
  EXPECT_DOUBLE_EQ(weighted_quantile(w, v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(weighted_quantile(w, v, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(weighted_quantile(w, v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(weighted_quantile(w, v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(weighted_quantile(std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.0}, v, 0.99), 3.0);
  EXPECT_THROW(weighted_quantile(std::vector<double>{1.0}, v, 0.5), std::invalid_argument);
}

TEST(WeightedQuantile, TiedValuesShareOneStep) {
  const std::vector<double> v{2.0, 2.0, 8.0};
  const std::vector<double> w{0.25, 0.25, 0.5};
  EXPECT_DOUBLE_EQ(weighted_quantile(w, v, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(weighted_quantile(w, v, 0.51), 8.0);
}

}  // namespace
}  // namespace nvp
