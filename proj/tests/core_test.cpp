#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nvp/core.hpp"

namespace nvp {
namespace {

NewsvendorParams econ() {
  NewsvendorParams p;
  p.c = 6.0;
  p.s = 2.0;
  return p;
}

TEST(Profit, HandEvaluatedValues) {
  const auto params = econ();
  EXPECT_DOUBLE_EQ(profit(params, {10.0, 0.0}, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(profit(params, {10.0, 3.0}, 5.0), 12.0);
  EXPECT_DOUBLE_EQ(profit(params, {10.0, 5.0}, 3.0), 4.0);
}

TEST(Profit, RejectsBadInputs) {
  const auto params = econ();
  EXPECT_THROW(profit(params, {10.0, 3.0}, -1.0), std::invalid_argument);
  EXPECT_THROW(profit(params, {std::nan(""), 3.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(profit(params, {10.0, 3.0}, std::numeric_limits<double>::infinity()),
               std::invalid_argument);
}

TEST(ProfitAdjusted, ReducesToProfit) {
  auto params = econ();
  params.gamma = 0.0;
  params.p_ref = 3.0;
  EXPECT_DOUBLE_EQ(profit_adjusted(params, {17.0, 4.0}, 9.0), profit(params, {17.0, 4.0}, 9.0));
  params.gamma = 1.0;
  params.p_ref = 17.0;
  EXPECT_DOUBLE_EQ(profit_adjusted(params, {17.0, 4.0}, 9.0), profit(params, {17.0, 4.0}, 9.0));
}

TEST(ProfitAdjusted, HandEvaluated) {
  auto params = econ();
  params.gamma = 2.0;
  params.p_ref = 10.0;
  // profit(12, 2, 5) = 24 - 12 = 12; adjustment 2 * 2^2 = 8
  ASSERT_DOUBLE_EQ(profit(params, {12.0, 2.0}, 5.0), 12.0);
  EXPECT_DOUBLE_EQ(profit_adjusted(params, {12.0, 2.0}, 5.0), 4.0);
}

TEST(Subgradient, HandEvaluated) {
  const auto params = econ();
  EXPECT_EQ(subgradient(params, {10.0, 3.0}, 5.0), (Gradient{3.0, 4.0}));
  EXPECT_EQ(subgradient(params, {10.0, 5.0}, 3.0), (Gradient{3.0, -4.0}));
  EXPECT_EQ(subgradient(params, {10.0, 3.0}, 3.0, TieRule::lower), (Gradient{3.0, 4.0}));
  EXPECT_EQ(subgradient(params, {10.0, 3.0}, 3.0, TieRule::upper), (Gradient{3.0, -4.0}));
}

TEST(SubgradientAdjusted, AddsPriceTerm) {
  auto params = econ();
  params.gamma = 1.0;
  params.p_ref = 10.0;
  const Gradient g = subgradient_adjusted(params, {12.0, 3.0}, 5.0);
  EXPECT_DOUBLE_EQ(g.dp, 3.0 - 4.0);
  EXPECT_DOUBLE_EQ(g.dq, subgradient(params, {12.0, 3.0}, 5.0).dq);

  params.p_ref = 12.0;
  EXPECT_EQ(subgradient_adjusted(params, {12.0, 3.0}, 5.0), subgradient(params, {12.0, 3.0}, 5.0));
  params.gamma = 0.0;
  params.p_ref = 0.0;
  EXPECT_EQ(subgradient_adjusted(params, {12.0, 3.0}, 5.0), subgradient(params, {12.0, 3.0}, 5.0));
}

class ProfitProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{12345};
  std::uniform_real_distribution<double> price{7.0, 40.0};
  std::uniform_real_distribution<double> qty{0.0, 120.0};
  NewsvendorParams params = econ();
};

TEST_F(ProfitProperties, PiecewiseLinearInQuantity) {
  for (int t = 0; t < 500; ++t) {
    const double p = price(rng), d = qty(rng);
    // Three points on the same side of d: collinear.
    const double lo = std::uniform_real_distribution<double>(0.0, d)(rng);
    const double hi = std::uniform_real_distribution<double>(lo, d)(rng);
    const double mid = 0.5 * (lo + hi);
    const double f_lo = profit(params, {p, lo}, d), f_hi = profit(params, {p, hi}, d);
    EXPECT_NEAR(profit(params, {p, mid}, d), 0.5 * (f_lo + f_hi), 1e-9 * (1.0 + std::abs(f_lo)));
  }
}

TEST_F(ProfitProperties, QuantityDerivativeMatchesFiniteDifference) {
  const double h = 1e-6;
  for (int t = 0; t < 500; ++t) {
    const double p = price(rng), q = qty(rng), d = qty(rng);
    if (std::abs(q - d) < 1e-3) continue;
    const double fd = (profit(params, {p, q + h}, d) - profit(params, {p, q}, d)) / h;
    EXPECT_NEAR(fd, subgradient(params, {p, q}, d).dq, 1e-4);
  }
}

TEST_F(ProfitProperties, PriceDerivativeIsMinDemandQuantity) {
  for (int t = 0; t < 500; ++t) {
    const double p = price(rng), q = qty(rng), d = qty(rng);
    const Gradient g = subgradient(params, {p, q}, d);
    EXPECT_EQ(g.dp, std::min(d, q));
    // profit is linear in p, so a unit step recovers the slope.
    const double slope = profit(params, {p + 1.0, q}, d) - profit(params, {p, q}, d);
    EXPECT_NEAR(slope, g.dp, 1e-12 * (1.0 + std::abs(p * q)));
  }
}

TEST_F(ProfitProperties, TieRulesDifferOnlyAtKink) {
  for (int t = 0; t < 500; ++t) {
    const double p = price(rng), q = qty(rng);
    const double d = (t % 2 == 0) ? q : qty(rng);
    const Gradient lo = subgradient(params, {p, q}, d, TieRule::lower);
    const Gradient up = subgradient(params, {p, q}, d, TieRule::upper);
    EXPECT_EQ(lo.dp, up.dp);
    if (d == q)
      EXPECT_DOUBLE_EQ(lo.dq - up.dq, p - params.s);
    else
      EXPECT_EQ(lo.dq, up.dq);
  }
}

TEST_F(ProfitProperties, AdjustedAtReferenceIsExact) {
  params.gamma = 3.5;
  for (int t = 0; t < 100; ++t) {
    params.p_ref = price(rng);
    const double q = qty(rng), d = qty(rng);
    EXPECT_EQ(profit_adjusted(params, {params.p_ref, q}, d), profit(params, {params.p_ref, q}, d));
  }
}

TEST(NewsvendorParams, Validation) {
  NewsvendorParams p;
  EXPECT_NO_THROW(p.validate());
  p.s = 7.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.p_bounds = {5.0, 40.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.q_bounds = {-1.0, 10.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.gamma = -0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.p_bounds = {30.0, 20.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace nvp
