#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "nvp/baselines.hpp"
#include "nvp/datagen.hpp"

namespace nvp {
namespace {

std::vector<double> iota_demands(int n) {
  std::vector<double> d(static_cast<std::size_t>(n));
  std::iota(d.begin(), d.end(), 1.0);
  return d;
}

double weighted_profit(std::span<const double> w, std::span<const double> d, const NewsvendorParams& params,
                       const Decision& x) {
  double f = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) f += w[i] * profit(params, x, d[i]);
  return f;
}

// First maximizer of the fixed-weight objective over an n-point q grid.
double brute_force_q(std::span<const double> w, std::span<const double> d, const NewsvendorParams& params,
                     double p, std::size_t n) {
  double best_q = 0.0, best = -INFINITY;
  for (double q : linspace(params.q_bounds, n)) {
    const double f = weighted_profit(w, d, params, {p, q});
    if (f > best) best = f, best_q = q;
  }
  return best_q;
}

TEST(CriticalFractile, UniformWeightsMedian) {
  const NewsvendorParams params;
  const auto d = iota_demands(100);
  const std::vector<double> w(100, 0.01);
  EXPECT_DOUBLE_EQ(critical_fractile_q(w, d, 10.0, params), 50.0);
  // The objective is flat on [50, 51]; compare values rather than locations.
  const double qb = brute_force_q(w, d, params, 10.0, 12001);
  EXPECT_GE(qb, 50.0 - 0.01);
  EXPECT_LE(qb, 51.0);
  EXPECT_NEAR(weighted_profit(w, d, params, {10.0, 50.0}), weighted_profit(w, d, params, {10.0, qb}), 1e-9);
}

TEST(CriticalFractile, DegenerateCases) {
  const NewsvendorParams params;
  EXPECT_DOUBLE_EQ(critical_fractile_q(std::vector<double>{1.0}, std::vector<double>{17.0}, 25.0, params), 17.0);
  const auto d = iota_demands(100);
  const std::vector<double> w(100, 0.01);
  EXPECT_DOUBLE_EQ(critical_fractile_q(w, d, 1e12, params), 100.0);
  EXPECT_THROW(critical_fractile_q(w, d, 2.0, params), std::invalid_argument);
  // Clamped to the quantity box.
  EXPECT_DOUBLE_EQ(critical_fractile_q(std::vector<double>{1.0}, std::vector<double>{500.0}, 25.0, params), 120.0);
}

TEST(CriticalFractile, AgreesWithBruteForceGrid) {
  const NewsvendorParams params;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n_grid = 10000;
  const double step = params.q_bounds.width() / static_cast<double>(n_grid - 1);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 5 + t;
    std::vector<double> w(n), d(n);
    double tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = u(rng);
      tot += w[i];
      d[i] = 110.0 * u(rng);
    }
    for (auto& v : w) v /= tot;
    const double p = 7.0 + 33.0 * u(rng);
    const double q = critical_fractile_q(w, d, p, params);
    EXPECT_LE(std::abs(q - brute_force_q(w, d, params, p, n_grid)), step + 1e-12) << "instance " << t;
  }
}

TEST(SolveFixedWeights, ConstantDemandGoesToTopPrice) {
  std::vector<Sample> s;
  for (int i = 0; i < 30; ++i) s.push_back({7.0 + i, {0.1 * i, 0.3}, 44.0});
  const Dataset data(s);
  WeightSpec spec;
  spec.family = WeightFamily::knn;
  spec.k = 5;
  const auto sol = solve_decision_independent(data, NewsvendorParams{}, spec, std::vector<double>{0.5, 0.3});
  EXPECT_DOUBLE_EQ(sol.x.p, 40.0);
  EXPECT_DOUBLE_EQ(sol.x.q, 44.0);
  EXPECT_DOUBLE_EQ(sol.objective, 34.0 * 44.0);
}

TEST(SolveFixedWeights, UniformFeatureWeightsMatchSaa) {
  const auto data = gen_dataset(ComplexSim{}, 80, PricePolicy{}, 1);
  WeightSpec spec;
  spec.family = WeightFamily::knn;
  spec.k = data.size();
  const std::vector<double> z(4, 0.5);
  const auto a = solve_decision_independent(data, NewsvendorParams{}, spec, z);
  const auto b = solve_pure_saa(data, NewsvendorParams{});
  EXPECT_EQ(a.x, b.x);
  EXPECT_DOUBLE_EQ(a.objective, b.objective);
}

TEST(SolveFixedWeights, RequiresFeaturesOnlyModel) {
  const auto data = gen_dataset(ComplexSim{}, 40, PricePolicy{}, 2);
  WeightSpec spec;
  spec.family = WeightFamily::knn;
  spec.k = 3;
  const auto joined = WeightModel::fit(data, spec, QuerySpace::joined);
  EXPECT_THROW(solve_decision_independent(joined, data, NewsvendorParams{}, std::vector<double>(4, 0.5)),
               std::invalid_argument);
}

TEST(PureSaa, SingleSample) {
  const Dataset data({{12.0, {0.2}, 31.0}});
  const auto sol = solve_pure_saa(data, NewsvendorParams{});
  EXPECT_DOUBLE_EQ(sol.x.p, 40.0);
  EXPECT_DOUBLE_EQ(sol.x.q, 31.0);
}

TEST(PureSaa, TwoSamplesMatchExhaustiveGrid) {
  const Dataset data({{10.0, {0.0}, 2.0}, {20.0, {1.0}, 8.0}});
  const NewsvendorParams params;
  const std::vector<double> w{0.5, 0.5};
  const auto d = data.demands();
  EXPECT_DOUBLE_EQ(critical_fractile_q(w, d, 10.0, params), 2.0);

  const auto sol = solve_pure_saa(data, params);
  double best = -INFINITY;
  for (double p : linspace(params.p_bounds, kPriceGridPoints))
    for (double q : linspace({0.0, 10.0}, 1001)) best = std::max(best, weighted_profit(w, d, params, {p, q}));
  EXPECT_NEAR(sol.objective, best, 1e-9);
  EXPECT_NEAR(weighted_profit(w, d, params, sol.x), sol.objective, 1e-12);
}

// ---- linear regression ----------------------------------------------------

Dataset linear_data(std::size_t n, double noise, std::uint64_t seed) {
  LinearSim m;
  m.noise_std = noise;
  return gen_dataset(m, n, PricePolicy{}, seed);
}

TEST(FitLinearDemand, RecoversExactLaw) {
  const auto fit = fit_linear_demand(linear_data(50, 0.0, 3));
  EXPECT_NEAR(fit.intercept, 60.0, 1e-8);
  EXPECT_NEAR(fit.price_coefficient, -1.0, 1e-8);
  for (double b : fit.feature_coefficients) EXPECT_NEAR(b, 1.0, 1e-8);
}

TEST(FitLinearDemand, ConstantTarget) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Sample> s;
  for (int i = 0; i < 40; ++i) s.push_back({7.0 + 33.0 * u(rng), {u(rng), u(rng)}, 12.5});
  const auto fit = fit_linear_demand(Dataset(s));
  EXPECT_NEAR(fit.intercept, 12.5, 1e-8);
  EXPECT_NEAR(fit.price_coefficient, 0.0, 1e-8);
  for (double b : fit.feature_coefficients) EXPECT_NEAR(b, 0.0, 1e-8);
}

TEST(FitLinearDemand, NoisyPriceSlope) {
  EXPECT_NEAR(fit_linear_demand(linear_data(2000, 1.0, 5)).price_coefficient, -1.0, 0.1);
}

TEST(FitLinearDemand, ResidualsOrthogonalToDesign) {
  const auto data = gen_dataset(ComplexSim{}, 500, PricePolicy{}, 6);
  const auto fit = fit_linear_demand(data);
  std::vector<double> dot(6, 0.0), scale(6, 0.0);
  for (const auto& s : data.samples()) {
    const double r = s.demand - fit.predict(s.price, s.features);
    const double cols[6] = {1.0, s.price, s.features[0], s.features[1], s.features[2], s.features[3]};
    for (int j = 0; j < 6; ++j) {
      dot[j] += r * cols[j];
      scale[j] += std::abs(s.demand * cols[j]);
    }
  }
  for (int j = 0; j < 6; ++j) EXPECT_LE(std::abs(dot[j]), 1e-6 * scale[j]) << "column " << j;
}

TEST(FitLinearDemand, CollinearColumnsAreNamed) {
  std::vector<Sample> s;
  for (int i = 0; i < 20; ++i) {
    const double a = std::cos(i);
    s.push_back({10.0 + i, {a, 2.0 * a, std::sin(i)}, 5.0 + i});
  }
  try {
    fit_linear_demand(Dataset(s));
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'z2'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("z1"), std::string::npos) << msg;
  }
  EXPECT_THROW(fit_linear_demand(Dataset({{1.0, {0.0}, 1.0}, {2.0, {0.0}, 2.0}, {3.0, {0.0}, 3.0}})),
               std::invalid_argument);
}

// ---- predict-then-optimize ------------------------------------------------

TEST(Pto, HandVertex) {
  LinearDemandFit fit{60.0, -1.0, {}};
  NewsvendorParams params;
  params.p_bounds = {7.0, 59.0};
  params.q_bounds = {0.0, 1000.0};
  const auto sol = solve_pto(fit, params, std::vector<double>{}, 521);
  EXPECT_NEAR(sol.x.p, 33.0, 1e-9);
  EXPECT_NEAR(sol.x.q, 27.0, 1e-9);
  EXPECT_NEAR(sol.predicted_profit, 27.0 * 27.0, 1e-7);
  EXPECT_FALSE(sol.all_forecasts_negative);
}

TEST(Pto, ConstantForecastGoesToTopPrice) {
  LinearDemandFit fit{30.0, 0.0, {0.0}};
  const auto sol = solve_pto(fit, NewsvendorParams{}, std::vector<double>{0.4});
  EXPECT_DOUBLE_EQ(sol.x.p, 40.0);
  EXPECT_DOUBLE_EQ(sol.x.q, 30.0);
}

TEST(Pto, AllNegativeForecastsFlagged) {
  LinearDemandFit fit{-5.0, -1.0, {}};
  const auto sol = solve_pto(fit, NewsvendorParams{}, std::vector<double>{});
  EXPECT_TRUE(sol.all_forecasts_negative);
  EXPECT_EQ(sol.x, (Decision{7.0, 0.0}));
}

TEST(Pto, NoiselessLinearDataRecoversAnalyticOptimum) {
  const auto fit = fit_linear_demand(linear_data(200, 0.0, 7));
  const NewsvendorParams params;
  const std::vector<double> z(4, 0.5);
  const auto sol = solve_pto(fit, params, z);
  // (p - 6)(62 - p) peaks at p = 34.
  const double step = params.p_bounds.width() / (kPriceGridPoints - 1);
  EXPECT_LE(std::abs(sol.x.p - 34.0), step);
  EXPECT_NEAR(sol.x.q, 62.0 - sol.x.p, 1e-6);
}

}  // namespace
}  // namespace nvp
