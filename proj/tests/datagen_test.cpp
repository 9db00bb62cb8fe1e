#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nvp/baselines.hpp"
#include "nvp/datagen.hpp"

namespace nvp {
namespace {

const std::vector<double> kHalf(4, 0.5);

TEST(GenFeatures, DeterministicAndInUnitCube) {
  EXPECT_EQ(gen_features(1, 9), gen_features(1, 9));
  EXPECT_NE(gen_features(20, 9), gen_features(20, 10));
  for (const auto& row : gen_features(500, 3)) {
    ASSERT_EQ(row.size(), 4u);
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(gen_features(0, 1), std::invalid_argument);
}

TEST(SampleDemand, NoiselessHandValues) {
  Rng rng(1);
  LinearSim lin;
  lin.noise_std = 0.0;
  EXPECT_DOUBLE_EQ(sample_demand(lin, 20.0, kHalf, rng), 42.0);
  ComplexSim cx;
  cx.phi_scale = 0.0;
  cx.theta_scale = 0.0;
  EXPECT_DOUBLE_EQ(sample_demand(cx, 20.0, kHalf, rng), 106.0);
  EXPECT_TRUE(is_noiseless(cx));
  EXPECT_DOUBLE_EQ(max_possible_demand(cx, 20.0, kHalf), 106.0);
  EXPECT_TRUE(std::isinf(max_possible_demand(ComplexSim{}, 20.0, kHalf)));
}

TEST(SampleDemand, FloorAtZero) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(sample_demand(ComplexSim{}, 1e6, kHalf, rng), 0.0);
    EXPECT_EQ(sample_demand(LinearSim{}, 1e6, kHalf, rng), 0.0);
  }
  EXPECT_THROW(sample_demand(LinearSim{}, 10.0, std::vector<double>{0.1}, rng), std::invalid_argument);
}

TEST(SampleDemand, ShockIsPriceFree) {
  // Same stream, different prices: demands differ by exactly the price shift
  // when the floor does not bind.
  Rng a(3), b(3);
  for (int t = 0; t < 100; ++t) {
    const double d1 = sample_demand(ComplexSim{}, 10.0, kHalf, a);
    const double d2 = sample_demand(ComplexSim{}, 15.0, kHalf, b);
    if (d2 > 0.0) {
      EXPECT_NEAR(d1 - d2, 5.0, 1e-9);
    }
  }
}

TEST(GenDataset, DeterministicAndNonNegative) {
  const auto a = gen_dataset(ComplexSim{}, 300, PricePolicy{}, 17);
  const auto b = gen_dataset(ComplexSim{}, 300, PricePolicy{}, 17);
  ASSERT_EQ(a.size(), 300u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].price, b[i].price);
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].demand, b[i].demand);
    EXPECT_GE(a[i].demand, 0.0);
    EXPECT_GE(a[i].price, 7.0);
    EXPECT_LE(a[i].price, 40.0);
  }
  EXPECT_NE(gen_dataset(ComplexSim{}, 5, PricePolicy{}, 18)[0].demand, a[0].demand);
}

TEST(GenDataset, HigherPricePolicyLowersMeanDemand) {
  auto mean = [](const Dataset& d) {
    double s = 0.0;
    for (double v : d.demands()) s += v;
    return s / static_cast<double>(d.size());
  };
  const auto low = gen_dataset(LinearSim{}, 5000, PricePolicy{{7.0, 15.0}}, 4);
  const auto high = gen_dataset(LinearSim{}, 5000, PricePolicy{{30.0, 40.0}}, 4);
  // Linear slope -1: the gap in mean price is 24.
  EXPECT_NEAR(mean(low) - mean(high), 24.0, 0.5);
}

TEST(GenDataset, LinearSimRegressionRecoversSlopes) {
  // Feature-slope standard error is sqrt(12 / N); at N = 1e5 the 0.05
  // tolerance is about 4.5 standard errors.
  const auto fit = fit_linear_demand(gen_dataset(LinearSim{}, 100000, PricePolicy{}, 5));
  EXPECT_NEAR(fit.price_coefficient, -1.0, 0.05);
  for (double b : fit.feature_coefficients) EXPECT_NEAR(b, 1.0, 0.05);
}

// At a fixed price the demand is a sum of terms symmetric about their means
// (uniform features, Gaussian shocks, and a shock scaled by b'z), and the
// zero floor essentially never binds at p = 20, so the skewness is ~0.
TEST(GenDataset, ComplexDemandIsSymmetricAtFixedPrice) {
  Rng rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = 10000;
  std::vector<double> d(n);
  for (auto& v : d) {
    const std::vector<double> z{unit(rng), unit(rng), unit(rng), unit(rng)};
    v = sample_demand(ComplexSim{}, 20.0, z, rng);
  }
  double m = 0.0;
  for (double v : d) m += v / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : d) {
    m2 += (v - m) * (v - m) / n;
    m3 += (v - m) * (v - m) * (v - m) / n;
  }
  EXPECT_NEAR(m3 / std::pow(m2, 1.5), 0.0, 0.1);
}

TEST(Scaling, ScaledFeaturesInUnitInterval) {
  const auto data = gen_dataset(ComplexSim{}, 200, PricePolicy{}, 7);
  const auto& sc = data.scaling();
  for (const auto& s : data.samples()) {
    EXPECT_NEAR(FeatureScaling::unscale(sc.price, sc.scale_price(s.price)), s.price, 1e-12);
    const auto u = sc.scale_features(s.features);
    for (double v : u) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

// ---- dataset CSV ----------------------------------------------------------

TEST(DatasetCsv, RoundTripIsExact) {
  const auto data = gen_dataset(ComplexSim{}, 50, PricePolicy{}, 8);
  std::stringstream ss;
  write_dataset_csv(ss, data);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "p,z1,z2,z3,z4,d");
  const auto back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].price, data[i].price);
    EXPECT_EQ(back[i].features, data[i].features);
    EXPECT_EQ(back[i].demand, data[i].demand);
  }
}

TEST(DatasetCsv, ScaledOutput) {
  const auto data = gen_dataset(LinearSim{}, 30, PricePolicy{}, 9);
  std::stringstream ss;
  write_dataset_csv(ss, data, true);
  const auto back = read_dataset_csv(ss);
  for (const auto& s : back.samples()) {
    EXPECT_GE(s.price, 0.0);
    EXPECT_LE(s.price, 1.0);
  }
  EXPECT_EQ(back.demands(), data.demands());
}

TEST(DatasetCsv, ErrorsCarryLineNumbers) {
  std::stringstream bad_header("price,z1,d\n1,2,3\n");
  EXPECT_THROW(read_dataset_csv(bad_header), std::runtime_error);
  std::stringstream bad_row("p,z1,d\n1,2,3\n4,x,6\n");
  try {
    read_dataset_csv(bad_row);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

// ---- electricity schema ---------------------------------------------------

TEST(DegreeDays, PrintedFormulas) {
  EXPECT_DOUBLE_EQ(heating_degree_day(10.0), 5.0);
  EXPECT_DOUBLE_EQ(heating_degree_day(20.0), 0.0);
  EXPECT_DOUBLE_EQ(cooling_degree_day(25.0), 7.0);
  EXPECT_DOUBLE_EQ(cooling_degree_day(10.0), 0.0);
}

std::string toy_csv(int rows) {
  std::string s = "Date,Demand,RRP,min temperature,max temperature,solar exposure,rainfall,school day,holiday\n";
  for (int i = rows; i >= 1; --i) {  // reverse chronological on purpose
    char buf[200];
    std::snprintf(buf, sizeof(buf), "2016-01-%02d,%d,%d,%d,%d,10,0,Y,N\n", i, 100000 + i, 50 + i, 10 + i, 20 - i);
    s += buf;
  }
  return s;
}

TEST(RealCsv, TenRowSplit) {
  std::stringstream ss(toy_csv(10));
  const auto rd = load_real_csv(ss);
  EXPECT_EQ(rd.train.size(), 9u);
  EXPECT_EQ(rd.test.size(), 1u);
  EXPECT_EQ(rd.rows_read, 10u);
  // Chronological: the last day is held out.
  EXPECT_DOUBLE_EQ(rd.test[0].demand, 100010.0);
  EXPECT_DOUBLE_EQ(rd.train[0].price, 51.0);
  // Features: HDD from T_max, CDD from T_min.
  EXPECT_DOUBLE_EQ(rd.train[0].features[0], heating_degree_day(19.0));
  EXPECT_DOUBLE_EQ(rd.train[0].features[1], cooling_degree_day(11.0));
  // Test rows are scaled with training statistics.
  EXPECT_DOUBLE_EQ(rd.test.scaling().price.lo, rd.train.scaling().price.lo);
  EXPECT_DOUBLE_EQ(rd.test.scaling().price.hi, rd.train.scaling().price.hi);
}

TEST(RealCsv, MissingColumnIsNamed) {
  std::stringstream ss("Date,Demand,RRP,min temperature,max temperature,rainfall,school day,holiday\n");
  try {
    load_real_csv(ss);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("solar_exposure"), std::string::npos) << e.what();
  }
}

TEST(RealCsv, BadRowsDroppedWithDiagnostics) {
  std::string text = toy_csv(10);
  text += "2016-02-01,abc,50,10,20,10,0,Y,N\n";
  text += "2016-02-02,100000,,10,20,10,0,Y,N\n";
  text += "2016-02-03,-5,50,10,20,10,0,Y,N\n";
  std::stringstream ss(text);
  const auto rd = load_real_csv(ss);
  EXPECT_EQ(rd.rows_read, 13u);
  EXPECT_EQ(rd.dropped_invalid, 2u);
  EXPECT_EQ(rd.dropped_missing, 1u);
  ASSERT_EQ(rd.diagnostics.size(), 3u);
  EXPECT_EQ(rd.diagnostics[0].rfind("line 12:", 0), 0u) << rd.diagnostics[0];
  EXPECT_EQ(rd.train.size() + rd.test.size(), 10u);
}

TEST(RealCsv, SyntheticStandInLoads) {
  std::stringstream ss;
  write_synthetic_real_csv(ss, 100, 1);
  const auto rd = load_real_csv(ss);
  EXPECT_EQ(rd.train.size(), 90u);
  EXPECT_EQ(rd.test.size(), 10u);
  EXPECT_EQ(rd.train.feature_dim(), real_feature_names().size());
  EXPECT_TRUE(rd.diagnostics.empty());
  std::stringstream again;
  write_synthetic_real_csv(again, 100, 1);
  std::stringstream first;
  write_synthetic_real_csv(first, 100, 1);
  EXPECT_EQ(first.str(), again.str());
}

}  // namespace
}  // namespace nvp
