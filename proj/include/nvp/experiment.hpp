#pragma once

// Experiment drivers shared by the command-line tool and the acceptance
// suite: AGD solves scored against the Monte Carlo reference, method
// comparisons, sample-size and step-size sweeps.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nvp/agd.hpp"
#include "nvp/baselines.hpp"
#include "nvp/datagen.hpp"
#include "nvp/oracle.hpp"

namespace nvp {

/// Ground truth for one simulated query: the oracle and its grid optimum.
class TruthReference {
 public:
  TruthReference(const DemandModel& model, std::span<const double> z, const NewsvendorParams& params,
                 const ProfitKind& kind, const OracleConfig& cfg)
      : oracle_(model, z, cfg), params_(params), kind_(kind),
        optimum_(grid_optimum(oracle_, params, kind, cfg)) {}

  struct Eval {
    double profit = 0.0;
    double stderr_ = 0.0;
    double gap = 0.0;
  };

  [[nodiscard]] Eval evaluate(const Decision& x) const {
    const Estimate e = oracle_.expected_profit(params_, x, kind_);
    return {e.value, e.stderr_, optimum_.gap(e.value)};
  }

  [[nodiscard]] const DemandOracle& oracle() const { return oracle_; }
  [[nodiscard]] const GridOptimum& optimum() const { return optimum_; }
  [[nodiscard]] const NewsvendorParams& params() const { return params_; }
  [[nodiscard]] const ProfitKind& kind() const { return kind_; }

 private:
  DemandOracle oracle_;
  NewsvendorParams params_;
  ProfitKind kind_;
  GridOptimum optimum_;
};

struct SolveSetup {
  NewsvendorParams params;
  ProfitKind kind;
  WeightSpec weights;
  AgdConfig agd;
  TieRule rule = TieRule::lower;
  std::optional<Decision> x0;
  std::uint64_t seed = 0;  ///< weight-model fitting seed (CART CV folds, forest bootstrap)
};

struct SolveResult {
  std::string weights;  ///< fitted hyperparameters, e.g. "knn(k=20)"
  AgdTrace trace;
};

inline SolveResult solve_agd(const Dataset& data, const SolveSetup& setup, std::span<const double> z) {
  const auto wm = WeightModel::fit(data, setup.weights, QuerySpace::joined, setup.seed);
  const Problem pb{wm, data, setup.params, setup.kind, std::vector<double>(z.begin(), z.end()), setup.rule};
  SolveResult out{wm.describe(), {}};
  out.trace = setup.x0 ? run_agd(pb, *setup.x0, setup.agd) : run_agd(pb, setup.agd);
  return out;
}

// ---------------------------------------------------------------------------
// Method comparison.

struct MethodResult {
  std::string method;  ///< agd, independent, saa, pto
  std::string family;  ///< weight family, empty for saa/pto
  std::string detail;  ///< fitted hyperparameters or stop reason
  Decision x;
  double true_profit = 0.0;
  double stderr_ = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
};

/// One row per method: AGD and its decision-independent counterpart for each
/// family, pure SAA and predict-then-optimize.
inline std::vector<MethodResult> compare_methods(const Dataset& data, const SolveSetup& setup,
                                                 std::span<const WeightFamily> families,
                                                 std::span<const double> z, const TruthReference& truth) {
  std::vector<MethodResult> rows;
  auto score = [&](MethodResult r) {
    const auto e = truth.evaluate(r.x);
    r.true_profit = e.profit;
    r.stderr_ = e.stderr_;
    r.gap = e.gap;
    rows.push_back(std::move(r));
  };
  for (WeightFamily fam : families) {
    SolveSetup s = setup;
    s.weights.family = fam;
    const auto sol = solve_agd(data, s, z);
    score({"agd", to_string(fam), sol.weights + ";" + to_string(sol.trace.stop_reason),
           sol.trace.final_decision(), 0, 0, 0, sol.trace.iterations()});
    const auto indep = solve_decision_independent(data, setup.params, s.weights, z, setup.seed);
    score({"independent", to_string(fam), "", indep.x, 0, 0, 0, 0});
  }
  score({"saa", "", "", solve_pure_saa(data, setup.params).x, 0, 0, 0, 0});
  const auto pto = solve_pto(fit_linear_demand(data), setup.params, z);
  score({"pto", "", pto.all_forecasts_negative ? "all_forecasts_negative" : "", pto.x, 0, 0, 0, 0});
  return rows;
}

// ---------------------------------------------------------------------------
// Sweeps.

inline const std::vector<std::size_t>& default_sweep_sizes() {
  static const std::vector<std::size_t> sizes{100, 200, 500, 1000, 2000, 5000};
  return sizes;
}

struct SampleSizeCell {
  std::size_t n = 0;
  std::size_t draw = 0;
  Decision x;
  double true_profit = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
};

struct SampleSizeRow {
  std::size_t n = 0;
  double mean_gap = 0.0;
  double max_gap = 0.0;
  double min_gap = 0.0;
  double mean_iterations = 0.0;
};

/// AGD over datasets of each size; each draw regenerates the dataset
/// (features, prices and demands) from its own derived seed.
inline std::vector<SampleSizeCell> sweep_sample_size(const DemandModel& model, const PricePolicy& policy,
                                                     std::span<const std::size_t> sizes, std::size_t draws,
                                                     const SolveSetup& setup, std::span<const double> z,
                                                     const TruthReference& truth, std::uint64_t seed) {
  std::vector<SampleSizeCell> cells;
  for (std::size_t n : sizes)
    for (std::size_t d = 0; d < draws; ++d) {
      const auto data = gen_dataset(model, n, policy, derive_seed(seed, d));
      SolveSetup s = setup;
      s.seed = derive_seed(seed, 1000 + d);
      const auto sol = solve_agd(data, s, z);
      const auto e = truth.evaluate(sol.trace.final_decision());
      cells.push_back({n, d, sol.trace.final_decision(), e.profit, e.gap, sol.trace.iterations()});
    }
  return cells;
}

inline std::vector<SampleSizeRow> summarize_sample_size(std::span<const SampleSizeCell> cells) {
  std::vector<SampleSizeRow> rows;
  for (const auto& c : cells) {
    if (rows.empty() || rows.back().n != c.n)
      rows.push_back({c.n, 0.0, -std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), 0.0});
    auto& r = rows.back();
    r.mean_gap += c.gap;
    r.max_gap = std::max(r.max_gap, c.gap);
    r.min_gap = std::min(r.min_gap, c.gap);
    r.mean_iterations += static_cast<double>(c.iterations);
  }
  for (auto& r : rows) {
    const auto k = static_cast<double>(std::count_if(cells.begin(), cells.end(),
                                                     [&](const SampleSizeCell& c) { return c.n == r.n; }));
    r.mean_gap /= k;
    r.mean_iterations /= k;
  }
  return rows;
}

struct StepGridCell {
  double alpha0 = 0.0;
  double sigma = 0.0;
  Decision x;
  double true_profit = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  std::string stop_reason;
};

/// Armijo (alpha0, sigma) grid on one dataset; the weight model is fitted once.
inline std::vector<StepGridCell> sweep_step_grid(const Dataset& data, const SolveSetup& setup,
                                                 std::span<const double> alpha0s, std::span<const double> sigmas,
                                                 std::span<const double> z, const TruthReference& truth) {
  const auto wm = WeightModel::fit(data, setup.weights, QuerySpace::joined, setup.seed);
  const Problem pb{wm, data, setup.params, setup.kind, std::vector<double>(z.begin(), z.end()), setup.rule};
  const Decision x0 = setup.x0 ? *setup.x0 : default_start(pb);
  std::vector<StepGridCell> cells;
  for (double a : alpha0s)
    for (double s : sigmas) {
      AgdConfig cfg = setup.agd;
      ArmijoStep rule = std::holds_alternative<ArmijoStep>(cfg.step) ? std::get<ArmijoStep>(cfg.step) : ArmijoStep{};
      rule.alpha0 = a;
      rule.sigma = s;
      cfg.step = rule;
      const auto trace = run_agd(pb, x0, cfg);
      const auto e = truth.evaluate(trace.final_decision());
      cells.push_back({a, s, trace.final_decision(), e.profit, e.gap, trace.iterations(),
                       to_string(trace.stop_reason)});
    }
  return cells;
}

}  // namespace nvp
