#pragma once

// Comparison strategies: the decision-independent weighted model, pure SAA,
// and predict-then-optimize with a linear demand forecast.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvp/core.hpp"
#include "nvp/dataset.hpp"
#include "nvp/quantile.hpp"
#include "nvp/weights/weight_model.hpp"

namespace nvp {

inline constexpr std::size_t kPriceGridPoints = 200;

/// `n` evenly spaced points covering [lo, hi]; a single point if lo == hi.
inline std::vector<double> linspace(const Interval& r, std::size_t n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
  if (r.lo == r.hi || n == 1) return {r.lo};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = r.lo + r.width() * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = r.hi;
  return out;
}

/// Weighted demand quantile at the critical fractile (p - c)/(p - s),
/// clamped to the order-quantity bounds.
inline double critical_fractile_q(std::span<const double> weights, std::span<const double> demands,
                                  double p, const NewsvendorParams& params) {
  if (!(p > params.s)) throw std::invalid_argument("critical_fractile_q: price must exceed salvage");
  const double tau = (p - params.c) / (p - params.s);
  return params.q_bounds.clamp(weighted_quantile(weights, demands, tau));
}

struct BaselineSolution {
  Decision x;
  double objective = 0.0;  ///< value of the model the baseline optimizes
};

/// Maximizes sum_i w_i profit(p, q, D_i) for a fixed weight vector: exact
/// fractile in q, grid over p.
inline BaselineSolution solve_fixed_weights(std::span<const double> weights, const Dataset& data,
                                            const NewsvendorParams& params,
                                            std::size_t grid = kPriceGridPoints) {
  params.validate();
  if (weights.size() != data.size())
    throw std::invalid_argument("solve_fixed_weights: weight vector length mismatch");
  const std::vector<double> d = data.demands();
  BaselineSolution best{{}, -std::numeric_limits<double>::infinity()};
  for (double p : linspace(params.p_bounds, grid)) {
    const Decision x{p, critical_fractile_q(weights, d, p, params)};
    double f = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (weights[i] != 0.0) f += weights[i] * profit(params, x, d[i]);
    if (f > best.objective) best = {x, f};
  }
  return best;
}

/// Weights computed once from the features alone; the price no longer
/// moves the weights.
inline BaselineSolution solve_decision_independent(const WeightModel& features_only,
                                                   const Dataset& data,
                                                   const NewsvendorParams& params,
                                                   std::span<const double> z) {
  if (features_only.space() != QuerySpace::features_only)
    throw std::invalid_argument("solve_decision_independent: weight model must ignore price");
  const auto w = features_only.weights(0.0, z);
  return solve_fixed_weights(w, data, params);
}

inline BaselineSolution solve_decision_independent(const Dataset& data,
                                                   const NewsvendorParams& params,
                                                   const WeightSpec& spec,
                                                   std::span<const double> z,
                                                   std::uint64_t seed = 0) {
  const auto model = WeightModel::fit(data, spec, QuerySpace::features_only, seed);
  return solve_decision_independent(model, data, params, z);
}

inline BaselineSolution solve_pure_saa(const Dataset& data, const NewsvendorParams& params) {
  const std::vector<double> w(data.size(), 1.0 / static_cast<double>(data.size()));
  return solve_fixed_weights(w, data, params);
}

// ---------------------------------------------------------------------------
// Predict-then-optimize.

struct LinearDemandFit {
  double intercept = 0.0;
  double price_coefficient = 0.0;
  std::vector<double> feature_coefficients;

  [[nodiscard]] double predict(double p, std::span<const double> z) const {
    if (z.size() != feature_coefficients.size())
      throw std::invalid_argument("LinearDemandFit: feature dimension mismatch");
    double d = intercept + price_coefficient * p;
    for (std::size_t j = 0; j < z.size(); ++j) d += feature_coefficients[j] * z[j];
    return d;
  }
};

namespace detail {
inline std::string design_column_name(std::size_t j) {
  if (j == 0) return "intercept";
  if (j == 1) return "price";
  return "z" + std::to_string(j - 1);
}
}  // namespace detail

/// Ordinary least squares of demand on (1, p, z) in the dataset's raw units,
/// solved through the normal equations with a Cholesky factorization of the
/// column-normalized Gram matrix.
inline LinearDemandFit fit_linear_demand(const Dataset& data) {
  const std::size_t m = data.feature_dim();
  const std::size_t k = m + 2;
  if (data.size() <= k) throw std::invalid_argument("fit_linear_demand: need more samples than columns");

  auto column = [&](const Sample& s, std::size_t j) {
    return j == 0 ? 1.0 : j == 1 ? s.price : s.features[j - 2];
  };
  std::vector<double> gram(k * k, 0.0);
  std::vector<double> rhs(k, 0.0);
  for (const auto& s : data.samples())
    for (std::size_t a = 0; a < k; ++a) {
      const double xa = column(s, a);
      rhs[a] += xa * s.demand;
      for (std::size_t b = 0; b <= a; ++b) gram[a * k + b] += xa * column(s, b);
    }
  std::vector<double> norm(k);
  for (std::size_t a = 0; a < k; ++a) norm[a] = std::sqrt(gram[a * k + a]);
  for (std::size_t a = 0; a < k; ++a) {
    if (norm[a] == 0.0)
      throw std::runtime_error("fit_linear_demand: column '" + detail::design_column_name(a) +
                               "' is identically zero");
    rhs[a] /= norm[a];
    for (std::size_t b = 0; b <= a; ++b) gram[a * k + b] /= norm[a] * norm[b];
  }

  // Lower-triangular L with L L' = G.
  std::vector<double> L(k * k, 0.0);
  auto forward = [&](std::size_t n, std::span<const double> b) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = b[i];
      for (std::size_t j = 0; j < i; ++j) v -= L[i * k + j] * y[j];
      y[i] = v / L[i * k + i];
    }
    return y;
  };
  auto backward = [&](std::size_t n, std::vector<double> y) {
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) y[ii] -= L[j * k + ii] * y[j];
      y[ii] /= L[ii * k + ii];
    }
    return y;
  };
  constexpr double kPivotTol = 1e-10;
  for (std::size_t j = 0; j < k; ++j) {
    double diag = gram[j * k + j];
    for (std::size_t t = 0; t < j; ++t) diag -= L[j * k + t] * L[j * k + t];
    for (std::size_t i = j; i < k; ++i) {
      if (i == j) continue;
      double v = gram[i * k + j];
      for (std::size_t t = 0; t < j; ++t) v -= L[i * k + t] * L[j * k + t];
      L[i * k + j] = v;  // divided by the pivot below
    }
    if (diag <= kPivotTol) {
      // Express column j through the earlier columns to name the culprits.
      std::vector<double> g(j);
      for (std::size_t t = 0; t < j; ++t) g[t] = gram[j * k + t];
      const auto coef = backward(j, forward(j, g));
      std::string names;
      for (std::size_t t = 0; t < j; ++t)
        if (std::abs(coef[t]) > 1e-8) names += (names.empty() ? "" : ", ") + detail::design_column_name(t);
      throw std::runtime_error("fit_linear_demand: column '" + detail::design_column_name(j) +
                               "' is collinear with {" + names + "}");
    }
    L[j * k + j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < k; ++i) L[i * k + j] /= L[j * k + j];
  }
  const auto beta = backward(k, forward(k, rhs));

  LinearDemandFit fit;
  fit.intercept = beta[0] / norm[0];
  fit.price_coefficient = beta[1] / norm[1];
  fit.feature_coefficients.resize(m);
  for (std::size_t j = 0; j < m; ++j) fit.feature_coefficients[j] = beta[j + 2] / norm[j + 2];
  return fit;
}

struct PtoSolution {
  Decision x;
  double predicted_profit = 0.0;
  bool all_forecasts_negative = false;
};

/// Orders the point forecast and picks the price maximizing the
/// deterministic profit (p - c) * D_hat(p, z) over the price grid.
inline PtoSolution solve_pto(const LinearDemandFit& fit, const NewsvendorParams& params,
                             std::span<const double> z, std::size_t grid = kPriceGridPoints) {
  params.validate();
  PtoSolution best;
  bool found = false;
  for (double p : linspace(params.p_bounds, grid)) {
    const double d = fit.predict(p, z);
    if (d < 0.0) continue;
    const Decision x{p, params.q_bounds.clamp(d)};
    const double f = profit(params, x, d);
    if (!found || f > best.predicted_profit) {
      best = {x, f, false};
      found = true;
    }
  }
  if (!found) return {{params.p_bounds.lo, params.q_bounds.lo}, 0.0, true};
  return best;
}

}  // namespace nvp
