#pragma once

// Ground truth for simulated instances. Every demand model here has the form
// D = max(0, m(p, z) + u) with a shock u whose law depends on z only, so one
// sorted batch of shocks serves every price (common random numbers) and each
// expectation reduces to a few binary searches over prefix sums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvp/agd.hpp"
#include "nvp/approx.hpp"
#include "nvp/baselines.hpp"
#include "nvp/core.hpp"
#include "nvp/datagen.hpp"
#include "nvp/parallel.hpp"

namespace nvp {

struct OracleConfig {
  std::size_t mc_samples = 20000;
  std::size_t p_points = 331;  ///< 0.1 spacing over [7, 40]
  std::size_t q_points = 481;  ///< 0.25 spacing over [0, 120]
  std::uint64_t seed = 0;

  void validate() const {
    if (mc_samples < 1) throw std::invalid_argument("OracleConfig: mc_samples must be >= 1");
    if (p_points < 2 || q_points < 2)
      throw std::invalid_argument("OracleConfig: grid resolutions must be >= 2");
  }
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct GradientEstimate {
  Gradient value;
  Gradient stderr_;
};

/// Monte Carlo reference for one feature vector z.
class DemandOracle {
 public:
  DemandOracle(DemandModel model, std::vector<double> z, std::size_t mc_samples, std::uint64_t seed)
      : model_(std::move(model)), z_(std::move(z)) {
    if (mc_samples < 1) throw std::invalid_argument("DemandOracle: mc_samples must be >= 1");
    Rng rng(seed);
    u_.resize(mc_samples);
    for (auto& v : u_) v = draw_shock(model_, z_, rng);
    std::sort(u_.begin(), u_.end());
    s1_.assign(u_.size() + 1, 0.0);
    s2_.assign(u_.size() + 1, 0.0);
    for (std::size_t i = 0; i < u_.size(); ++i) {
      s1_[i + 1] = s1_[i] + u_[i];
      s2_[i + 1] = s2_[i] + u_[i] * u_[i];
    }
  }

  DemandOracle(const DemandModel& model, std::span<const double> z, const OracleConfig& cfg)
      : DemandOracle(model, std::vector<double>(z.begin(), z.end()), cfg.mc_samples, cfg.seed) {}

  [[nodiscard]] const DemandModel& model() const { return model_; }
  [[nodiscard]] const std::vector<double>& z() const { return z_; }
  [[nodiscard]] std::size_t samples() const { return u_.size(); }
  [[nodiscard]] const std::vector<double>& sorted_shocks() const { return u_; }
  [[nodiscard]] double location(double p) const { return mean_demand(model_, p, z_); }

  /// Sorted demand draws at price p (sorted because D is monotone in u).
  [[nodiscard]] std::vector<double> sorted_demands(double p) const {
    const double m = location(p);
    std::vector<double> d(u_.size());
    for (std::size_t i = 0; i < u_.size(); ++i) d[i] = std::max(0.0, m + u_[i]);
    return d;
  }

  /// E[profit] at x under the demand law induced by price p_dist (defaults
  /// to x.p, i.e. the true decision-dependent law).
  [[nodiscard]] Estimate expected_profit(const NewsvendorParams& params, const Decision& x,
                                         const ProfitKind& kind = {},
                                         std::optional<double> p_dist = std::nullopt) const {
    const Decision e = kind.effective(x);
    const auto t = tallies(location(p_dist.value_or(e.p)), e.q);
    const double M = static_cast<double>(u_.size());
    const double a = e.p - params.s;
    const double b = (params.s - params.c) * e.q;
    const double top = (e.p - params.c) * e.q;
    const double sum = a * t.sum_d + b * t.n_lt + top * t.n_ge;
    const double sum_sq =
        a * a * t.sum_d2 + 2.0 * a * b * t.sum_d + b * b * t.n_lt + top * top * t.n_ge;
    Estimate out;
    out.value = sum / M;
    if (kind.form == ProfitForm::adjusted) out.value -= adjustment_cost(params, e.p);
    out.stderr_ = standard_error(sum, sum_sq);
    return out;
  }

  /// E[subgradient] at x, with the same conventions as expected_profit.
  [[nodiscard]] GradientEstimate expected_gradient(const NewsvendorParams& params, const Decision& x,
                                                   const ProfitKind& kind = {},
                                                   TieRule rule = TieRule::lower,
                                                   std::optional<double> p_dist = std::nullopt) const {
    const Decision e = kind.effective(x);
    const double m = location(p_dist.value_or(e.p));
    const auto t = tallies(m, e.q);
    const double M = static_cast<double>(u_.size());
    // min(D, q) is D below q and q otherwise.
    const double sum_min = t.sum_d + e.q * t.n_ge;
    const double sum_min2 = t.sum_d2 + e.q * e.q * t.n_ge;
    // Count of the event e = 1 for the tie rule.
    const double n_e = rule == TieRule::lower
                           ? t.n_lt
                           : static_cast<double>(std::upper_bound(u_.begin(), u_.end(), e.q - m) - u_.begin());
    GradientEstimate out;
    out.value.dp = sum_min / M;
    out.stderr_.dp = standard_error(sum_min, sum_min2);
    const double frac = n_e / M;
    out.value.dq = (e.p - params.c) - (e.p - params.s) * frac;
    out.stderr_.dq = (e.p - params.s) * standard_error(n_e, n_e);
    if (kind.form == ProfitForm::adjusted) out.value.dp -= 2.0 * params.gamma * (e.p - params.p_ref);
    if (kind.price_only) out.value.dq = out.stderr_.dq = 0.0;
    return out;
  }

 private:
  struct Tallies {
    double n_lt = 0.0;    ///< draws with D < q
    double n_ge = 0.0;    ///< draws with D >= q
    double sum_d = 0.0;   ///< sum of D over D < q
    double sum_d2 = 0.0;  ///< sum of D^2 over D < q
  };

  [[nodiscard]] Tallies tallies(double m, double q) const {
    const auto idx = [&](auto it) { return static_cast<std::size_t>(it - u_.begin()); };
    // D = 0 exactly when u <= -m; D < q exactly when u < q - m (for q > 0).
    const std::size_t n0 = idx(std::upper_bound(u_.begin(), u_.end(), -m));
    const std::size_t nlt = q > 0.0 ? std::max(n0, idx(std::lower_bound(u_.begin(), u_.end(), q - m))) : 0;
    Tallies t;
    t.n_lt = static_cast<double>(nlt);
    t.n_ge = static_cast<double>(u_.size() - nlt);
    if (nlt > n0) {
      const double cnt = static_cast<double>(nlt - n0);
      const double su = s1_[nlt] - s1_[n0];
      const double su2 = s2_[nlt] - s2_[n0];
      t.sum_d = cnt * m + su;
      t.sum_d2 = cnt * m * m + 2.0 * m * su + su2;
    }
    return t;
  }

  [[nodiscard]] double standard_error(double sum, double sum_sq) const {
    const std::size_t n = u_.size();
    if (n < 2 || u_.front() == u_.back()) return 0.0;
    const double M = static_cast<double>(n);
    const double mean = sum / M;
    const double var = std::max(0.0, (sum_sq / M - mean * mean) * M / (M - 1.0));
    return std::sqrt(var / M);
  }

  DemandModel model_;
  std::vector<double> z_;
  std::vector<double> u_;
  std::vector<double> s1_;
  std::vector<double> s2_;
};

/// Straight Monte Carlo mean and standard error of profit over fresh draws
/// (no sorting tricks); the reference the fast oracle is tested against.
inline Estimate mc_true_objective(const DemandModel& model, const NewsvendorParams& params,
                                  const Decision& x, std::span<const double> z,
                                  const ProfitKind& kind, const OracleConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < cfg.mc_samples; ++i) {
    const double d = sample_demand(model, x.p, z, rng);
    const double v = kind_profit(params, kind, x, d);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(cfg.mc_samples);
  const double se = cfg.mc_samples > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  return {mean, se};
}

inline GradientEstimate mc_expected_gradient(const DemandModel& model,
                                             const NewsvendorParams& params, const Decision& x,
                                             std::span<const double> z, const ProfitKind& kind,
                                             TieRule rule, const OracleConfig& cfg) {
  cfg.validate();
  return DemandOracle(model, z, cfg).expected_gradient(params, x, kind, rule);
}

// ---------------------------------------------------------------------------
// Grid optimum.

struct GridOptimum {
  Decision x_star;
  double f_star = 0.0;
  double f_star_stderr = 0.0;
  std::vector<double> p_grid;
  std::vector<double> q_grid;
  std::vector<double> values;   ///< p-major: values[i * q_grid.size() + j]
  std::vector<double> stderrs;

  [[nodiscard]] double value(std::size_t i, std::size_t j) const { return values[i * q_grid.size() + j]; }
  [[nodiscard]] double p_step() const { return p_grid.size() > 1 ? p_grid[1] - p_grid[0] : 0.0; }
  [[nodiscard]] double q_step() const { return q_grid.size() > 1 ? q_grid[1] - q_grid[0] : 0.0; }

  /// Relative optimality gap (f* - f) / |f*|.
  [[nodiscard]] double gap(double f) const { return (f_star - f) / std::abs(f_star); }
};

namespace detail {
inline std::vector<double> q_grid_for(const NewsvendorParams& params, const ProfitKind& kind,
                                      std::size_t q_points) {
  if (kind.price_only) return {kind.frozen_q};
  return linspace(params.q_bounds, q_points);
}

/// Row-parallel evaluation of `eval(p, q)` over the grid.
template <class Eval>
GridOptimum evaluate_grid(std::vector<double> p_grid, std::vector<double> q_grid, Eval&& eval) {
  GridOptimum g;
  g.p_grid = std::move(p_grid);
  g.q_grid = std::move(q_grid);
  const std::size_t nq = g.q_grid.size();
  g.values.assign(g.p_grid.size() * nq, 0.0);
  g.stderrs.assign(g.values.size(), 0.0);
  parallel_for(g.p_grid.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < nq; ++j) {
      const Estimate e = eval(g.p_grid[i], g.q_grid[j]);
      g.values[i * nq + j] = e.value;
      g.stderrs[i * nq + j] = e.stderr_;
    }
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < g.values.size(); ++k)
    if (g.values[k] > g.values[best]) best = k;
  g.x_star = {g.p_grid[best / nq], g.q_grid[best % nq]};
  g.f_star = g.values[best];
  g.f_star_stderr = g.stderrs[best];
  return g;
}
}  // namespace detail

inline GridOptimum grid_optimum(const DemandOracle& oracle, const NewsvendorParams& params,
                                const ProfitKind& kind, const OracleConfig& cfg) {
  cfg.validate();
  params.validate();
  return detail::evaluate_grid(linspace(params.p_bounds, cfg.p_points),
                               detail::q_grid_for(params, kind, cfg.q_points),
                               [&](double p, double q) {
                                 return oracle.expected_profit(params, {p, q}, kind);
                               });
}

inline GridOptimum grid_optimum(const DemandModel& model, const NewsvendorParams& params,
                                std::span<const double> z, const ProfitKind& kind,
                                const OracleConfig& cfg) {
  return grid_optimum(DemandOracle(model, z, cfg), params, kind, cfg);
}

// ---------------------------------------------------------------------------
// Performatively stable point.

struct StablePointResult {
  Decision x_ps;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<Decision> cycle;  ///< visited cycle when the iteration does not settle
};

/// Repeated argmax: each round maximizes over the grid with the demand law
/// frozen at the previous round's price.
inline StablePointResult stable_point(const DemandOracle& oracle, const NewsvendorParams& params,
                                      const ProfitKind& kind, const OracleConfig& cfg,
                                      std::size_t max_rounds = 100) {
  cfg.validate();
  params.validate();
  const auto p_grid = linspace(params.p_bounds, cfg.p_points);
  const auto q_grid = detail::q_grid_for(params, kind, cfg.q_points);
  std::vector<Decision> visited{kind.effective({params.p_bounds.midpoint(), q_grid[q_grid.size() / 2]})};
  StablePointResult out;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    const double frozen = visited.back().p;
    const auto g = detail::evaluate_grid(p_grid, q_grid, [&](double p, double q) {
      return oracle.expected_profit(params, {p, q}, kind, frozen);
    });
    out.iterations = round + 1;
    out.residual = distance(g.x_star, visited.back());
    const auto seen = std::find(visited.begin(), visited.end(), g.x_star);
    if (seen == visited.end() - 1) {
      out.x_ps = g.x_star;
      out.converged = true;
      return out;
    }
    if (seen != visited.end()) {
      out.cycle.assign(seen, visited.end());
      out.x_ps = g.x_star;
      return out;
    }
    visited.push_back(g.x_star);
  }
  out.x_ps = visited.back();
  return out;
}

// ---------------------------------------------------------------------------
// Sensitivity and Lipschitz estimates.

struct SensitivityEstimate {
  double epsilon_hat = 0.0;
  std::vector<double> w1;  ///< per price pair
};

/// 1-Wasserstein distance between demand laws at two prices from paired
/// sorted draws, divided by the price difference; maximized over pairs.
inline SensitivityEstimate estimate_sensitivity(const DemandOracle& oracle,
                                                std::span<const std::pair<double, double>> pairs) {
  SensitivityEstimate out;
  for (const auto& [p1, p2] : pairs) {
    if (p1 == p2) throw std::invalid_argument("estimate_sensitivity: coincident price pair");
    const auto d1 = oracle.sorted_demands(p1);
    const auto d2 = oracle.sorted_demands(p2);
    double w = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i) w += std::abs(d1[i] - d2[i]);
    w /= static_cast<double>(d1.size());
    out.w1.push_back(w);
    out.epsilon_hat = std::max(out.epsilon_hat, w / std::abs(p1 - p2));
  }
  return out;
}

inline SensitivityEstimate estimate_sensitivity(const DemandModel& model, std::span<const double> z,
                                                std::span<const std::pair<double, double>> pairs,
                                                const OracleConfig& cfg) {
  return estimate_sensitivity(DemandOracle(model, z, cfg), pairs);
}

/// Consecutive grid price pairs over the box.
inline std::vector<std::pair<double, double>> adjacent_price_pairs(const Interval& r, std::size_t n) {
  const auto g = linspace(r, n);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) out.emplace_back(g[i], g[i + 1]);
  return out;
}

/// Max finite-difference ratio of profit in demand over the decision grid
/// and consecutive demand levels.
inline double lipschitz_in_demand(const NewsvendorParams& params, const ProfitKind& kind,
                                  std::span<const double> p_grid, std::span<const double> q_grid,
                                  std::span<const double> demand_levels) {
  double L = 0.0;
  for (double p : p_grid)
    for (double q : q_grid)
      for (std::size_t k = 0; k + 1 < demand_levels.size(); ++k) {
        const double d0 = demand_levels[k];
        const double d1 = demand_levels[k + 1];
        if (d1 == d0) continue;
        const double r = std::abs(kind_profit(params, kind, {p, q}, d1) -
                                  kind_profit(params, kind, {p, q}, d0)) / std::abs(d1 - d0);
        L = std::max(L, r);
      }
  return L;
}

/// Max finite-difference ratio of the subgradient jointly in (decision,
/// demand) along each coordinate over the grid.
inline double gradient_lipschitz(const NewsvendorParams& params, const ProfitKind& kind,
                                 std::span<const double> p_grid, std::span<const double> q_grid,
                                 std::span<const double> demand_levels) {
  double L = 0.0;
  auto g = [&](double p, double q, double d) {
    return kind_subgradient(params, kind, {p, q}, d, TieRule::lower);
  };
  for (std::size_t i = 0; i < p_grid.size(); ++i)
    for (std::size_t j = 0; j < q_grid.size(); ++j)
      for (std::size_t k = 0; k < demand_levels.size(); ++k) {
        const double p = p_grid[i], q = q_grid[j], d = demand_levels[k];
        const Gradient here = g(p, q, d);
        if (i + 1 < p_grid.size())
          L = std::max(L, (g(p_grid[i + 1], q, d) - here).norm() / (p_grid[i + 1] - p));
        if (j + 1 < q_grid.size() && !kind.price_only)
          L = std::max(L, (g(p, q_grid[j + 1], d) - here).norm() / (q_grid[j + 1] - q));
        if (k + 1 < demand_levels.size() && demand_levels[k + 1] > d)
          L = std::max(L, (g(p, q, demand_levels[k + 1]) - here).norm() / (demand_levels[k + 1] - d));
      }
  return L;
}

/// Evenly spaced quantiles of the oracle's demand draws at price p.
inline std::vector<double> demand_quantile_levels(const DemandOracle& oracle, double p, std::size_t n) {
  const auto d = oracle.sorted_demands(p);
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = (d.size() - 1) * k / std::max<std::size_t>(1, n - 1);
    if (out.empty() || d[idx] != out.back()) out.push_back(d[idx]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Theory-side helpers.

/// Root of 4 B^2 eta^2 - 2 A eta + 1 = 0 (the smaller one); nullopt when no
/// positive real root exists, i.e. unless A >= 2B >= 0 with A > 0.
inline std::optional<double> contraction_step(double A, double B) {
  if (!(A > 0.0) || B < 0.0 || A < 2.0 * B) return std::nullopt;
  if (B == 0.0) return 1.0 / (2.0 * A);
  const double disc = A * A - 4.0 * B * B;
  return (A - std::sqrt(std::max(0.0, disc))) / (4.0 * B * B);
}

/// Right-hand side of the price-only convergence bound after the recorded
/// steps eta^0..eta^k and prices p^0..p^k:
///   eps * sum eta^r |p* - p^r| / sum eta^r
///   + ((p^0 - p*)^2 + (D_m ^ q)^2 sum (eta^r)^2) / (2 sum eta^r).
inline double price_only_bound(double epsilon, std::span<const double> steps,
                               std::span<const double> prices, double p_star, double max_demand,
                               double q) {
  if (steps.size() != prices.size() || steps.empty())
    throw std::invalid_argument("price_only_bound: steps and prices must align");
  double s = 0.0, s2 = 0.0, dev = 0.0;
  for (std::size_t r = 0; r < steps.size(); ++r) {
    s += steps[r];
    s2 += steps[r] * steps[r];
    dev += steps[r] * std::abs(p_star - prices[r]);
  }
  if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
  const double dm = std::min(max_demand, q);
  const double p0 = prices.front() - p_star;
  return epsilon * dev / s + (p0 * p0 + dm * dm * s2) / (2.0 * s);
}

}  // namespace nvp
