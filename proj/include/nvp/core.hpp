#pragma once

// Profit and subgradient arithmetic for the single-product newsvendor
// pricing problem, with and without a quadratic price-adjustment cost.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nvp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double clamp(double v) const { return std::clamp(v, lo, hi); }
  [[nodiscard]] bool contains(double v) const { return v >= lo && v <= hi; }
  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
};

inline bool all_finite(double v) { return std::isfinite(v); }
template <class... Ts>
bool all_finite(double v, Ts... rest) {
  return std::isfinite(v) && all_finite(rest...);
}

/// Economic constants plus the rectangular feasible region for (p, q).
struct NewsvendorParams {
  double c = 6.0;       ///< purchase cost per unit
  double s = 2.0;       ///< salvage value per unit
  double gamma = 0.0;   ///< price-adjustment coefficient
  double p_ref = 0.0;   ///< reference price for the adjustment cost
  Interval p_bounds{7.0, 40.0};
  Interval q_bounds{0.0, 120.0};

  void validate() const {
    if (!all_finite(c, s, gamma, p_ref, p_bounds.lo, p_bounds.hi, q_bounds.lo,
                    q_bounds.hi))
      throw std::invalid_argument("NewsvendorParams: non-finite field");
    if (!(s < c))
      throw std::invalid_argument("NewsvendorParams: salvage must be below cost");
    if (!(c <= p_bounds.lo))
      throw std::invalid_argument("NewsvendorParams: cost must not exceed the lowest price");
    if (!(p_bounds.lo <= p_bounds.hi))
      throw std::invalid_argument("NewsvendorParams: empty price interval");
    if (!(0.0 <= q_bounds.lo && q_bounds.lo <= q_bounds.hi))
      throw std::invalid_argument("NewsvendorParams: invalid quantity interval");
    if (gamma < 0.0)
      throw std::invalid_argument("NewsvendorParams: gamma must be non-negative");
  }
};

struct Decision {
  double p = 0.0;
  double q = 0.0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// A two-component (d/dp, d/dq) vector; used for gradients and ascent steps.
struct Gradient {
  double dp = 0.0;
  double dq = 0.0;

  [[nodiscard]] double norm() const { return std::hypot(dp, dq); }
  [[nodiscard]] double dot(const Gradient& o) const { return dp * o.dp + dq * o.dq; }

  Gradient& operator+=(const Gradient& o) {
    dp += o.dp;
    dq += o.dq;
    return *this;
  }
  friend Gradient operator+(Gradient a, const Gradient& b) { return a += b; }
  friend Gradient operator-(const Gradient& a, const Gradient& b) {
    return {a.dp - b.dp, a.dq - b.dq};
  }
  friend Gradient operator*(double k, const Gradient& g) { return {k * g.dp, k * g.dq}; }
  friend bool operator==(const Gradient&, const Gradient&) = default;
};

inline double distance(const Decision& a, const Decision& b) {
  return std::hypot(a.p - b.p, a.q - b.q);
}

/// Which element of the subdifferential to pick at the kink q == D.
/// lower: e = 1{q > D}; upper: e = 1{q >= D}.
enum class TieRule { lower, upper };

inline std::string to_string(TieRule r) { return r == TieRule::lower ? "lower" : "upper"; }

namespace detail {
inline void check_inputs(const Decision& x, double d) {
  if (!all_finite(x.p, x.q, d))
    throw std::invalid_argument("profit: non-finite input");
  if (d < 0.0) throw std::invalid_argument("profit: negative demand");
}
}  // namespace detail

/// p * min(d, q) - c * q + s * (q - d)^+
inline double profit(const NewsvendorParams& params, const Decision& x, double d) {
  detail::check_inputs(x, d);
  return x.p * std::min(d, x.q) - params.c * x.q + params.s * std::max(x.q - d, 0.0);
}

inline double adjustment_cost(const NewsvendorParams& params, double p) {
  const double dev = p - params.p_ref;
  return params.gamma * dev * dev;
}

inline double profit_adjusted(const NewsvendorParams& params, const Decision& x, double d) {
  return profit(params, x, d) - adjustment_cost(params, x.p);
}

inline Gradient subgradient(const NewsvendorParams& params, const Decision& x, double d,
                            TieRule rule = TieRule::lower) {
  detail::check_inputs(x, d);
  const bool over = rule == TieRule::lower ? x.q > d : x.q >= d;
  const double e = over ? 1.0 : 0.0;
  return {std::min(d, x.q), (x.p - params.c) - (x.p - params.s) * e};
}

inline Gradient subgradient_adjusted(const NewsvendorParams& params, const Decision& x,
                                     double d, TieRule rule = TieRule::lower) {
  Gradient g = subgradient(params, x, d, rule);
  g.dp -= 2.0 * params.gamma * (x.p - params.p_ref);
  return g;
}

}  // namespace nvp
