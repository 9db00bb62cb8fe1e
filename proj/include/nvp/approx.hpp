#pragma once

// Weighted-sample approximation of the expected profit and of the expected
// profit subgradient. The weights are re-queried at the candidate price on
// every call: that query is what makes the approximation decision-dependent.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvp/core.hpp"
#include "nvp/dataset.hpp"
#include "nvp/weights/weight_model.hpp"

namespace nvp {

enum class ProfitForm { plain, adjusted };

/// Which profit is optimized. With price_only set, q is not a decision
/// variable: it is pinned to frozen_q and its gradient component is dropped.
struct ProfitKind {
  ProfitForm form = ProfitForm::plain;
  bool price_only = false;
  double frozen_q = 0.0;

  static ProfitKind plain() { return {}; }
  static ProfitKind adjusted() { return {ProfitForm::adjusted, false, 0.0}; }
  static ProfitKind price_only_at(double q, ProfitForm f = ProfitForm::plain) {
    return {f, true, q};
  }

  /// The decision actually evaluated (q pinned for price-only problems).
  [[nodiscard]] Decision effective(const Decision& x) const {
    return price_only ? Decision{x.p, frozen_q} : x;
  }
};

inline std::string to_string(const ProfitKind& k) {
  std::string s = k.form == ProfitForm::plain ? "plain" : "adjusted";
  if (k.price_only) s += "/price_only(q=" + std::to_string(k.frozen_q) + ")";
  return s;
}

inline double kind_profit(const NewsvendorParams& params, const ProfitKind& kind,
                          const Decision& x, double d) {
  const Decision e = kind.effective(x);
  return kind.form == ProfitForm::plain ? profit(params, e, d) : profit_adjusted(params, e, d);
}

inline Gradient kind_subgradient(const NewsvendorParams& params, const ProfitKind& kind,
                                 const Decision& x, double d, TieRule rule) {
  const Decision e = kind.effective(x);
  Gradient g = kind.form == ProfitForm::plain ? subgradient(params, e, d, rule)
                                              : subgradient_adjusted(params, e, d, rule);
  if (kind.price_only) g.dq = 0.0;
  return g;
}

/// Everything needed to evaluate the approximate model at a decision.
/// Holds a reference to the weight model and dataset; both must outlive it.
struct Problem {
  const WeightModel& weights;
  const Dataset& data;
  NewsvendorParams params;
  ProfitKind kind;
  std::vector<double> z;
  TieRule rule = TieRule::lower;
};

struct ApproxEval {
  double objective = 0.0;
  Gradient gradient;
};

namespace detail {
inline void check_problem(const WeightModel& w, const Dataset& data, std::span<const double> z) {
  if (z.size() != data.feature_dim())
    throw std::invalid_argument("feature vector dimension does not match the dataset");
  if (w.embedding().feature_dim() != data.feature_dim())
    throw std::invalid_argument("weight model was fitted on a different feature dimension");
}
}  // namespace detail

/// Objective and gradient from a single weight query.
inline ApproxEval approx_evaluate(const WeightModel& weights, const Dataset& data,
                                  const NewsvendorParams& params, const Decision& x,
                                  const ProfitKind& kind, std::span<const double> z,
                                  TieRule rule = TieRule::lower) {
  detail::check_problem(weights, data, z);
  const std::vector<double> w = weights.weights(x.p, z);
  if (w.size() != data.size())
    throw std::invalid_argument("weight model was fitted on a different dataset");
  ApproxEval out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double d = data[i].demand;
    out.objective += w[i] * kind_profit(params, kind, x, d);
    out.gradient += w[i] * kind_subgradient(params, kind, x, d, rule);
  }
  return out;
}

/// sum_i w_i(p, z) * profit(p, q, D_i)
inline double approx_objective(const WeightModel& weights, const Dataset& data,
                               const NewsvendorParams& params, const Decision& x,
                               const ProfitKind& kind, std::span<const double> z) {
  return approx_evaluate(weights, data, params, x, kind, z).objective;
}

/// sum_i w_i(p, z) * subgradient(p, q, D_i)
inline Gradient approx_gradient(const WeightModel& weights, const Dataset& data,
                                const NewsvendorParams& params, const Decision& x,
                                const ProfitKind& kind, std::span<const double> z,
                                TieRule rule = TieRule::lower) {
  return approx_evaluate(weights, data, params, x, kind, z, rule).gradient;
}

inline ApproxEval approx_evaluate(const Problem& pb, const Decision& x) {
  return approx_evaluate(pb.weights, pb.data, pb.params, x, pb.kind, pb.z, pb.rule);
}
inline double approx_objective(const Problem& pb, const Decision& x) {
  return approx_evaluate(pb, x).objective;
}
inline Gradient approx_gradient(const Problem& pb, const Decision& x) {
  return approx_evaluate(pb, x).gradient;
}

}  // namespace nvp
