#pragma once

// Approximate gradient ascent on the weighted-sample profit model:
//   x_{r+1} = Proj_X( x_r + eta_r * G(x_r) )
// with a diminishing, Armijo (backtracking) or constant step rule.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nvp/approx.hpp"
#include "nvp/quantile.hpp"

namespace nvp {

struct DiminishingStep {
  double C = 0.05;
};

struct ArmijoStep {
  double alpha0 = 0.05;
  double beta = 0.5;
  double sigma = 0.0;
  double eps = 1e-8;
};

struct ConstantStep {
  double eta = 0.01;
};

using StepRule = std::variant<DiminishingStep, ArmijoStep, ConstantStep>;

inline void validate(const StepRule& rule) {
  struct V {
    void operator()(const DiminishingStep& d) const {
      if (!(d.C > 0.0)) throw std::invalid_argument("diminishing step: C must be positive");
    }
    void operator()(const ArmijoStep& a) const {
      if (!(a.alpha0 > 0.0)) throw std::invalid_argument("armijo: alpha0 must be positive");
      if (!(a.beta > 0.0 && a.beta < 1.0)) throw std::invalid_argument("armijo: beta must lie in (0,1)");
      if (!(a.sigma >= 0.0 && a.sigma < 1.0)) throw std::invalid_argument("armijo: sigma must lie in [0,1)");
      if (!(a.eps > 0.0)) throw std::invalid_argument("armijo: eps must be positive");
    }
    void operator()(const ConstantStep& c) const {
      if (!(c.eta > 0.0)) throw std::invalid_argument("constant step: eta must be positive");
    }
  };
  std::visit(V{}, rule);
}

struct AgdConfig {
  StepRule step = ArmijoStep{};
  std::size_t max_iters = 500;
  double grad_tol = 1e-6;

  void validate() const {
    nvp::validate(step);
    if (max_iters < 1) throw std::invalid_argument("AgdConfig: max_iters must be >= 1");
    if (!(grad_tol >= 0.0)) throw std::invalid_argument("AgdConfig: grad_tol must be >= 0");
  }
};

enum class StopReason { max_iters, step_below_eps, grad_below_tol };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::step_below_eps: return "step_below_eps";
    case StopReason::grad_below_tol: return "grad_below_tol";
  }
  return "?";
}

/// Iterate history. Entry r holds x_r, the approximate objective and
/// gradient there, and the step that produced it (0 for the start point).
struct AgdTrace {
  std::vector<Decision> iterates;
  std::vector<double> objectives;
  std::vector<Gradient> gradients;
  std::vector<double> steps;
  StopReason stop_reason = StopReason::max_iters;

  [[nodiscard]] std::size_t iterations() const { return iterates.empty() ? 0 : iterates.size() - 1; }
  [[nodiscard]] const Decision& final_decision() const { return iterates.back(); }
};

inline Decision project(const Decision& x, const NewsvendorParams& params) {
  return {params.p_bounds.clamp(x.p), params.q_bounds.clamp(x.q)};
}

/// Gradient with components that point out of the box at an active bound
/// zeroed; its norm is zero exactly at box-constrained stationary points.
inline Gradient projected_gradient(const Decision& x, const Gradient& g,
                                   const NewsvendorParams& params) {
  Gradient out = g;
  if ((x.p <= params.p_bounds.lo && g.dp < 0.0) || (x.p >= params.p_bounds.hi && g.dp > 0.0))
    out.dp = 0.0;
  if ((x.q <= params.q_bounds.lo && g.dq < 0.0) || (x.q >= params.q_bounds.hi && g.dq > 0.0))
    out.dq = 0.0;
  return out;
}

inline double diminishing_step(std::size_t r, double C) {
  return C / static_cast<double>(r + 1);
}

/// Backtracking search for the largest eta in {alpha0 * beta^j} with
///   f(Proj(x + eta g)) - f(x) >= sigma * eta * g'g.
/// Returns nullopt once eta falls below eps. `fx` is f(x).
template <class Objective, class Projector>
std::optional<double> armijo_step(Objective&& objective, const Decision& x, double fx,
                                  const Gradient& g, const ArmijoStep& rule, Projector&& proj) {
  const double gg = g.dot(g);
  double eta = rule.alpha0;
  while (eta >= rule.eps) {
    const double trial = objective(proj(Decision{x.p + eta * g.dp, x.q + eta * g.dq}));
    if (!std::isfinite(trial)) throw std::runtime_error("armijo: non-finite objective value");
    if (trial - fx >= rule.sigma * eta * gg) return eta;
    eta *= rule.beta;
  }
  return std::nullopt;
}

template <class Objective>
std::optional<double> armijo_step(Objective&& objective, const Decision& x, const Gradient& g,
                                  const ArmijoStep& rule) {
  const double fx = objective(x);
  if (!std::isfinite(fx)) throw std::runtime_error("armijo: non-finite objective value");
  return armijo_step(objective, x, fx, g, rule, [](const Decision& d) { return d; });
}

/// Start point: mid-price and the weighted median of historical demand at
/// that price, projected onto the box.
inline Decision default_start(const Problem& pb) {
  const double p = pb.params.p_bounds.midpoint();
  const auto w = pb.weights.weights(p, pb.z);
  const auto d = pb.data.demands();
  return pb.kind.effective(project({p, weighted_quantile(w, d, 0.5)}, pb.params));
}

inline AgdTrace run_agd(const Problem& pb, const Decision& x0, const AgdConfig& config) {
  config.validate();
  pb.params.validate();
  const auto proj = [&](const Decision& d) { return pb.kind.effective(project(d, pb.params)); };

  AgdTrace trace;
  Decision x = proj(x0);
  ApproxEval ev = approx_evaluate(pb, x);
  if (!std::isfinite(ev.objective)) throw std::runtime_error("run_agd: non-finite objective");
  trace.iterates.push_back(x);
  trace.objectives.push_back(ev.objective);
  trace.gradients.push_back(ev.gradient);
  trace.steps.push_back(0.0);

  trace.stop_reason = StopReason::max_iters;
  for (std::size_t r = 0; r < config.max_iters; ++r) {
    if (projected_gradient(x, ev.gradient, pb.params).norm() <= config.grad_tol) {
      trace.stop_reason = StopReason::grad_below_tol;
      break;
    }
    double eta = 0.0;
    if (const auto* dim = std::get_if<DiminishingStep>(&config.step)) {
      eta = diminishing_step(r, dim->C);
    } else if (const auto* cst = std::get_if<ConstantStep>(&config.step)) {
      eta = cst->eta;
    } else {
      const auto& arm = std::get<ArmijoStep>(config.step);
      const auto step = armijo_step([&](const Decision& d) { return approx_objective(pb, d); }, x,
                                    ev.objective, ev.gradient, arm, proj);
      if (!step) {
        trace.stop_reason = StopReason::step_below_eps;
        break;
      }
      eta = *step;
    }
    x = proj({x.p + eta * ev.gradient.dp, x.q + eta * ev.gradient.dq});
    ev = approx_evaluate(pb, x);
    if (!std::isfinite(ev.objective)) throw std::runtime_error("run_agd: non-finite objective");
    trace.iterates.push_back(x);
    trace.objectives.push_back(ev.objective);
    trace.gradients.push_back(ev.gradient);
    trace.steps.push_back(eta);
  }
  return trace;
}

inline AgdTrace run_agd(const Problem& pb, const AgdConfig& config) {
  return run_agd(pb, default_start(pb), config);
}

}  // namespace nvp
