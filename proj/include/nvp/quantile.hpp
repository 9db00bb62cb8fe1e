#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace nvp {

/// Smallest value v such that the weighted CDF at v reaches tau.
/// Weights must be non-negative; they are not required to sum to one.
inline double weighted_quantile(std::span<const double> weights, std::span<const double> values,
                                double tau) {
  if (weights.size() != values.size() || values.empty())
    throw std::invalid_argument("weighted_quantile: size mismatch or empty input");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("weighted_quantile: weights sum to zero");
  // Relative slack absorbs round-off in the running sum, e.g. tau = 0.5 over
  // weights that are exact halves of a simplex vector.
  const double target = tau * total - 1e-12 * total;
  double cum = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    cum += weights[order[j]];
    // Equal values share one CDF step.
    if (j + 1 < order.size() && values[order[j + 1]] == values[order[j]]) continue;
    if (cum >= target) return values[order[j]];
  }
  return values[order.back()];
}

}  // namespace nvp
