#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nvp/weights/embedding.hpp"

namespace nvp {

/// Uniform 1/k weight on the k nearest samples (Euclidean). Distance ties
/// are broken by ascending sample index.
class KnnModel {
 public:
  KnnModel(PointSet points, std::size_t k) : points_(std::move(points)), k_(k) {
    if (k_ < 1 || k_ > points_.size())
      throw std::invalid_argument("KnnModel: k must lie in [1, N]");
  }

  [[nodiscard]] std::size_t k() const { return k_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }

  [[nodiscard]] std::vector<std::size_t> neighbors(std::span<const double> query) const {
    const std::size_t n = points_.size();
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {squared_distance(points_.row(i), query), i};
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_ - 1), d.end());
    std::vector<std::size_t> idx(k_);
    for (std::size_t j = 0; j < k_; ++j) idx[j] = d[j].second;
    return idx;
  }

  [[nodiscard]] std::vector<double> weights(std::span<const double> query) const {
    std::vector<double> w(points_.size(), 0.0);
    const double v = 1.0 / static_cast<double>(k_);
    for (std::size_t i : neighbors(query)) w[i] = v;
    return w;
  }

  /// Leave-one-out mean squared error of kNN demand prediction for each k in
  /// `ks`, computed from one shared neighbor ranking per sample.
  static std::vector<double> loo_mse(const PointSet& points, std::span<const double> targets,
                                     std::span<const std::size_t> ks) {
    const std::size_t n = points.size();
    const std::size_t kmax = std::min(n - 1, *std::max_element(ks.begin(), ks.end()));
    std::vector<double> sse(ks.size(), 0.0);
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < n; ++i) {
      d.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) d.emplace_back(squared_distance(points.row(i), points.row(j)), j);
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kmax), d.end());
      double acc = 0.0;
      std::size_t taken = 0;
      std::vector<double> prefix(kmax + 1, 0.0);
      for (; taken < kmax; ++taken) {
        acc += targets[d[taken].second];
        prefix[taken + 1] = acc;
      }
      for (std::size_t g = 0; g < ks.size(); ++g) {
        const std::size_t k = std::min(ks[g], kmax);
        const double pred = prefix[k] / static_cast<double>(k);
        sse[g] += (pred - targets[i]) * (pred - targets[i]);
      }
    }
    for (double& v : sse) v /= static_cast<double>(n);
    return sse;
  }

 private:
  PointSet points_;
  std::size_t k_;
};

}  // namespace nvp
