#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nvp/weights/embedding.hpp"

namespace nvp {

/// Nadaraya-Watson weights with a Gaussian kernel of bandwidth h:
/// w_i proportional to exp(-|u - u_i|^2 / (2 h^2)).
class KernelModel {
 public:
  KernelModel(PointSet points, double bandwidth) : points_(std::move(points)), h_(bandwidth) {
    if (!(h_ > 0.0) || !std::isfinite(h_))
      throw std::invalid_argument("KernelModel: bandwidth must be positive");
  }

  [[nodiscard]] double bandwidth() const { return h_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }

  [[nodiscard]] std::vector<double> weights(std::span<const double> query) const {
    const std::size_t n = points_.size();
    std::vector<double> w(n);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = squared_distance(points_.row(i), query);
      if (!std::isfinite(w[i])) throw std::invalid_argument("KernelModel: non-finite distance");
      dmin = std::min(dmin, w[i]);
    }
    // Shifting every exponent by the nearest distance cancels in the ratio
    // and keeps the nearest sample's kernel value at 1.
    const double inv = 1.0 / (2.0 * h_ * h_);
    double total = 0.0;
    for (double& v : w) {
      v = std::exp(-(v - dmin) * inv);
      total += v;
    }
    for (double& v : w) v /= total;
    return w;
  }

  /// Leave-one-out MSE of the kernel demand regression for each bandwidth.
  static std::vector<double> loo_mse(const PointSet& points, std::span<const double> targets,
                                     std::span<const double> bandwidths) {
    const std::size_t n = points.size();
    std::vector<double> sse(bandwidths.size(), 0.0);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        d2[j] = squared_distance(points.row(i), points.row(j));
        if (j != i) dmin = std::min(dmin, d2[j]);
      }
      for (std::size_t g = 0; g < bandwidths.size(); ++g) {
        const double inv = 1.0 / (2.0 * bandwidths[g] * bandwidths[g]);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double k = std::exp(-(d2[j] - dmin) * inv);
          num += k * targets[j];
          den += k;
        }
        const double pred = den > 0.0 ? num / den : targets[i];
        sse[g] += (pred - targets[i]) * (pred - targets[i]);
      }
    }
    for (double& v : sse) v /= static_cast<double>(n);
    return sse;
  }

 private:
  PointSet points_;
  double h_;
};

}  // namespace nvp
