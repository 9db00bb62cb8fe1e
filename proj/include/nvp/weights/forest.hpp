#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nvp/weights/cart.hpp"

namespace nvp {

struct ForestHyper {
  TreeHyper tree{8, 5, 0};
  std::size_t n_estimators = 50;
  bool bootstrap = true;
};

/// Regression forest whose weight is the mean of its trees' CART weights.
class ForestModel {
 public:
  static ForestModel fit(const PointSet& points, std::span<const double> targets,
                         ForestHyper hyper, std::uint64_t seed) {
    if (hyper.n_estimators < 1)
      throw std::invalid_argument("ForestModel: n_estimators must be >= 1");
    if (hyper.tree.max_features == 0) hyper.tree.max_features = default_max_features(points.dim);
    ForestModel model;
    model.hyper_ = hyper;
    model.n_points_ = points.size();
    const std::size_t n = points.size();
    for (std::size_t e = 0; e < hyper.n_estimators; ++e) {
      const std::uint64_t s = derive_seed(seed, e);
      model.seeds_.push_back(s);
      std::vector<std::size_t> rows(n);
      std::vector<char> in_bag(n, 1);
      if (hyper.bootstrap) {
        Rng rng(derive_seed(s, 0xb00757));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::fill(in_bag.begin(), in_bag.end(), 0);
        for (auto& r : rows) {
          r = pick(rng);
          in_bag[r] = 1;
        }
      } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
      }
      model.trees_.push_back(RegressionTree::fit(points, targets, std::move(rows), hyper.tree, s));
      model.in_bag_.push_back(std::move(in_bag));
    }
    return model;
  }

  /// ceil(dim / 3), at least one.
  static std::size_t default_max_features(std::size_t dim) {
    return std::max<std::size_t>(1, (dim + 2) / 3);
  }

  [[nodiscard]] const std::vector<RegressionTree>& trees() const { return trees_; }
  [[nodiscard]] const std::vector<std::uint64_t>& seeds() const { return seeds_; }
  [[nodiscard]] const ForestHyper& hyper() const { return hyper_; }

  [[nodiscard]] std::vector<double> weights(std::span<const double> query) const {
    std::vector<double> w(n_points_, 0.0);
    const double scale = 1.0 / static_cast<double>(trees_.size());
    for (const auto& t : trees_) t.accumulate_weights(query, scale, w);
    return w;
  }

  /// Out-of-bag MSE; samples that are in every bag are skipped.
  [[nodiscard]] double oob_mse(const PointSet& points, std::span<const double> targets) const {
    double sse = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double acc = 0.0;
      std::size_t m = 0;
      for (std::size_t e = 0; e < trees_.size(); ++e) {
        if (in_bag_[e][i]) continue;
        acc += trees_[e].predict(points.row(i));
        ++m;
      }
      if (m == 0) continue;
      const double err = acc / static_cast<double>(m) - targets[i];
      sse += err * err;
      ++counted;
    }
    return counted == 0 ? 0.0 : sse / static_cast<double>(counted);
  }

 private:
  ForestHyper hyper_;
  std::size_t n_points_ = 0;
  std::vector<RegressionTree> trees_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::vector<char>> in_bag_;
};

}  // namespace nvp
