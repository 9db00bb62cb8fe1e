#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nvp/parallel.hpp"
#include "nvp/weights/embedding.hpp"

namespace nvp {

struct TreeHyper {
  std::size_t max_depth = 4;
  std::size_t min_samples_leaf = 5;
  /// Candidate features drawn per split; 0 means every feature.
  std::size_t max_features = 0;
};

/// Greedy variance-reduction regression tree over embedded coordinates.
///
/// Splits send `x[f] < threshold` left and everything else right, so a query
/// lying exactly on a threshold is routed to the right child. Thresholds are
/// midpoints between consecutive distinct sorted values.
///
/// Each leaf keeps the indices of the samples that land in it. For a tree
/// fitted on every sample those are its training rows; for a bootstrap tree
/// they come from routing the full point set after fitting, so the weights
/// always refer to the whole dataset.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf = -1;
  };

  static RegressionTree fit(const PointSet& points, std::span<const double> targets,
                            const TreeHyper& hyper, std::uint64_t seed = 0) {
    std::vector<std::size_t> rows(points.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit(points, targets, std::move(rows), hyper, seed);
  }

  /// `rows` may repeat indices (bootstrap resample).
  static RegressionTree fit(const PointSet& points, std::span<const double> targets,
                            std::vector<std::size_t> rows, const TreeHyper& hyper,
                            std::uint64_t seed) {
    if (targets.size() != points.size())
      throw std::invalid_argument("RegressionTree: target count mismatch");
    if (hyper.min_samples_leaf < 1)
      throw std::invalid_argument("RegressionTree: min_samples_leaf must be >= 1");
    if (rows.size() < hyper.min_samples_leaf)
      throw std::invalid_argument("RegressionTree: fewer samples than min_samples_leaf");
    RegressionTree tree;
    tree.hyper_ = hyper;
    tree.n_points_ = points.size();
    Rng rng(seed);
    tree.grow(points, targets, rows, 0, rng);
    tree.occupy(points);
    return tree;
  }

  [[nodiscard]] std::size_t leaf_count() const { return members_.size(); }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const TreeHyper& hyper() const { return hyper_; }
  [[nodiscard]] const std::vector<std::size_t>& leaf_members(int leaf) const {
    return members_[static_cast<std::size_t>(leaf)];
  }

  [[nodiscard]] int leaf_of(std::span<const double> x) const {
    int n = 0;
    while (nodes_[n].feature >= 0) {
      const Node& node = nodes_[n];
      n = x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
    }
    return nodes_[n].leaf;
  }

  /// Mean training target in the query's leaf.
  [[nodiscard]] double predict(std::span<const double> x) const {
    return leaf_values_[static_cast<std::size_t>(leaf_of(x))];
  }

  [[nodiscard]] std::vector<double> weights(std::span<const double> query) const {
    std::vector<double> w(n_points_, 0.0);
    accumulate_weights(query, 1.0, w);
    return w;
  }

  /// w[i] += scale / |leaf| for every member i of the query's leaf.
  void accumulate_weights(std::span<const double> query, double scale,
                          std::vector<double>& w) const {
    const auto& m = leaf_members(leaf_of(query));
    const double v = scale / static_cast<double>(m.size());
    for (std::size_t i : m) w[i] += v;
  }

  /// Mean squared error of K-fold cross-validated predictions.
  static double cv_mse(const PointSet& points, std::span<const double> targets,
                       const TreeHyper& hyper, std::size_t folds, std::uint64_t seed) {
    const std::size_t n = points.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    double sse = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train;
      std::vector<std::size_t> test;
      for (std::size_t j = 0; j < n; ++j) (j % folds == f ? test : train).push_back(perm[j]);
      if (train.size() < hyper.min_samples_leaf || test.empty()) continue;
      const auto tree = fit(points, targets, train, hyper, derive_seed(seed, f));
      for (std::size_t i : test) {
        const double e = tree.predict(points.row(i)) - targets[i];
        sse += e * e;
      }
    }
    return sse / static_cast<double>(n);
  }

 private:
  int grow(const PointSet& points, std::span<const double> targets,
           std::vector<std::size_t>& rows, std::size_t depth, Rng& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    const std::size_t n = rows.size();
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t r : rows) {
      sum += targets[r];
      sum2 += targets[r] * targets[r];
    }
    const double parent_sse = std::max(0.0, sum2 - sum * sum / static_cast<double>(n));

    Split best;
    if (depth < hyper_.max_depth && n >= 2 * hyper_.min_samples_leaf && parent_sse > 0.0)
      best = find_split(points, targets, rows, rng);

    if (best.feature < 0 || !(best.sse < parent_sse * (1.0 - 1e-12))) {
      nodes_[id].leaf = static_cast<int>(leaf_values_.size());
      leaf_values_.push_back(sum / static_cast<double>(n));
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows)
      (points.row(r)[static_cast<std::size_t>(best.feature)] < best.threshold ? left : right)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const int l = grow(points, targets, left, depth + 1, rng);
    const int r = grow(points, targets, right, depth + 1, rng);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;
  };

  Split find_split(const PointSet& points, std::span<const double> targets,
                   const std::vector<std::size_t>& rows, Rng& rng) const {
    std::vector<std::size_t> candidates(points.dim);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    if (hyper_.max_features > 0 && hyper_.max_features < points.dim) {
      // Partial Fisher-Yates: the first max_features entries are the draw.
      for (std::size_t j = 0; j < hyper_.max_features; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, points.dim - 1);
        std::swap(candidates[j], candidates[pick(rng)]);
      }
      candidates.resize(hyper_.max_features);
      std::sort(candidates.begin(), candidates.end());
    }

    const std::size_t n = rows.size();
    const std::size_t min_leaf = hyper_.min_samples_leaf;
    Split best;
    bool found = false;
    std::vector<std::pair<double, double>> xy(n);
    for (std::size_t f : candidates) {
      for (std::size_t j = 0; j < n; ++j) xy[j] = {points.row(rows[j])[f], targets[rows[j]]};
      std::sort(xy.begin(), xy.end());
      double total = 0.0;
      double total2 = 0.0;
      for (const auto& [x, y] : xy) {
        total += y;
        total2 += y * y;
      }
      double sl = 0.0;
      double sl2 = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        sl += xy[i - 1].second;
        sl2 += xy[i - 1].second * xy[i - 1].second;
        if (i < min_leaf || n - i < min_leaf) continue;
        if (!(xy[i - 1].first < xy[i].first)) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double sr = total - sl;
        const double sr2 = total2 - sl2;
        const double sse = std::max(0.0, sl2 - sl * sl / nl) + std::max(0.0, sr2 - sr * sr / nr);
        if (!found || sse < best.sse) {
          double thr = 0.5 * (xy[i - 1].first + xy[i].first);
          if (!(xy[i - 1].first < thr)) thr = xy[i].first;
          best = {static_cast<int>(f), thr, sse};
          found = true;
        }
      }
    }
    return best;
  }

  void occupy(const PointSet& points) {
    members_.assign(leaf_values_.size(), {});
    for (std::size_t i = 0; i < points.size(); ++i)
      members_[static_cast<std::size_t>(leaf_of(points.row(i)))].push_back(i);
  }

  TreeHyper hyper_;
  std::size_t n_points_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> leaf_values_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace nvp
