#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nvp/weights/cart.hpp"
#include "nvp/weights/embedding.hpp"
#include "nvp/weights/forest.hpp"
#include "nvp/weights/kernel.hpp"
#include "nvp/weights/knn.hpp"

namespace nvp {

enum class WeightFamily { knn, kernel, cart, forest };

inline std::string to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::knn: return "knn";
    case WeightFamily::kernel: return "kernel";
    case WeightFamily::cart: return "cart";
    case WeightFamily::forest: return "forest";
  }
  return "?";
}

inline WeightFamily parse_weight_family(const std::string& s) {
  if (s == "knn") return WeightFamily::knn;
  if (s == "kernel") return WeightFamily::kernel;
  if (s == "cart") return WeightFamily::cart;
  if (s == "forest" || s == "rf") return WeightFamily::forest;
  throw std::invalid_argument("unknown weight family '" + s + "'");
}

inline constexpr WeightFamily kAllFamilies[] = {WeightFamily::knn, WeightFamily::kernel,
                                                WeightFamily::cart, WeightFamily::forest};

/// Hyperparameter grids searched when a value is left unset.
struct HyperGrid {
  std::vector<std::size_t> k{5, 10, 20, 50};
  std::vector<double> bandwidth{0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<std::size_t> max_depth{2, 4, 6, 8};
  std::vector<std::size_t> min_samples_leaf{5, 10, 20};
  std::size_t cv_folds = 5;
};

/// Which family to fit and, optionally, fixed hyperparameters. Unset values
/// are chosen by the grid search.
struct WeightSpec {
  WeightFamily family = WeightFamily::kernel;
  std::optional<std::size_t> k;
  std::optional<double> bandwidth;
  std::optional<TreeHyper> tree;
  std::size_t n_estimators = 50;
  bool bootstrap = true;
  HyperGrid grid;
};

/// A fitted weight generator mapping a query (p, z) to a probability vector
/// over the dataset's samples.
class WeightModel {
 public:
  using Impl = std::variant<KnnModel, KernelModel, RegressionTree, ForestModel>;

  WeightModel(Embedding embedding, Impl impl)
      : embedding_(std::move(embedding)), impl_(std::move(impl)) {}

  static WeightModel fit(const Dataset& data, const WeightSpec& spec,
                         QuerySpace space = QuerySpace::joined, std::uint64_t seed = 0) {
    Embedding emb(data.scaling(), space);
    PointSet pts = emb.embed_all(data);
    const std::vector<double> y = data.demands();
    switch (spec.family) {
      case WeightFamily::knn: {
        std::size_t k = spec.k.value_or(0);
        if (!spec.k) k = select_k(pts, y, spec.grid);
        return {std::move(emb), KnnModel(std::move(pts), k)};
      }
      case WeightFamily::kernel: {
        double h = spec.bandwidth.value_or(0.0);
        if (!spec.bandwidth) h = select_bandwidth(pts, y, spec.grid);
        return {std::move(emb), KernelModel(std::move(pts), h)};
      }
      case WeightFamily::cart: {
        TreeHyper hyper = spec.tree ? *spec.tree : select_tree(pts, y, spec.grid, seed);
        return {std::move(emb), RegressionTree::fit(pts, y, hyper, seed)};
      }
      case WeightFamily::forest: {
        ForestHyper fh;
        fh.n_estimators = spec.n_estimators;
        fh.bootstrap = spec.bootstrap;
        if (spec.tree) {
          fh.tree = *spec.tree;
          return {std::move(emb), ForestModel::fit(pts, y, fh, seed)};
        }
        return {std::move(emb), select_forest(pts, y, fh, spec.grid, seed)};
      }
    }
    throw std::logic_error("unreachable");
  }

  [[nodiscard]] std::vector<double> weights(double price, std::span<const double> z) const {
    std::vector<double> u;
    embedding_.embed(price, z, u);
    return std::visit([&](const auto& m) { return m.weights(u); }, impl_);
  }
  [[nodiscard]] std::vector<double> weights(const QueryPoint& q) const {
    return weights(q.price, q.features);
  }

  [[nodiscard]] WeightFamily family() const {
    return static_cast<WeightFamily>(impl_.index());
  }
  [[nodiscard]] QuerySpace space() const { return embedding_.space(); }
  [[nodiscard]] const Embedding& embedding() const { return embedding_; }
  [[nodiscard]] const Impl& impl() const { return impl_; }

  /// Short human-readable hyperparameter summary, e.g. "knn(k=20)".
  [[nodiscard]] std::string describe() const {
    struct V {
      std::string operator()(const KnnModel& m) const { return "knn(k=" + std::to_string(m.k()) + ")"; }
      std::string operator()(const KernelModel& m) const {
        return "kernel(h=" + fmt(m.bandwidth()) + ")";
      }
      std::string operator()(const RegressionTree& t) const {
        return "cart(max_depth=" + std::to_string(t.hyper().max_depth) +
               ",min_samples_leaf=" + std::to_string(t.hyper().min_samples_leaf) +
               ",leaves=" + std::to_string(t.leaf_count()) + ")";
      }
      std::string operator()(const ForestModel& f) const {
        return "forest(n_estimators=" + std::to_string(f.trees().size()) +
               ",max_depth=" + std::to_string(f.hyper().tree.max_depth) +
               ",min_samples_leaf=" + std::to_string(f.hyper().tree.min_samples_leaf) + ")";
      }
      static std::string fmt(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        return s;
      }
    };
    return std::visit(V{}, impl_);
  }

  static std::size_t select_k(const PointSet& pts, std::span<const double> y, const HyperGrid& g) {
    std::vector<std::size_t> ks;
    for (std::size_t k : g.k)
      if (k >= 1 && k < pts.size()) ks.push_back(k);
    if (ks.empty()) return std::max<std::size_t>(1, std::min<std::size_t>(pts.size(), g.k.front()));
    const auto mse = KnnModel::loo_mse(pts, y, ks);
    return ks[argmin(mse)];
  }

  static double select_bandwidth(const PointSet& pts, std::span<const double> y,
                                 const HyperGrid& g) {
    if (pts.size() < 2) return g.bandwidth.front();
    const auto mse = KernelModel::loo_mse(pts, y, g.bandwidth);
    return g.bandwidth[argmin(mse)];
  }

  static TreeHyper select_tree(const PointSet& pts, std::span<const double> y, const HyperGrid& g,
                               std::uint64_t seed) {
    TreeHyper best{g.max_depth.front(), g.min_samples_leaf.front(), 0};
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t d : g.max_depth)
      for (std::size_t l : g.min_samples_leaf) {
        if (l > pts.size()) continue;
        const TreeHyper h{d, l, 0};
        const double mse = RegressionTree::cv_mse(pts, y, h, g.cv_folds, seed);
        if (mse < best_mse) {
          best_mse = mse;
          best = h;
        }
      }
    if (best.min_samples_leaf > pts.size()) best.min_samples_leaf = pts.size();
    return best;
  }

  static ForestModel select_forest(const PointSet& pts, std::span<const double> y,
                                   ForestHyper base, const HyperGrid& g, std::uint64_t seed) {
    std::optional<ForestModel> best;
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t d : g.max_depth)
      for (std::size_t l : g.min_samples_leaf) {
        if (l > pts.size()) continue;
        ForestHyper h = base;
        h.tree = {d, l, 0};
        auto model = ForestModel::fit(pts, y, h, seed);
        const double mse = model.oob_mse(pts, y);
        if (!best || mse < best_mse) {
          best_mse = mse;
          best = std::move(model);
        }
      }
    if (!best) {
      base.tree = {g.max_depth.front(), pts.size(), 0};
      return ForestModel::fit(pts, y, base, seed);
    }
    return std::move(*best);
  }

 private:
  static std::size_t argmin(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] < v[best]) best = i;
    return best;
  }

  Embedding embedding_;
  Impl impl_;
};

}  // namespace nvp
