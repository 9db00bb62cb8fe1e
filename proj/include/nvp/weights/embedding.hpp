#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nvp/dataset.hpp"

namespace nvp {

struct QueryPoint {
  double price = 0.0;
  std::vector<double> features;
};

/// Coordinates a weight model measures similarity in: the joined (p, z)
/// space, or z alone for the decision-independent baseline.
enum class QuerySpace { joined, features_only };

/// Row-major matrix of embedded sample coordinates.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;

  [[nodiscard]] std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

/// Maps raw (price, features) onto the [0, 1]-scaled coordinates of a
/// QuerySpace using the dataset's scaling metadata.
class Embedding {
 public:
  Embedding() = default;
  Embedding(FeatureScaling scaling, QuerySpace space)
      : scaling_(std::move(scaling)), space_(space) {}

  [[nodiscard]] QuerySpace space() const { return space_; }
  [[nodiscard]] std::size_t feature_dim() const { return scaling_.features.size(); }
  [[nodiscard]] std::size_t dim() const {
    return feature_dim() + (space_ == QuerySpace::joined ? 1 : 0);
  }

  void embed(double price, std::span<const double> features, std::vector<double>& out) const {
    if (features.size() != feature_dim())
      throw std::invalid_argument("query feature dimension does not match the dataset");
    out.clear();
    if (space_ == QuerySpace::joined) out.push_back(scaling_.scale_price(price));
    for (std::size_t j = 0; j < features.size(); ++j)
      out.push_back(FeatureScaling::scale(scaling_.features[j], features[j]));
    for (double v : out)
      if (!std::isfinite(v)) throw std::invalid_argument("query coordinates are not finite");
  }

  [[nodiscard]] std::vector<double> embed(const QueryPoint& q) const {
    std::vector<double> out;
    embed(q.price, q.features, out);
    return out;
  }

  [[nodiscard]] PointSet embed_all(const Dataset& data) const {
    PointSet ps{dim(), {}};
    ps.coords.reserve(data.size() * ps.dim);
    std::vector<double> row;
    for (const auto& s : data.samples()) {
      embed(s.price, s.features, row);
      ps.coords.insert(ps.coords.end(), row.begin(), row.end());
    }
    return ps;
  }

 private:
  FeatureScaling scaling_;
  QuerySpace space_ = QuerySpace::joined;
};

}  // namespace nvp
