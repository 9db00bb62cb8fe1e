#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvp/core.hpp"

namespace nvp {

struct Sample {
  double price = 0.0;
  std::vector<double> features;
  double demand = 0.0;
};

/// Per-coordinate min/max used to map price and features onto [0, 1].
struct FeatureScaling {
  Interval price{0.0, 1.0};
  std::vector<Interval> features;

  static double scale(const Interval& r, double v) {
    const double w = r.width();
    return w > 0.0 ? (v - r.lo) / w : 0.0;
  }
  static double unscale(const Interval& r, double v) { return r.lo + v * r.width(); }

  [[nodiscard]] double scale_price(double p) const { return scale(price, p); }
  [[nodiscard]] double unscale_price(double v) const { return unscale(price, v); }

  [[nodiscard]] std::vector<double> scale_features(std::span<const double> z) const {
    if (z.size() != features.size())
      throw std::invalid_argument("FeatureScaling: feature dimension mismatch");
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = scale(features[j], z[j]);
    return out;
  }
  [[nodiscard]] std::vector<double> unscale_features(std::span<const double> v) const {
    if (v.size() != features.size())
      throw std::invalid_argument("FeatureScaling: feature dimension mismatch");
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = unscale(features[j], v[j]);
    return out;
  }

  /// Identity map on [0, 1]^m (used for data that is already standardized).
  static FeatureScaling identity(std::size_t dim) {
    return {{0.0, 1.0}, std::vector<Interval>(dim, Interval{0.0, 1.0})};
  }
};

/// Historical samples {(p^i, z^i, D^i)} plus the scaling metadata that the
/// weight models use to embed queries.
class Dataset {
 public:
  Dataset() = default;

  /// Scaling is fitted from the samples' own min/max.
  explicit Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
    validate();
    scaling_ = fit_scaling();
  }

  Dataset(std::vector<Sample> samples, FeatureScaling scaling)
      : samples_(std::move(samples)), scaling_(std::move(scaling)) {
    validate();
    if (scaling_.features.size() != feature_dim_)
      throw std::invalid_argument("Dataset: scaling dimension mismatch");
  }

  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] std::size_t feature_dim() const { return feature_dim_; }
  [[nodiscard]] const std::vector<Sample>& samples() const { return samples_; }
  [[nodiscard]] const Sample& operator[](std::size_t i) const { return samples_[i]; }
  [[nodiscard]] const FeatureScaling& scaling() const { return scaling_; }

  [[nodiscard]] std::vector<double> demands() const {
    std::vector<double> d;
    d.reserve(samples_.size());
    for (const auto& s : samples_) d.push_back(s.demand);
    return d;
  }

  /// Min/max of each coordinate over the samples.
  [[nodiscard]] FeatureScaling fit_scaling() const {
    FeatureScaling sc;
    sc.price = {samples_.front().price, samples_.front().price};
    sc.features.assign(feature_dim_, Interval{});
    for (std::size_t j = 0; j < feature_dim_; ++j)
      sc.features[j] = {samples_.front().features[j], samples_.front().features[j]};
    for (const auto& s : samples_) {
      sc.price.lo = std::min(sc.price.lo, s.price);
      sc.price.hi = std::max(sc.price.hi, s.price);
      for (std::size_t j = 0; j < feature_dim_; ++j) {
        sc.features[j].lo = std::min(sc.features[j].lo, s.features[j]);
        sc.features[j].hi = std::max(sc.features[j].hi, s.features[j]);
      }
    }
    return sc;
  }

  /// Copy whose stored price and features are mapped through the scaling;
  /// the copy carries the identity scaling.
  [[nodiscard]] Dataset scaled() const {
    std::vector<Sample> out = samples_;
    for (auto& s : out) {
      s.price = scaling_.scale_price(s.price);
      s.features = scaling_.scale_features(s.features);
    }
    return Dataset(std::move(out), FeatureScaling::identity(feature_dim_));
  }

  [[nodiscard]] Dataset with_scaling(FeatureScaling sc) const { return Dataset(samples_, std::move(sc)); }

 private:
  void validate() {
    if (samples_.empty()) throw std::invalid_argument("Dataset: at least one sample required");
    feature_dim_ = samples_.front().features.size();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (s.features.size() != feature_dim_)
        throw std::invalid_argument("Dataset: sample " + std::to_string(i) +
                                    " has inconsistent feature dimension");
      if (!std::isfinite(s.price) || !std::isfinite(s.demand))
        throw std::invalid_argument("Dataset: sample " + std::to_string(i) + " is not finite");
      if (s.demand < 0.0)
        throw std::invalid_argument("Dataset: sample " + std::to_string(i) + " has negative demand");
      for (double v : s.features)
        if (!std::isfinite(v))
          throw std::invalid_argument("Dataset: sample " + std::to_string(i) +
                                      " has a non-finite feature");
    }
  }

  std::vector<Sample> samples_;
  std::size_t feature_dim_ = 0;
  FeatureScaling scaling_;
};

}  // namespace nvp
