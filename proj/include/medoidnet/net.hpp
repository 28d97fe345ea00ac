#pragma once

#include <cstddef>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "medoidnet/element.hpp"
#include "medoidnet/space.hpp"

namespace medoidnet {

inline constexpr double kInfiniteScale = std::numeric_limits<double>::infinity();

/// Distinct positive interpoint distances in ascending order, always
/// terminated by +inf.
struct ScaleSet {
  std::vector<double> scales;
};

/// A gamma-net given as indices into the source instance list, in
/// selection order (which is the space's order).
struct GammaNet {
  double gamma = kInfiniteScale;
  std::vector<std::size_t> center_indices;

  std::size_t size() const { return center_indices.size(); }
};

/// cell_of[i] is the position (in net order) of the center owning instance i.
struct VoronoiAssignment {
  std::vector<std::size_t> cell_of;
};

/// Pairwise distances over a fixed instance list, memoized as a full matrix
/// when the list is no longer than `cap`.
class DistanceCache {
 public:
  static constexpr std::size_t kDefaultCap = 4096;

  DistanceCache(const MetricSpace& space, std::span<const Element> points,
                std::size_t cap = kDefaultCap);

  double operator()(std::size_t i, std::size_t j) const {
    if (!memo_.empty()) return memo_[i * points_.size() + j];
    if (!flat_.empty()) return flat_distance(i, j);
    return space_.distance(points_[i], points_[j]);
  }
  std::size_t size() const { return points_.size(); }
  bool memoized() const { return !memo_.empty(); }
  const MetricSpace& space() const { return space_; }
  std::span<const Element> points() const { return points_; }

 private:
  const MetricSpace& space_;
  std::span<const Element> points_;
  // Same arithmetic as VectorSpace::distance over contiguous coordinates.
  double flat_distance(std::size_t i, std::size_t j) const {
    const double* a = flat_.data() + i * dim_;
    const double* b = flat_.data() + j * dim_;
    if (dim_ == 1) return std::abs(a[0] - b[0]);
    double acc = 0.0;
    if (l1_) {
      for (std::size_t k = 0; k < dim_; ++k) acc += std::abs(a[k] - b[k]);
      return acc;
    }
    for (std::size_t k = 0; k < dim_; ++k) {
      const double t = a[k] - b[k];
      acc += t * t;
    }
    return std::sqrt(acc);
  }

  std::vector<double> memo_;
  std::vector<double> flat_;  // coordinates when the space is a VectorSpace
  std::size_t dim_ = 0;
  bool l1_ = false;
};

/// Indices of `points` sorted by the space's order; equal points keep
/// their input order.
std::vector<std::size_t> order_permutation(const MetricSpace& space,
                                           std::span<const Element> points);

ScaleSet candidate_scales(const MetricSpace& space, std::span<const Element> instances);

/// Greedy net: visit instances in the space's order and accept a point iff
/// it is at distance >= gamma from every previously accepted center.
GammaNet build_gamma_net(std::span<const Element> instances, double gamma,
                         const MetricSpace& space);

/// Nearest center for every instance; exact ties go to the center that
/// comes first in net order.
VoronoiAssignment assign_voronoi(std::span<const Element> instances, const GammaNet& net,
                                 const MetricSpace& space);

/// Label of the nearest model instance; ties go to the order-smallest
/// instance.
const Element& nn_predict(std::span<const std::pair<Element, Element>> model_points,
                          const Element& x, const MetricSpace& space);

}  // namespace medoidnet
