#include "medoidnet/net.hpp"

#include <algorithm>
#include <numeric>

#include "medoidnet/errors.hpp"

namespace medoidnet {

DistanceCache::DistanceCache(const MetricSpace& space, std::span<const Element> points,
                             std::size_t cap)
    : space_(space), points_(points) {
  const std::size_t n = points.size();
  if (n == 0) return;
  if (n > cap) {
    if (const auto* vs = dynamic_cast<const VectorSpace*>(&space)) {
      dim_ = vs->dimension();
      l1_ = vs->norm() == Norm::l1;
      flat_.reserve(n * dim_);
      for (const auto& p : points) flat_.insert(flat_.end(), p.coords().begin(), p.coords().end());
    }
    return;
  }
  memo_.resize(n * n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      memo_[static_cast<std::size_t>(i) * n + j] =
          space.distance(points[static_cast<std::size_t>(i)], points[j]);
    }
  }
}

std::vector<std::size_t> order_permutation(const MetricSpace& space,
                                           std::span<const Element> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return space.less(points[a], points[b]);
  });
  return order;
}

ScaleSet candidate_scales(const MetricSpace& space, std::span<const Element> instances) {
  ScaleSet out;
  const std::size_t n = instances.size();
  out.scales.reserve(n * (n - (n ? 1 : 0)) / 2 + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = space.distance(instances[i], instances[j]);
      if (d > 0.0) out.scales.push_back(d);
    }
  }
  std::sort(out.scales.begin(), out.scales.end());
  out.scales.erase(std::unique(out.scales.begin(), out.scales.end()), out.scales.end());
  out.scales.push_back(kInfiniteScale);
  return out;
}

GammaNet build_gamma_net(std::span<const Element> instances, double gamma,
                         const MetricSpace& space) {
  if (instances.empty()) throw PreconditionError("build_gamma_net: no instances");
  if (!(gamma > 0.0)) throw PreconditionError("build_gamma_net: gamma must be positive");
  GammaNet net;
  net.gamma = gamma;
  for (std::size_t idx : order_permutation(space, instances)) {
    const bool far = std::all_of(net.center_indices.begin(), net.center_indices.end(),
                                 [&](std::size_t c) {
                                   return space.distance(instances[idx], instances[c]) >= gamma;
                                 });
    if (net.center_indices.empty() || far) net.center_indices.push_back(idx);
  }
  return net;
}

VoronoiAssignment assign_voronoi(std::span<const Element> instances, const GammaNet& net,
                                 const MetricSpace& space) {
  if (net.center_indices.empty()) throw PreconditionError("assign_voronoi: empty net");
  VoronoiAssignment out;
  out.cell_of.resize(instances.size());
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& x = instances[static_cast<std::size_t>(i)];
    std::size_t best = 0;
    double best_d = space.distance(x, instances[net.center_indices[0]]);
    for (std::size_t c = 1; c < net.center_indices.size(); ++c) {
      const double d = space.distance(x, instances[net.center_indices[c]]);
      if (d < best_d) {
        best = c;
        best_d = d;
      }
    }
    out.cell_of[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

const Element& nn_predict(std::span<const std::pair<Element, Element>> model_points,
                          const Element& x, const MetricSpace& space) {
  if (model_points.empty()) throw PreconditionError("nn_predict: empty model");
  std::size_t best = 0;
  double best_d = space.distance(x, model_points[0].first);
  for (std::size_t i = 1; i < model_points.size(); ++i) {
    const double d = space.distance(x, model_points[i].first);
    if (d < best_d || (d == best_d && space.less(model_points[i].first, model_points[best].first))) {
      best = i;
      best_d = d;
    }
  }
  return model_points[best].second;
}

}  // namespace medoidnet
