#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "medoidnet/element.hpp"
#include "medoidnet/net.hpp"
#include "medoidnet/space.hpp"

namespace medoidnet {

/// Everything the scale sweep needs: the sample (labels already truncated
/// or projected by the calling learner), the medoid candidates, and the
/// fixed Q parameters b, delta, L.
struct SweepProblem {
  const MetricSpace& instance_space;
  std::span<const Element> instances;
  const MetricSpace& label_space;
  std::span<const Element> labels;
  std::span<const Element> candidates;
  double bits = 0.0;
  double delta = 0.05;
  double L = 1.0;
  std::size_t distance_cache_cap = DistanceCache::kDefaultCap;
};

/// Per-scale record (gamma, alpha_n(gamma), d_n(gamma)).
struct ScaleEvaluation {
  double gamma = kInfiniteScale;
  double alpha = 0.0;
  std::size_t d = 0;
};

struct ScaleChoice {
  double gamma = kInfiniteScale;
  double q = 0.0;
  std::size_t index = 0;  // position in the per-scale list
};

/// argmin of Q over the per-scale list; exact ties go to the smallest gamma
/// (+inf sorts last).
ScaleChoice select_scale(std::span<const ScaleEvaluation> per_scale, std::uint64_t n,
                         double bits, double delta, double L);

struct SweepResult {
  double gamma = kInfiniteScale;
  double alpha = 0.0;
  double q = 0.0;
  GammaNet net;
  std::vector<Element> labels;   // medoid label per center
  std::size_t nets_visited = 0;  // nets built (including pruned ones)
  std::size_t nets_scored = 0;   // nets whose medoids and risk were computed
};

/// (gamma, alpha, d) at every scale of Gamma, ascending. Serial and
/// straightforward: builds each net, relabels it with `empirical_medoid`
/// and scores the 1-NN predictor point by point.
std::vector<ScaleEvaluation> evaluate_all_scales(const SweepProblem& problem);

/// Serial reference: evaluate_all_scales + select_scale.
SweepResult sweep_reference(const SweepProblem& problem);

/// Production sweep. Walks Gamma from +inf downwards one distinct net at a
/// time, skips nets whose Q lower bound Q(0, d) already exceeds the best Q,
/// and parallelizes the per-net kernels with OpenMP. Returns the same
/// selection as `sweep_reference`, bit for bit.
SweepResult sweep_parallel(const SweepProblem& problem);

}  // namespace medoidnet
