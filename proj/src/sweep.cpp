#include "medoidnet/sweep.hpp"

#include <algorithm>
#include <limits>

#include "medoidnet/bounds.hpp"
#include "medoidnet/errors.hpp"
#include "medoidnet/medoid.hpp"
#include "medoidnet/sample.hpp"

namespace medoidnet {

namespace {

void check_problem(const SweepProblem& p) {
  if (p.instances.empty()) throw PreconditionError("scale sweep: empty sample");
  if (p.instances.size() != p.labels.size()) {
    throw PreconditionError("scale sweep: one label per instance required");
  }
  if (p.candidates.empty()) throw PreconditionError("scale sweep: empty candidate set");
}

double q_at(const SweepProblem& p, double alpha, std::size_t d) {
  return q_bound({static_cast<double>(p.instances.size()), alpha, static_cast<double>(d), p.bits,
                  p.delta, p.L, std::nullopt});
}

// Largest k in [1, n] with Q(0, k) <= q_best. Q(0, k) is increasing in k and
// Q(0, d_best) <= q_best, so the answer is at least d_best >= 1.
std::size_t max_competitive_size(const SweepProblem& p, double q_best) {
  std::size_t lo = 1;
  std::size_t hi = p.instances.size();
  if (q_at(p, 0.0, hi) <= q_best) return hi;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (q_at(p, 0.0, mid) <= q_best) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

ScaleChoice select_scale(std::span<const ScaleEvaluation> per_scale, std::uint64_t n,
                         double bits, double delta, double L) {
  if (per_scale.empty()) throw PreconditionError("select_scale: no scales");
  ScaleChoice best;
  for (std::size_t i = 0; i < per_scale.size(); ++i) {
    const auto& s = per_scale[i];
    const double q = q_bound({static_cast<double>(n), s.alpha, static_cast<double>(s.d), bits,
                              delta, L, std::nullopt});
    if (i == 0 || q < best.q || (q == best.q && s.gamma < best.gamma)) best = {s.gamma, q, i};
  }
  return best;
}

std::vector<ScaleEvaluation> evaluate_all_scales(const SweepProblem& problem) {
  check_problem(problem);
  const auto& X = problem.instance_space;
  const auto& Y = problem.label_space;
  const LabeledSample sample({problem.instances.begin(), problem.instances.end()},
                             {problem.labels.begin(), problem.labels.end()});
  const std::size_t n = sample.size();
  std::vector<ScaleEvaluation> out;
  for (double gamma : candidate_scales(X, problem.instances).scales) {
    const GammaNet net = build_gamma_net(problem.instances, gamma, X);
    const VoronoiAssignment cells = assign_voronoi(problem.instances, net, X);
    const RelabeledNet relabeled = relabel_net(sample, net, cells, problem.candidates, Y);
    std::vector<std::pair<Element, Element>> model;
    for (std::size_t c = 0; c < net.size(); ++c) {
      model.emplace_back(problem.instances[net.center_indices[c]], relabeled.labels[c]);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += Y.distance(nn_predict(model, sample.instance(j), X), sample.label(j));
    }
    out.push_back({gamma, acc / static_cast<double>(n), net.size()});
  }
  return out;
}

SweepResult sweep_reference(const SweepProblem& problem) {
  const auto per_scale = evaluate_all_scales(problem);
  const auto choice = select_scale(per_scale, problem.instances.size(), problem.bits,
                                   problem.delta, problem.L);
  const auto& X = problem.instance_space;
  const LabeledSample sample({problem.instances.begin(), problem.instances.end()},
                             {problem.labels.begin(), problem.labels.end()});
  SweepResult out;
  out.gamma = choice.gamma;
  out.q = choice.q;
  out.alpha = per_scale[choice.index].alpha;
  out.net = build_gamma_net(problem.instances, choice.gamma, X);
  const auto cells = assign_voronoi(problem.instances, out.net, X);
  out.labels = relabel_net(sample, out.net, cells, problem.candidates, problem.label_space).labels;
  out.nets_visited = per_scale.size();
  out.nets_scored = per_scale.size();
  return out;
}

SweepResult sweep_parallel(const SweepProblem& problem) {
  check_problem(problem);
  const std::size_t n = problem.instances.size();
  const DistanceCache dist(problem.instance_space, problem.instances, problem.distance_cache_cap);
  const auto order = order_permutation(problem.instance_space, problem.instances);
  const CandidateLossTable table(problem.candidates, problem.labels, problem.label_space);

  struct Best {
    bool found = false;
    double q = 0.0;
    double alpha = 0.0;
    double lower = 0.0;  // the net is constant on (lower, top] within Gamma
    std::vector<std::size_t> centers;
    std::vector<std::size_t> medoids;
  } best;

  SweepResult out;
  std::vector<std::size_t> centers;
  std::vector<std::size_t> cell_of(n);
  double gamma = kInfiniteScale;
  double stop_at = -1.0;

  while (true) {
    const std::size_t k_limit = best.found ? max_competitive_size(problem, best.q) : n;

    // Greedy net at `gamma`. `next` collects max over rejected points of the
    // distance to the centers accepted before them: the net (or the prefix
    // built before an abort) is unchanged for every scale in (next, gamma].
    centers.clear();
    double next = 0.0;
    bool aborted = false;
    for (std::size_t idx : order) {
      bool accept = true;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t c : centers) {
        const double d = dist(idx, c);
        if (d < nearest) nearest = d;
        if (nearest <= next) break;  // rejected, and cannot raise `next`
      }
      if (!centers.empty() && nearest < gamma) accept = false;
      if (accept) {
        centers.push_back(idx);
        if (centers.size() > k_limit) {
          aborted = true;
          break;
        }
      } else if (nearest > next) {
        next = nearest;
      }
    }
    ++out.nets_visited;

    if (aborted) {
      // Q(0, d) > q_best here, and any net at a scale <= gamma/2 is at least
      // as large, so nothing below gamma/2 can win.
      stop_at = std::max(stop_at, gamma / 2.0);
    } else {
      const std::size_t d = centers.size();
      const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t j = 0; j < sn; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        std::size_t cell = 0;
        double best_d = dist(ju, centers[0]);
        for (std::size_t c = 1; c < d; ++c) {
          const double v = dist(ju, centers[c]);
          if (v < best_d) {
            best_d = v;
            cell = c;
          }
        }
        cell_of[ju] = cell;
      }
      auto medoids = table.cell_medoids(cell_of, d);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += table.loss(medoids[cell_of[j]], j);
      const double alpha = acc / static_cast<double>(n);
      const double q = q_at(problem, alpha, d);
      ++out.nets_scored;
      // Later nets sit at smaller scales, so ties move the choice down.
      if (!best.found || q <= best.q) {
        best.found = true;
        best.q = q;
        best.alpha = alpha;
        best.lower = next;
        best.centers = centers;
        best.medoids = std::move(medoids);
      }
    }

    if (!(next > 0.0)) break;
    gamma = next;
    if (gamma <= stop_at) break;
  }

  // Report the smallest scale of Gamma in the winning interval.
  double selected = kInfiniteScale;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const double lower = best.lower;
#pragma omp parallel for schedule(dynamic, 16) reduction(min : selected)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      const double d = dist(static_cast<std::size_t>(i), j);
      if (d > lower && d < selected) selected = d;
    }
  }

  out.gamma = selected;
  out.alpha = best.alpha;
  out.q = best.q;
  out.net.gamma = selected;
  out.net.center_indices = best.centers;
  out.labels.reserve(best.medoids.size());
  for (std::size_t m : best.medoids) out.labels.push_back(problem.candidates[m]);
  return out;
}

}  // namespace medoidnet
