#include "medoidnet/medoid.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "medoidnet/errors.hpp"

namespace medoidnet {

const char* to_string(CandidateSet kind) {
  switch (kind) {
    case CandidateSet::full: return "full";
    case CandidateSet::cardinality_truncated: return "cardinality_truncated";
    case CandidateSet::diameter_truncated: return "diameter_truncated";
  }
  return "unknown";
}

Element empirical_medoid(std::span<const Element> cell_labels,
                         std::span<const Element> candidates, const MetricSpace& space) {
  if (candidates.empty()) throw PreconditionError("empirical_medoid: empty candidate set");
  std::size_t best = 0;
  double best_cost = 0.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double cost = 0.0;
    for (const auto& y : cell_labels) cost += space.distance(candidates[c], y);
    if (c == 0 || cost < best_cost ||
        (cost == best_cost && space.less(candidates[c], candidates[best]))) {
      best = c;
      best_cost = cost;
    }
  }
  return candidates[best];
}

RelabeledNet relabel_net(const LabeledSample& sample, const GammaNet& net,
                         const VoronoiAssignment& assignment,
                         std::span<const Element> candidates, const MetricSpace& space,
                         CandidateSet kind) {
  if (assignment.cell_of.size() != sample.size()) {
    throw PreconditionError("relabel_net: assignment does not match the sample");
  }
  std::vector<std::vector<Element>> cells(net.size());
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const std::size_t cell = assignment.cell_of[j];
    if (cell >= net.size()) throw PreconditionError("relabel_net: assignment outside the net");
    cells[cell].push_back(sample.label(j));
  }
  RelabeledNet out{net, {}, kind};
  out.labels.reserve(net.size());
  for (const auto& cell : cells) out.labels.push_back(empirical_medoid(cell, candidates, space));
  return out;
}

CandidateLossTable::CandidateLossTable(std::span<const Element> candidates,
                                       std::span<const Element> labels, const MetricSpace& space)
    : num_candidates_(candidates.size()), num_samples_(labels.size()) {
  if (candidates.empty()) throw PreconditionError("empty candidate set");
  table_.resize(num_candidates_ * num_samples_);
  const auto nc = static_cast<std::ptrdiff_t>(num_candidates_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    for (std::size_t j = 0; j < num_samples_; ++j) {
      table_[cu * num_samples_ + j] = space.distance(candidates[cu], labels[j]);
    }
  }
  std::vector<std::size_t> perm(num_candidates_);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return space.less(candidates[a], candidates[b]);
  });
  order_rank_.resize(num_candidates_);
  for (std::size_t r = 0; r < perm.size(); ++r) order_rank_[perm[r]] = r;

  // Distinct labels: equal elements have equal losses to every candidate.
  std::vector<std::size_t> by_label(num_samples_);
  std::iota(by_label.begin(), by_label.end(), std::size_t{0});
  std::stable_sort(by_label.begin(), by_label.end(), [&](std::size_t a, std::size_t b) {
    return space.less(labels[a], labels[b]);
  });
  label_id_.resize(num_samples_);
  std::vector<std::size_t> representative;
  for (std::size_t r = 0; r < by_label.size(); ++r) {
    const std::size_t j = by_label[r];
    if (r == 0 || !(labels[j] == labels[representative.back()])) representative.push_back(j);
    label_id_[j] = representative.size() - 1;
  }
  num_distinct_ = representative.size();
  distinct_loss_.resize(num_candidates_ * num_distinct_);
  for (std::size_t c = 0; c < num_candidates_; ++c) {
    for (std::size_t u = 0; u < num_distinct_; ++u) {
      distinct_loss_[c * num_distinct_ + u] = table_[c * num_samples_ + representative[u]];
    }
  }
}

std::vector<std::size_t> CandidateLossTable::cell_medoids(std::span<const std::size_t> cell_of,
                                                          std::size_t num_cells) const {
  // Cell members in sample order.
  std::vector<std::size_t> first(num_cells + 1, 0);
  for (std::size_t j = 0; j < num_samples_; ++j) ++first[cell_of[j] + 1];
  std::partial_sum(first.begin(), first.end(), first.begin());
  std::vector<std::size_t> members(num_samples_);
  {
    std::vector<std::size_t> fill(first.begin(), first.end() - 1);
    for (std::size_t j = 0; j < num_samples_; ++j) members[fill[cell_of[j]]++] = j;
  }

  std::vector<std::size_t> best(num_cells, 0);
  const auto ncells = static_cast<std::ptrdiff_t>(num_cells);
  constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
#pragma omp parallel
  {
    std::vector<std::size_t> slot(num_distinct_, kUnseen);
    std::vector<std::pair<std::size_t, double>> hist;
    std::vector<double> approx(num_candidates_);
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t ci = 0; ci < ncells; ++ci) {
      const auto cell = static_cast<std::size_t>(ci);
      const std::size_t* m_begin = members.data() + first[cell];
      const std::size_t* m_end = members.data() + first[cell + 1];
      hist.clear();
      for (const std::size_t* it = m_begin; it != m_end; ++it) {
        const std::size_t u = label_id_[*it];
        if (slot[u] == kUnseen) {
          slot[u] = hist.size();
          hist.emplace_back(u, 0.0);
        }
        hist[slot[u]].second += 1.0;
      }
      for (const auto& [u, count] : hist) slot[u] = kUnseen;

      // Histogram costs screen the candidates; the survivors are re-summed
      // in sample order so ties resolve exactly as in empirical_medoid.
      double lowest = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < num_candidates_; ++c) {
        const double* row = distinct_loss_.data() + c * num_distinct_;
        double v = 0.0;
        for (const auto& [u, count] : hist) v += count * row[u];
        approx[c] = v;
        lowest = std::min(lowest, v);
      }
      const auto size = static_cast<double>(m_end - m_begin);
      const double cutoff = lowest + 8.0 * (size + 1.0) * std::numeric_limits<double>::epsilon() * lowest;
      std::size_t b = kUnseen;
      double b_cost = 0.0;
      for (std::size_t c = 0; c < num_candidates_; ++c) {
        if (approx[c] > cutoff) continue;
        const double* losses = table_.data() + c * num_samples_;
        double v = 0.0;
        for (const std::size_t* it = m_begin; it != m_end; ++it) v += losses[*it];
        if (b == kUnseen || v < b_cost || (v == b_cost && order_rank_[c] < order_rank_[b])) {
          b = c;
          b_cost = v;
        }
      }
      best[cell] = b;
    }
  }
  return best;
}

}  // namespace medoidnet
