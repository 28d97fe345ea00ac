#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "medoidnet/element.hpp"
#include "medoidnet/net.hpp"
#include "medoidnet/sample.hpp"
#include "medoidnet/space.hpp"

namespace medoidnet {

/// How the medoid candidate set was formed.
enum class CandidateSet { full, cardinality_truncated, diameter_truncated };

const char* to_string(CandidateSet kind);

/// A net whose centers carry medoid labels: the compression set plus side
/// information.
struct RelabeledNet {
  GammaNet net;
  std::vector<Element> labels;  // one per center, in net order
  CandidateSet candidates = CandidateSet::full;
};

/// argmin over candidates of sum_j loss(y, Y_j), ties to the order-smallest
/// candidate. An empty cell returns the order-first candidate.
Element empirical_medoid(std::span<const Element> cell_labels,
                         std::span<const Element> candidates, const MetricSpace& space);

/// Empirical medoid of every Voronoi cell, computed from the original
/// sample labels falling in the cell (taken in sample order).
RelabeledNet relabel_net(const LabeledSample& sample, const GammaNet& net,
                         const VoronoiAssignment& assignment,
                         std::span<const Element> candidates, const MetricSpace& space,
                         CandidateSet kind = CandidateSet::full);

/// Precomputed loss(candidate_c, Y_j) for a fixed candidate list and label
/// column. Medoids of any partition then cost one pass over the table.
class CandidateLossTable {
 public:
  CandidateLossTable(std::span<const Element> candidates, std::span<const Element> labels,
                     const MetricSpace& space);

  std::size_t candidates() const { return num_candidates_; }
  std::size_t samples() const { return num_samples_; }
  double loss(std::size_t candidate, std::size_t sample) const {
    return table_[candidate * num_samples_ + sample];
  }
  /// Position of candidate c in the space's order over the candidate list.
  std::size_t order_rank(std::size_t candidate) const { return order_rank_[candidate]; }

  /// Medoid candidate index per cell. Candidates are screened with label
  /// histograms; near-minimal ones are re-summed in sample order, so results
  /// match `empirical_medoid` bit for bit.
  std::vector<std::size_t> cell_medoids(std::span<const std::size_t> cell_of,
                                        std::size_t num_cells) const;

 private:
  std::size_t num_candidates_;
  std::size_t num_samples_;
  std::vector<double> table_;
  std::vector<std::size_t> order_rank_;
  std::size_t num_distinct_ = 0;
  std::vector<std::size_t> label_id_;     // sample -> distinct label
  std::vector<double> distinct_loss_;     // candidate x distinct label
};

}  // namespace medoidnet
