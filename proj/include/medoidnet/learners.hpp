#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medoidnet/bounds.hpp"
#include "medoidnet/element.hpp"
#include "medoidnet/sample.hpp"
#include "medoidnet/space.hpp"
#include "medoidnet/sweep.hpp"

namespace medoidnet {

using Predictor = std::function<Element(const Element&)>;

enum class LearnerVariant { fin, countable, unbounded, separable };

LearnerVariant parse_learner_variant(std::string_view name);
const char* to_string(LearnerVariant v);

/// Parameters a learner actually fed into Q and into its truncations.
struct AppliedSchedule {
  double delta = 0.05;
  std::uint64_t bits = 0;
  double L = 1.0;                       ///< loss range used in Q
  std::optional<double> L_trunc;        ///< truncation radius (unbounded, separable)
  std::optional<double> eps;            ///< label-net scale (separable)
};

/// A trained 1-NN predictor over medoid-relabeled net points.
struct MedoidModel {
  static constexpr int kFormatVersion = 1;

  std::string instance_space_id;
  std::string label_space_id;
  double selected_gamma = kInfiniteScale;
  std::vector<std::pair<Element, Element>> net_points;
  double alpha_star = 0.0;
  double q_star = 0.0;
  std::uint64_t n_train = 0;
  AppliedSchedule schedule;
  LearnerVariant variant = LearnerVariant::fin;

  // Runtime handles; not serialized, re-resolved from the ids on load.
  SpaceHandle instance_space;
  SpaceHandle label_space;

  std::size_t size() const { return net_points.size(); }
  Element predict(const Element& x) const;
  Predictor predictor() const;
};

struct LearnerOptions {
  std::size_t distance_cache_cap = DistanceCache::kDefaultCap;
  /// Use the serial every-scale sweep instead of the pruned parallel one.
  bool reference_sweep = false;
};

/// Mean loss of f over the sample, summed in sample order.
double empirical_risk(const Predictor& f, const LabeledSample& sample, const MetricSpace& labels);

/// Finite label space; b = ceil(log2 |Y|), L = max loss on Y.
MedoidModel fin_med_net(const LabeledSample& sample, double delta, SpaceHandle instance_space,
                        SpaceHandle label_space, const LearnerOptions& opts = {});

/// Countable label space of finite diameter; medoids restricted to Y<bits>.
MedoidModel countable_med_net(const LabeledSample& sample, double delta, std::uint64_t bits,
                              SpaceHandle instance_space, SpaceHandle label_space,
                              const LearnerOptions& opts = {});

/// Countable metric label space with an anchor; labels are truncated to the
/// closed L_trunc-ball about the anchor first, and Q uses L = 2 * L_trunc.
MedoidModel ctbl_unbdd(const LabeledSample& sample, double delta, std::uint64_t bits,
                       double L_trunc, SpaceHandle instance_space, SpaceHandle label_space,
                       const LearnerOptions& opts = {});

/// Separable label space with an eps-net oracle: labels are projected onto
/// the eps_n-net and handed to ctbl_unbdd with (delta_n, b_n, L_n).
MedoidModel medoid_net(const LabeledSample& sample, const Schedules& schedules,
                       SpaceHandle instance_space, SpaceHandle label_space,
                       const LearnerOptions& opts = {});

/// Label preprocessing steps of ctbl_unbdd and medoid_net, exposed so the
/// stored alpha_star can be re-derived.
LabeledSample truncate_labels(const LabeledSample& sample, const MetricSpace& labels,
                              double L_trunc);
LabeledSample project_labels(const LabeledSample& sample, const MetricSpace& labels,
                             std::span<const Element> net);

/// Versioned JSON model document.
std::string serialize_model(const MedoidModel& model);
/// Parses a model; spaces are resolved by id unless given explicitly.
MedoidModel deserialize_model(std::string_view json, SpaceHandle instance_space = nullptr,
                              SpaceHandle label_space = nullptr);

}  // namespace medoidnet
