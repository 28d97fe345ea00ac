#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medoidnet/bounds.hpp"
#include "medoidnet/learners.hpp"
#include "medoidnet/rng.hpp"
#include "medoidnet/sample.hpp"
#include "medoidnet/space.hpp"

namespace medoidnet {

/// Finite-support joint law: P(X = xs[i]) = px[i], P(Y = ys[j] | xs[i]) =
/// py_given_x[i][j].
struct FiniteLaw {
  std::vector<Element> xs;
  std::vector<double> px;
  std::vector<Element> ys;
  std::vector<std::vector<double>> py_given_x;
};

/// A synthetic data distribution with known Bayes quantities.
struct SyntheticDistribution {
  std::string id;
  SpaceHandle instance_space;
  SpaceHandle label_space;
  std::function<std::pair<Element, Element>(Rng&)> draw;
  std::function<Element(Rng&)> draw_instance;
  std::optional<FiniteLaw> law;
  std::optional<double> bayes_risk;
  Predictor bayes_predictor;
  /// Almost-sure bound on the loss of reasonable predictors, when one exists.
  std::optional<double> loss_cap;

  /// n i.i.d. draws from a generator seeded with `seed`.
  LabeledSample sample(std::uint64_t seed, std::size_t n) const;
};

using DistributionParams = std::map<std::string, std::string, std::less<>>;

/// Known ids: singleton4, lipschitz_identity, laplace_regression (param s),
/// finite_multiclass (param table = CSV path, labels = label space id), and
/// cauchy_identity (requires param experimental=1).
SyntheticDistribution make_distribution(std::string_view id, const DistributionParams& params = {});

const std::vector<std::string>& distribution_ids();

/// Closed-form risk. Needs a finite law, or `is_bayes_predictor` together
/// with an analytically known Bayes risk.
double exact_risk(const Predictor& f, const SyntheticDistribution& dist,
                  bool is_bayes_predictor = false);

struct RiskEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  ///< empirical Bernstein width at delta = 0.05
  double cap = 0.0;         ///< loss range used for the width
  bool heuristic_cap = false;  ///< cap is the 0.999-quantile of observed losses
};

RiskEstimate monte_carlo_risk(const Predictor& f, const SyntheticDistribution& dist,
                              std::uint64_t m, std::uint64_t seed);

/// k-NN plurality vote over observed labels. Neighbors are ranked by
/// distance, then instance order, then sample position; vote ties go to the
/// order-smallest label.
Predictor majority_vote_baseline(const LabeledSample& sample, std::size_t k,
                                 SpaceHandle instance_space, SpaceHandle label_space);

/// argmin over the law's labels of the expected loss on the region (a set
/// of support points; nullopt means the whole space).
Element true_medoid_oracle(const SyntheticDistribution& dist,
                           std::optional<std::span<const Element>> region = std::nullopt);

/// Fraction of m fresh instances at distance >= gamma from every sample
/// instance.
double estimate_missing_mass(const SyntheticDistribution& dist, const LabeledSample& sample,
                             double gamma, std::uint64_t m, std::uint64_t seed);

struct ExperimentRow {
  std::uint64_t n = 0;
  std::uint64_t trial = 0;
  std::string learner_id;
  double estimated_risk = 0.0;
  bool exact = false;
  double half_width = 0.0;  ///< Monte Carlo only
  bool heuristic_cap = false;
  std::optional<double> alpha_star;
  std::optional<double> q_star;
  std::optional<double> selected_gamma;
  std::optional<std::uint64_t> d;
  double wall_time = 0.0;  ///< seconds; JSON lines only
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
};

struct ExperimentOptions {
  Schedules schedules;           ///< fixed_* fields act as overrides
  std::uint64_t mc_draws = 100000;
  LearnerOptions learner;
};

/// Learner ids: fin, countable, unbounded, separable, knn1, knn (k = ceil sqrt n).
const std::vector<std::string>& experiment_learner_ids();

/// Trains `learner_id` on a fresh sample for every (n, trial) and records
/// its risk (exact when the distribution allows, Monte Carlo otherwise).
ExperimentResult convergence_experiment(std::string_view learner_id,
                                        const SyntheticDistribution& dist,
                                        std::span<const std::uint64_t> n_grid,
                                        std::uint64_t trials, std::uint64_t seed,
                                        const ExperimentOptions& opts = {});

/// CSV header:
/// n,trial,learner,estimated_risk,risk_method,half_width,alpha_star,q_star,selected_gamma,d
/// risk_method is exact, mc, or mc-heuristic-cap. Missing diagnostics are
/// empty fields. Wall time appears only in the JSON lines.
void write_csv(const ExperimentResult& result, std::ostream& out);
void write_json_lines(const ExperimentResult& result, std::ostream& out);

}  // namespace medoidnet
