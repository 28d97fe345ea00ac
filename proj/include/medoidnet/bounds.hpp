#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace medoidnet {

/// Arguments of the Q bound: sample size, empirical risk, compression-set
/// size, side-information bits, confidence and loss range.
struct BoundParams {
  double n = 1.0;
  double alpha = 0.0;
  double k = 0.0;
  double b = 0.0;
  double delta = 0.05;
  double L = 1.0;
  /// ln(delta); when set it replaces `delta`, for confidences below the
  /// smallest positive double (the default schedule reaches them near
  /// n = 5e5).
  std::optional<double> log_delta;
};

/// Generalization bound Q(n, alpha, k, b, delta, L) for a semi-stable
/// compression scheme with k retained points and b bits of side
/// information. Holds with probability 1 - delta for all alpha, k, b
/// simultaneously, and Q >= alpha.
double q_bound(const BoundParams& p);

/// True iff Q respects the order of the single field in which p and p2
/// differ (alpha or k). Throws if they differ in anything else.
bool q_monotone_check(const BoundParams& p, const BoundParams& p2);

enum class DeviationMode {
  hoeffding,         ///< fixed size k, b bits; two-sided, needs n > 2k
  bernstein,         ///< fixed size, alpha-multiplied form; needs n > 4k + 4
  sample_dependent,  ///< data-dependent size via T(k, b); needs k < n/4 - 1
  final_form,        ///< B_I * alpha + B_II; q_bound == final + alpha
};

DeviationMode parse_deviation_mode(std::string_view name);
const char* to_string(DeviationMode mode);

/// Bound on R(h) - empirical risk for the given mode.
double compression_deviation_bound(const BoundParams& p, DeviationMode mode);

/// Upper deviation of the mean of n i.i.d. [0, L] variables from its
/// empirical value `mean`, at confidence 1 - delta.
double empirical_bernstein_bound(double mean, std::uint64_t n, double delta, double L);

/// Learner schedules indexed by sample size. A fixed_* value, when set,
/// replaces the corresponding sequence by a constant.
struct Schedules {
  double delta(std::uint64_t n) const;        ///< exp(-sqrt n)
  double log_delta(std::uint64_t n) const;    ///< -sqrt n, without underflow
  std::uint64_t bits(std::uint64_t n) const;  ///< ceil(sqrt n)
  double L(std::uint64_t n) const;            ///< max(1, n^(1/8))
  double eps(std::uint64_t n) const;          ///< n^(-1/4)

  std::optional<double> fixed_delta;
  std::optional<std::uint64_t> fixed_bits;
  std::optional<double> fixed_L;
  std::optional<double> fixed_eps;
};

Schedules default_schedules();

}  // namespace medoidnet
