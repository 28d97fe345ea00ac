#include "medoidnet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "medoidnet/errors.hpp"

namespace medoidnet {

namespace {

void check_common(const BoundParams& p) {
  if (p.log_delta) {
    if (!(*p.log_delta < 0.0) || !std::isfinite(*p.log_delta)) {
      throw PreconditionError("log delta must be negative and finite, got " + std::to_string(*p.log_delta));
    }
  } else if (!(p.delta > 0.0 && p.delta < 1.0)) {
    throw PreconditionError("delta must lie in (0, 1), got " + std::to_string(p.delta));
  }
  if (!(p.n >= 1.0)) throw PreconditionError("n must be at least 1");
  if (!(p.alpha >= 0.0)) throw PreconditionError("alpha must be nonnegative");
  if (!(p.k >= 0.0) || !(p.b >= 0.0)) throw PreconditionError("k and b must be nonnegative");
  if (!(p.L >= 0.0)) throw PreconditionError("L must be nonnegative");
}

double log_delta(const BoundParams& p) { return p.log_delta ? *p.log_delta : std::log(p.delta); }

// ln(4 e^2 / delta)
double log_confidence(const BoundParams& p) { return std::log(4.0) + 2.0 - log_delta(p); }

}  // namespace

double q_bound(const BoundParams& p) {
  check_common(p);
  const double n = p.n;
  const double L = p.L;
  const double c = log_confidence(p);
  const double rk = std::sqrt(p.k / n);
  const double rb = std::sqrt(p.b / n);
  const double rc = std::sqrt(c / n);
  return (20.0 * rk + 20.0 * rb + 15.0 * rc + 1.0) * p.alpha
       + (6.0 * L + 18.0) * p.k / n + 8.0 * L * rk
       + (2.0 * L + 12.0) * p.b / n + 7.0 * L * rb
       + (3.0 * L + 10.0) * c / n + 6.0 * L * rc;
}

bool q_monotone_check(const BoundParams& p, const BoundParams& p2) {
  const bool same_rest = p.n == p2.n && p.b == p2.b && p.delta == p2.delta && p.L == p2.L &&
                         p.log_delta == p2.log_delta;
  const bool alpha_differs = p.alpha != p2.alpha;
  const bool k_differs = p.k != p2.k;
  if (!same_rest || (alpha_differs && k_differs)) {
    throw PreconditionError("q_monotone_check: parameters must differ only in alpha or only in k");
  }
  const double q1 = q_bound(p);
  const double q2 = q_bound(p2);
  if (alpha_differs) return (p.alpha < p2.alpha) ? q1 <= q2 : q2 <= q1;
  if (k_differs) return (p.k < p2.k) ? q1 <= q2 : q2 <= q1;
  return q1 == q2;
}

DeviationMode parse_deviation_mode(std::string_view name) {
  if (name == "hoeffding") return DeviationMode::hoeffding;
  if (name == "bernstein") return DeviationMode::bernstein;
  if (name == "sample-dependent" || name == "sample_dependent") return DeviationMode::sample_dependent;
  if (name == "final") return DeviationMode::final_form;
  throw PreconditionError("unknown bound mode '" + std::string(name) +
                          "' (valid: hoeffding, bernstein, sample-dependent, final)");
}

const char* to_string(DeviationMode mode) {
  switch (mode) {
    case DeviationMode::hoeffding: return "hoeffding";
    case DeviationMode::bernstein: return "bernstein";
    case DeviationMode::sample_dependent: return "sample-dependent";
    case DeviationMode::final_form: return "final";
  }
  return "unknown";
}

double compression_deviation_bound(const BoundParams& p, DeviationMode mode) {
  check_common(p);
  const double n = p.n;
  const double k = p.k;
  const double b = p.b;
  const double L = p.L;
  const double ln2 = std::numbers::ln2;
  const double ln4 = std::log(4.0);
  switch (mode) {
    case DeviationMode::hoeffding: {
      if (!(n > 2.0 * k)) {
        throw PreconditionError("hoeffding mode (fixed-size compression bound) requires n > 2k");
      }
      const double m = n - 2.0 * k;
      return std::sqrt(4.0 * L * L / m * (k * ln4 + (ln4 - log_delta(p))))
           + std::sqrt(L * L / m * b * ln2);
    }
    case DeviationMode::bernstein:
    case DeviationMode::sample_dependent: {
      double t = 0.0;
      if (mode == DeviationMode::bernstein) {
        if (!(n > 4.0 * k + 4.0)) {
          throw PreconditionError("bernstein mode (fixed-size Bernstein bound) requires n > 4k + 4");
        }
        t = (ln4 - log_delta(p)) + k * ln4;
      } else {
        if (!(k < n / 4.0 - 1.0)) {
          throw PreconditionError(
              "sample-dependent mode (data-dependent size bound) requires k < n/4 - 1");
        }
        t = std::log(4.0 * (k + 1.0) * (k + 2.0) * (b + 1.0) * (b + 2.0)) - log_delta(p) + k * ln4;
      }
      const double rt = std::sqrt(8.0 * t / n);
      const double rb = std::sqrt(8.0 * b * ln2 / n);
      return p.alpha * (5.0 * rt + 4.0 * rb)
           + 2.0 * L * rt + (28.0 + 8.0 * L) * t / (3.0 * n)
           + L * rb + 28.0 * b * ln2 / (3.0 * n);
    }
    case DeviationMode::final_form: {
      const double c = log_confidence(p);
      const double rk = std::sqrt(k / n);
      const double rb = std::sqrt(b / n);
      const double rc = std::sqrt(c / n);
      const double b_one = 20.0 * rk + 20.0 * rb + 15.0 * rc;
      const double b_two = (6.0 * L + 18.0) * k / n + 8.0 * L * rk
                         + (2.0 * L + 12.0) * b / n + 7.0 * L * rb
                         + (3.0 * L + 10.0) * c / n + 6.0 * L * rc;
      return b_one * p.alpha + b_two;
    }
  }
  throw PreconditionError("unknown deviation mode");
}

double empirical_bernstein_bound(double mean, std::uint64_t n, double delta, double L) {
  if (n < 2) throw PreconditionError("empirical_bernstein_bound requires n >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0, 1)");
  if (!(L >= 0.0)) throw PreconditionError("L must be nonnegative");
  if (!(mean >= 0.0 && mean <= L)) throw PreconditionError("mean must lie in [0, L]");
  const double m = static_cast<double>(n - 1);
  const double lc = std::log(4.0 / delta);
  const double r = std::sqrt(2.0 * lc / m);
  return mean * r + L * r + 7.0 * L * lc / (3.0 * m);
}

double Schedules::delta(std::uint64_t n) const {
  if (fixed_delta) return *fixed_delta;
  return std::exp(-std::sqrt(static_cast<double>(n)));
}

double Schedules::log_delta(std::uint64_t n) const {
  if (fixed_delta) return std::log(*fixed_delta);
  return -std::sqrt(static_cast<double>(n));
}

std::uint64_t Schedules::bits(std::uint64_t n) const {
  if (fixed_bits) return *fixed_bits;
  // Exact integer ceil(sqrt(n)).
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while (r * r < n) ++r;
  return r;
}

double Schedules::L(std::uint64_t n) const {
  if (fixed_L) return *fixed_L;
  return std::max(1.0, std::pow(static_cast<double>(n), 0.125));
}

double Schedules::eps(std::uint64_t n) const {
  if (fixed_eps) return *fixed_eps;
  return std::pow(static_cast<double>(n), -0.25);
}

Schedules default_schedules() { return {}; }

}  // namespace medoidnet
