// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "medoidnet/bounds.hpp"
#include "medoidnet/harness.hpp"
#include "medoidnet/learners.hpp"
#include "medoidnet/medoid.hpp"
#include "medoidnet/net.hpp"
#include "medoidnet/sweep.hpp"
#include "oracle/bound_oracle.hpp"
#include "oracle/brute_medoid.hpp"

using namespace medoidnet;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Outcome counterexample_separation() {
  const auto t0 = Clock::now();
  const auto dist = make_distribution("singleton4");
  const auto Y = four_point();
  const std::uint64_t n = 2000;
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  int fin_o = 0;
  int knn_abc = 0;
  bool exact_ok = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto sample = dist.sample(trial_seed(1001, n, s), n);
    const auto m = fin_med_net(sample, default_schedules().delta(n), dist.instance_space, Y);
    const Element fy = m.predict(Element::symbol(0));
    if (fy == Y->element("o")) {
      ++fin_o;
      exact_ok = exact_ok && exact_risk(m.predictor(), dist) == 0.5;
    }
    const auto knn = majority_vote_baseline(sample, k, dist.instance_space, Y);
    const Element ky = knn(Element::symbol(0));
    if (ky != Y->element("o")) {
      ++knn_abc;
      exact_ok = exact_ok && std::abs(exact_risk(knn, dist) - 2.0 / 3.0) < 1e-15;
    }
  }
  const double t = seconds_since(t0);
  return {fin_o >= 19 && knn_abc == 20 && exact_ok && t < 10.0,
          fmt("fin gives o in %d/20 seeds (need >= 19, risk 0.5); knn k=%zu gives a label in {a,b,c} in "
              "%d/20 (need 20, risk 2/3); exact risks %s; %.2f s (limit 10 s)",
              fin_o, k, knn_abc, exact_ok ? "match" : "MISMATCH", t)};
}

Outcome noiseless_trend() {
  const auto t0 = Clock::now();
  const auto dist = make_distribution("lipschitz_identity");
  const std::vector<std::uint64_t> grid{64, 256, 1024, 4096};
  ExperimentOptions opts;
  opts.mc_draws = 100000;
  const auto r = convergence_experiment("separable", dist, grid, 5, 2002, opts);
  std::vector<double> medians;
  std::string text;
  for (const auto n : grid) {
    std::vector<double> risks;
    for (const auto& row : r.rows) {
      if (row.n == n) risks.push_back(row.estimated_risk);
    }
    medians.push_back(median(risks));
    text += fmt("%s%llu:%.4f", text.empty() ? "" : " ", static_cast<unsigned long long>(n), medians.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i) decreasing = decreasing && medians[i] < medians[i - 1];
  const double t = seconds_since(t0);
  return {decreasing && medians.back() <= 0.05 && t < 600.0,
          fmt("median MC risk by n {%s}; strictly decreasing: %s; final %.4f (need <= 0.05); %.1f s "
              "(limit 600 s)",
              text.c_str(), decreasing ? "yes" : "no", medians.back(), t)};
}

Outcome noisy_regression() {
  const auto t0 = Clock::now();
  const auto dist = make_distribution("laplace_regression", {{"s", "0.25"}});
  const std::vector<std::uint64_t> grid{10000};
  ExperimentOptions opts;
  opts.mc_draws = 100000;
  const auto r = convergence_experiment("separable", dist, grid, 5, 2003, opts);
  int within = 0;
  std::string text;
  for (const auto& row : r.rows) {
    const double relerr = std::abs(row.estimated_risk - 0.25) / 0.25;
    within += relerr <= 0.15;
    text += fmt("%s%.4f", text.empty() ? "" : " ", row.estimated_risk);
  }
  const double t = seconds_since(t0);
  return {within >= 4 && t < 900.0,
          fmt("risks {%s} vs R*=0.25; %d/5 within 15%% (need >= 4); %.1f s (limit 900 s)", text.c_str(),
              within, t)};
}

Outcome bound_validity() {
  const auto t0 = Clock::now();
  const auto dist = make_distribution("finite_multiclass");
  const std::vector<std::uint64_t> grid{500};
  ExperimentOptions opts;
  opts.schedules.fixed_delta = 0.1;
  const auto r = convergence_experiment("fin", dist, grid, 200, 2004, opts);
  int exceed = 0;
  double worst_gap = -INFINITY;
  for (const auto& row : r.rows) {
    exceed += row.estimated_risk > *row.q_star;
    worst_gap = std::max(worst_gap, row.estimated_risk - *row.q_star);
  }
  const double frac = exceed / 200.0;
  const double t = seconds_since(t0);
  return {frac <= 0.15 && t < 300.0,
          fmt("%d/200 trials with exact risk > q_star (fraction %.3f, need <= 0.15); max risk - q_star "
              "%.4f; %.1f s (limit 300 s)",
              exceed, frac, worst_gap, t)};
}

// Deleting non-center points must leave the net and, with the center
// labels held fixed, the predictor unchanged.
Outcome semi_stability() {
  std::mt19937_64 rng(2005);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<SpaceHandle> spaces{real_line(), euclidean(2), euclidean(3, Norm::l1)};
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto& X = *spaces[t % spaces.size()];
    const std::size_t n = 2 + rng() % 60;
    std::vector<Element> xs;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> c(X.dimension());
      // Coarse grid so duplicates and equal distances occur.
      for (auto& v : c) v = std::round(u(rng) * 12) / 12;
      xs.emplace_back(std::move(c));
    }
    const auto scales = candidate_scales(X, xs).scales;
    const double gamma = scales[rng() % scales.size()];
    const auto net = build_gamma_net(xs, gamma, X);
    std::vector<bool> center(n, false);
    for (auto c : net.center_indices) center[c] = true;
    std::vector<std::pair<Element, Element>> model;
    for (auto c : net.center_indices) model.emplace_back(xs[c], Element::scalar(static_cast<double>(c)));

    std::vector<Element> kept;
    std::vector<std::size_t> kept_from;
    const double p_delete = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (center[i] || u(rng) >= p_delete) {
        kept.push_back(xs[i]);
        kept_from.push_back(i);
      }
    }
    const auto rebuilt = build_gamma_net(kept, gamma, X);
    std::vector<std::size_t> same;
    for (auto c : rebuilt.center_indices) same.push_back(kept_from[c]);
    if (same != net.center_indices) {
      ++failures;
      continue;
    }
    std::vector<std::pair<Element, Element>> model2;
    for (auto c : rebuilt.center_indices) {
      model2.emplace_back(kept[c], Element::scalar(static_cast<double>(kept_from[c])));
    }
    for (int q = 0; q < 20; ++q) {
      std::vector<double> c(X.dimension());
      for (auto& v : c) v = std::round(u(rng) * 24) / 24;
      const Element x(std::move(c));
      if (!(nn_predict(model, x, X) == nn_predict(model2, x, X))) {
        ++failures;
        break;
      }
    }
  }
  return {failures == 0, fmt("%d failures in 1000 deletion cases (need 0)", failures)};
}

double rel(double got, const oracle::Real& want) {
  const double w = static_cast<double>(want);
  return w == 0.0 ? std::abs(got) : std::abs(got - w) / std::abs(w);
}

Outcome bound_oracle() {
  std::mt19937_64 rng(2006);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  double worst_identity = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double n = std::floor(std::exp(std::log(20.0) + u(rng) * std::log(1e7 / 20.0)));
    const double k = std::floor((n / 4 - 2) * u(rng) * u(rng));
    const BoundParams p{n, 3 * u(rng), std::max(0.0, k), std::floor(200 * u(rng) * u(rng)),
                        std::exp(-20 * u(rng)) * (1 - 1e-9), 5 * u(rng)};
    const oracle::Args a{p.n, p.alpha, p.k, p.b, p.delta, p.L};
    worst = std::max(worst, rel(q_bound(p), oracle::q(a)));
    worst = std::max(worst, rel(compression_deviation_bound(p, DeviationMode::hoeffding), oracle::hoeffding(a)));
    worst = std::max(worst, rel(compression_deviation_bound(p, DeviationMode::bernstein), oracle::bernstein(a)));
    worst = std::max(worst, rel(compression_deviation_bound(p, DeviationMode::sample_dependent),
                                oracle::sample_dependent(a)));
    worst = std::max(worst, rel(compression_deviation_bound(p, DeviationMode::final_form), oracle::final_form(a)));
    const double mean = p.L * u(rng);
    const auto m = static_cast<std::uint64_t>(n);
    worst = std::max(worst, rel(empirical_bernstein_bound(mean, m, p.delta, p.L),
                                oracle::empirical_bernstein(mean, p.n, p.delta, p.L)));
    const double q = q_bound(p);
    const double identity = compression_deviation_bound(p, DeviationMode::final_form) + p.alpha;
    worst_identity = std::max(worst_identity, std::abs(identity - q) / q);
  }
  return {worst < 1e-12 && worst_identity < 1e-12,
          fmt("max relative error %.3g over 1000 tuples x 6 evaluators (need < 1e-12); final + alpha vs Q "
              "max relative gap %.3g",
              worst, worst_identity)};
}

Outcome medoid_brute_force() {
  std::mt19937_64 rng(2007);
  std::uniform_real_distribution<double> u(0, 1);
  const auto R = real_line();
  const auto Y4 = four_point();
  const auto D = discrete({"p", "q", "r", "s", "t"});
  const auto E = euclidean(2, Norm::l1);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 1 + rng() % 64;
    const std::size_t c = 1 + rng() % 64;
    std::vector<Element> cell;
    std::vector<Element> cand;
    const MetricSpace* S = nullptr;
    switch (t % 4) {
      case 0:
        S = R.get();
        for (std::size_t i = 0; i < m; ++i) cell.push_back(Element::scalar(std::round(u(rng) * 16) / 8 - 1));
        for (std::size_t i = 0; i < c; ++i) cand.push_back(Element::scalar(std::round(u(rng) * 16) / 8 - 1));
        break;
      case 1: {
        S = Y4.get();
        const auto all = Y4->elements();
        for (std::size_t i = 0; i < m; ++i) cell.push_back(all[rng() % 3]);
        for (std::size_t i = 0; i < c; ++i) cand.push_back(all[rng() % 4]);
        break;
      }
      case 2: {
        S = D.get();
        const auto all = D->elements();
        for (std::size_t i = 0; i < m; ++i) cell.push_back(all[rng() % 5]);
        for (std::size_t i = 0; i < c; ++i) cand.push_back(all[rng() % 5]);
        break;
      }
      default:
        S = E.get();
        for (std::size_t i = 0; i < m; ++i) cell.push_back(Element{std::round(u(rng) * 4) / 4, std::round(u(rng) * 4) / 4});
        for (std::size_t i = 0; i < c; ++i) cand.push_back(Element{std::round(u(rng) * 4) / 4, std::round(u(rng) * 4) / 4});
    }
    if (!(empirical_medoid(cell, cand, *S) == oracle::brute_medoid(cell, cand, *S))) ++failures;
  }
  return {failures == 0, fmt("%d mismatches in 1000 (cell, candidate) cases (need 0)", failures)};
}

Outcome geometry() {
  std::mt19937_64 rng(2008);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<SpaceHandle> spaces{real_line(), euclidean(2), euclidean(2, Norm::l1)};
  const auto Y = discrete({"u", "v", "w"});
  const auto labels_all = Y->elements();
  int packing = 0, covering = 0, partition = 0, certificate = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto& X = *spaces[t % spaces.size()];
    const std::size_t n = 1 + rng() % 40;
    std::vector<Element> xs;
    std::vector<Element> ys;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> c(X.dimension());
      for (auto& v : c) v = std::round(u(rng) * 10) / 10;
      xs.emplace_back(std::move(c));
      ys.push_back(labels_all[rng() % 3]);
    }
    const auto scales = candidate_scales(X, xs).scales;
    const double gamma = scales[rng() % scales.size()];
    const auto net = build_gamma_net(xs, gamma, X);
    bool pack_ok = net.size() >= 1;
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (std::size_t j = i + 1; j < net.size(); ++j) {
        pack_ok = pack_ok && X.distance(xs[net.center_indices[i]], xs[net.center_indices[j]]) >= gamma;
      }
    }
    packing += !pack_ok;
    const auto cells = assign_voronoi(xs, net, X);
    bool cover_ok = true;
    bool part_ok = cells.cell_of.size() == n;
    std::vector<std::size_t> sizes(net.size(), 0);
    for (std::size_t i = 0; i < n && part_ok; ++i) {
      const auto c = cells.cell_of[i];
      if (c >= net.size()) {
        part_ok = false;
        break;
      }
      ++sizes[c];
      const double own = X.distance(xs[i], xs[net.center_indices[c]]);
      cover_ok = cover_ok && own < gamma;
      for (auto o : net.center_indices) part_ok = part_ok && own <= X.distance(xs[i], xs[o]);
    }
    for (std::size_t c = 0; c < net.size() && part_ok; ++c) {
      part_ok = sizes[c] >= 1 && cells.cell_of[net.center_indices[c]] == c;
    }
    covering += !cover_ok;
    partition += !part_ok;

    // Certificate: the chosen scale minimizes Q over every scale in Gamma.
    const auto all = Y->elements();
    const double bits = static_cast<double>(rng() % 8);
    const double delta = 0.01 + 0.5 * u(rng);
    const SweepProblem p{X, xs, *Y, ys, all, bits, delta, 1.0};
    const auto per_scale = evaluate_all_scales(p);
    const auto chosen = sweep_parallel(p);
    double best = INFINITY;
    double best_gamma = INFINITY;
    for (const auto& s : per_scale) {
      const double q = q_bound({static_cast<double>(n), s.alpha, static_cast<double>(s.d), bits, delta, 1.0});
      if (q < best || (q == best && s.gamma < best_gamma)) {
        best = q;
        best_gamma = s.gamma;
      }
    }
    certificate += !(chosen.q == best && chosen.gamma == best_gamma);
  }
  const int total = packing + covering + partition + certificate;
  return {total == 0, fmt("1000 nets: packing %d, covering %d, partition %d, argmin certificate %d failures "
                          "(need 0)",
                          packing, covering, partition, certificate)};
}

Outcome q_trend() {
  const auto t0 = Clock::now();
  const auto S = default_schedules();
  std::vector<double> sups;
  std::string text;
  for (const std::uint64_t n : {100ULL, 1000ULL, 10000ULL, 100000ULL, 1000000ULL}) {
    const double kb = std::ceil(std::sqrt(static_cast<double>(n)));
    double sup = -INFINITY;
    for (int i = 0; i <= 1000; ++i) {
      const double alpha = i / 1000.0;
      BoundParams p{static_cast<double>(n), alpha, kb, kb, S.delta(n), 1.0};
      p.log_delta = S.log_delta(n);
      sup = std::max(sup, q_bound(p) - alpha);
    }
    sups.push_back(sup);
    text += fmt("%s%llu:%.4f", text.empty() ? "" : " ", static_cast<unsigned long long>(n), sup);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < sups.size(); ++i) decreasing = decreasing && sups[i] < sups[i - 1];
  const double t = seconds_since(t0);
  return {decreasing && sups.back() < 0.05 && t < 1.0,
          fmt("sup_alpha (Q - alpha) by n {%s}; strictly decreasing: %s; at 1e6 %.4f (need < 0.05); %.3f s",
              text.c_str(), decreasing ? "yes" : "no", sups.back(), t)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"counterexample separation", counterexample_separation},
      {"noiseless convergence trend", noiseless_trend},
      {"noisy regression target", noisy_regression},
      {"bound validity", bound_validity},
      {"semi-stability", semi_stability},
      {"bound formula oracle", bound_oracle},
      {"medoid brute force", medoid_brute_force},
      {"geometry invariants", geometry},
      {"Q - alpha trend", q_trend},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %-28s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
