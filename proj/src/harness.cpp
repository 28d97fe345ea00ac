#include "medoidnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "medoidnet/errors.hpp"
#include "text.hpp"

namespace medoidnet {

namespace {

using nlohmann::json;

const std::string* find_param(const DistributionParams& params, std::string_view key) {
  const auto it = params.find(key);
  return it == params.end() ? nullptr : &it->second;
}

double param_double(const DistributionParams& params, std::string_view key, double fallback) {
  const auto* v = find_param(params, key);
  if (!v) return fallback;
  const auto d = detail::parse_double(*v);
  if (!d) throw PreconditionError("parameter " + std::string(key) + " is not a number: '" + *v + "'");
  return *d;
}

// Bayes act and risk of a finite law, ties to the order-smallest label.
std::pair<std::vector<Element>, double> finite_bayes(const FiniteLaw& law, const MetricSpace& Y) {
  std::vector<Element> acts;
  double risk = 0.0;
  for (std::size_t i = 0; i < law.xs.size(); ++i) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < law.ys.size(); ++c) {
      double cost = 0.0;
      for (std::size_t j = 0; j < law.ys.size(); ++j) {
        cost += law.py_given_x[i][j] * Y.distance(law.ys[c], law.ys[j]);
      }
      if (cost < best_cost || (cost == best_cost && Y.less(law.ys[c], law.ys[best]))) {
        best = c;
        best_cost = cost;
      }
    }
    acts.push_back(law.ys[best]);
    risk += law.px[i] * best_cost;
  }
  return {std::move(acts), risk};
}

void attach_finite_law(SyntheticDistribution& d, FiniteLaw law) {
  const auto& Y = *d.label_space;
  // Cumulative tables for inverse-CDF draws.
  std::vector<double> cx;
  double acc = 0.0;
  for (double p : law.px) cx.push_back(acc += p);
  std::vector<std::vector<double>> cy;
  for (const auto& row : law.py_given_x) {
    std::vector<double> c;
    double a = 0.0;
    for (double p : row) c.push_back(a += p);
    cy.push_back(std::move(c));
  }
  auto pick = [](const std::vector<double>& cum, double u) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u * cum.back());
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
  };
  d.draw = [xs = law.xs, ys = law.ys, cx, cy, pick](Rng& rng) {
    const std::size_t i = pick(cx, rng.uniform());
    const std::size_t j = pick(cy[i], rng.uniform());
    return std::make_pair(xs[i], ys[j]);
  };
  d.draw_instance = [xs = law.xs, cx, pick](Rng& rng) { return xs[pick(cx, rng.uniform())]; };
  auto [acts, risk] = finite_bayes(law, Y);
  d.bayes_risk = risk;
  d.bayes_predictor = [xs = law.xs, acts = std::move(acts)](const Element& x) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] == x) return acts[i];
    }
    throw InvalidElement("instance outside the support of the law");
  };
  d.loss_cap = Y.diameter();
  d.law = std::move(law);
}

void check_rows(const FiniteLaw& law) {
  double total = 0.0;
  for (double p : law.px) {
    if (!(p >= 0.0)) throw PreconditionError("negative instance probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("instance probabilities must sum to 1");
  for (const auto& row : law.py_given_x) {
    if (row.size() != law.ys.size()) throw PreconditionError("conditional row has wrong length");
    double s = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw PreconditionError("negative conditional probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw PreconditionError("conditional rows must sum to 1");
  }
}

// CSV: header "x,p_x,<label>,...", then one row per support point.
SyntheticDistribution load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> names;
  FiniteLaw law;
  auto fail = [&](const std::string& what) {
    throw FormatError(path + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto cells = detail::split(t, ',');
    if (names.empty()) {
      if (cells.size() < 3 || detail::trim(cells[0]) != "x" || detail::trim(cells[1]) != "p_x") {
        fail("expected header x,p_x,<label>,...");
      }
      for (std::size_t j = 2; j < cells.size(); ++j) names.emplace_back(detail::trim(cells[j]));
      continue;
    }
    if (cells.size() != names.size() + 2) fail("expected " + std::to_string(names.size() + 2) + " fields");
    std::vector<double> v;
    for (const auto c : cells) {
      const auto d = detail::parse_double(detail::trim(c));
      if (!d || !std::isfinite(*d)) fail("non-numeric field '" + std::string(c) + "'");
      v.push_back(*d);
    }
    law.xs.push_back(Element::scalar(v[0]));
    law.px.push_back(v[1]);
    law.py_given_x.emplace_back(v.begin() + 2, v.end());
  }
  if (names.empty() || law.xs.empty()) throw FormatError(path + ": table has no rows");
  SyntheticDistribution d;
  d.instance_space = real_line();
  const auto Y = discrete(names);
  d.label_space = Y;
  law.ys = Y->elements();
  check_rows(law);
  attach_finite_law(d, std::move(law));
  return d;
}

}  // namespace

LabeledSample SyntheticDistribution::sample(std::uint64_t seed, std::size_t n) const {
  Rng rng(seed);
  LabeledSample s;
  for (std::size_t i = 0; i < n; ++i) {
    auto [x, y] = draw(rng);
    s.push_back(std::move(x), std::move(y));
  }
  return s;
}

const std::vector<std::string>& distribution_ids() {
  static const std::vector<std::string> ids{"singleton4", "lipschitz_identity",
                                            "laplace_regression", "finite_multiclass"};
  return ids;
}

SyntheticDistribution make_distribution(std::string_view id, const DistributionParams& params) {
  SyntheticDistribution d;
  if (id == "singleton4") {
    d.instance_space = singleton();
    const auto Y = four_point();
    d.label_space = Y;
    FiniteLaw law;
    law.xs = {Element::symbol(0)};
    law.px = {1.0};
    law.ys = Y->elements();
    law.py_given_x = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0}};
    attach_finite_law(d, std::move(law));
    // Exact values: f* = o and R* = 1/2.
    d.bayes_risk = 0.5;
  } else if (id == "lipschitz_identity") {
    d.instance_space = real_line();
    d.label_space = real_line();
    d.draw = [](Rng& rng) {
      const auto x = Element::scalar(rng.uniform());
      return std::make_pair(x, x);
    };
    d.draw_instance = [](Rng& rng) { return Element::scalar(rng.uniform()); };
    d.bayes_risk = 0.0;
    d.bayes_predictor = [](const Element& x) { return x; };
  } else if (id == "laplace_regression") {
    const double s = param_double(params, "s", 0.25);
    if (!(s > 0.0) || !std::isfinite(s)) throw PreconditionError("laplace_regression: s must be positive");
    d.instance_space = real_line();
    d.label_space = real_line();
    d.draw = [s](Rng& rng) {
      const double x = rng.uniform();
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      u -= 0.5;
      const double noise = (u < 0.0 ? s : -s) * std::log1p(-2.0 * std::abs(u));
      return std::make_pair(Element::scalar(x), Element::scalar(x * (1.0 - x) + noise));
    };
    d.draw_instance = [](Rng& rng) { return Element::scalar(rng.uniform()); };
    d.bayes_risk = s;
    d.bayes_predictor = [](const Element& x) { return Element::scalar(x[0] * (1.0 - x[0])); };
  } else if (id == "finite_multiclass") {
    if (const auto* table = find_param(params, "table")) {
      d = load_table(*table);
    } else {
      d.instance_space = real_line();
      const auto Y = discrete({"a", "b", "c"});
      d.label_space = Y;
      FiniteLaw law;
      law.xs = {Element::scalar(0), Element::scalar(1), Element::scalar(2), Element::scalar(3)};
      law.px = {0.25, 0.25, 0.25, 0.25};
      law.ys = Y->elements();
      law.py_given_x = {{0.7, 0.2, 0.1}, {0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}, {0.5, 0.5, 0.0}};
      attach_finite_law(d, std::move(law));
    }
  } else if (id == "cauchy_identity") {
    const auto* flag = find_param(params, "experimental");
    if (!flag || *flag != "1") {
      throw PreconditionError("cauchy_identity is experimental; pass experimental=1");
    }
    d.instance_space = real_line();
    d.label_space = real_line();
    auto cauchy = [](Rng& rng) {
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      return std::tan(std::numbers::pi * (u - 0.5));
    };
    d.draw = [cauchy](Rng& rng) {
      const auto x = Element::scalar(cauchy(rng));
      return std::make_pair(x, x);
    };
    d.draw_instance = [cauchy](Rng& rng) { return Element::scalar(cauchy(rng)); };
    d.bayes_risk = 0.0;
    d.bayes_predictor = [](const Element& x) { return x; };
  } else {
    std::string valid;
    for (const auto& v : distribution_ids()) valid += (valid.empty() ? "" : ", ") + v;
    throw PreconditionError("unknown distribution '" + std::string(id) + "' (valid: " + valid + ")");
  }
  d.id = std::string(id);
  return d;
}

double exact_risk(const Predictor& f, const SyntheticDistribution& dist, bool is_bayes_predictor) {
  if (dist.law) {
    const auto& law = *dist.law;
    const auto& Y = *dist.label_space;
    double risk = 0.0;
    for (std::size_t i = 0; i < law.xs.size(); ++i) {
      const Element y = f(law.xs[i]);
      double r = 0.0;
      for (std::size_t j = 0; j < law.ys.size(); ++j) {
        if (law.py_given_x[i][j] != 0.0) r += law.py_given_x[i][j] * evaluate_loss(Y, y, law.ys[j]);
      }
      risk += law.px[i] * r;
    }
    return risk;
  }
  if (is_bayes_predictor && dist.bayes_risk) return *dist.bayes_risk;
  throw UnsupportedOperation("exact risk is not available for '" + dist.id +
                             "'; use monte_carlo_risk");
}

RiskEstimate monte_carlo_risk(const Predictor& f, const SyntheticDistribution& dist,
                              std::uint64_t m, std::uint64_t seed) {
  if (m < 2) throw PreconditionError("monte_carlo_risk needs m >= 2");
  const auto& Y = *dist.label_space;
  Rng rng(seed);
  std::vector<double> losses(m);
  double sum = 0.0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto [x, y] = dist.draw(rng);
    losses[i] = evaluate_loss(Y, f(x), y);
    sum += losses[i];
    worst = std::max(worst, losses[i]);
  }
  RiskEstimate r;
  r.estimate = sum / static_cast<double>(m);
  if (dist.loss_cap && worst <= *dist.loss_cap) {
    r.cap = *dist.loss_cap;
  } else {
    const auto k = static_cast<std::size_t>(std::ceil(0.999 * static_cast<double>(m))) - 1;
    std::nth_element(losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(k), losses.end());
    r.cap = std::max(losses[k], r.estimate);
    r.heuristic_cap = true;
  }
  r.half_width = empirical_bernstein_bound(r.estimate, m, 0.05, r.cap);
  return r;
}

Predictor majority_vote_baseline(const LabeledSample& sample, std::size_t k,
                                 SpaceHandle instance_space, SpaceHandle label_space) {
  if (k == 0 || k > sample.size()) throw PreconditionError("majority vote needs 1 <= k <= n");
  std::vector<Element> xs(sample.instances().begin(), sample.instances().end());
  std::vector<Element> ys(sample.labels().begin(), sample.labels().end());
  return [xs = std::move(xs), ys = std::move(ys), k, X = std::move(instance_space),
          Y = std::move(label_space)](const Element& x) {
    std::vector<std::pair<double, std::size_t>> by_dist(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) by_dist[i] = {X->distance(x, xs[i]), i};
    auto closer = [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      if (X->less(xs[a.second], xs[b.second])) return true;
      if (X->less(xs[b.second], xs[a.second])) return false;
      return a.second < b.second;
    };
    std::partial_sort(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(k),
                      by_dist.end(), closer);
    std::vector<std::pair<std::size_t, std::size_t>> votes;  // (label position, count)
    for (std::size_t r = 0; r < k; ++r) {
      const auto& y = ys[by_dist[r].second];
      auto it = std::find_if(votes.begin(), votes.end(),
                             [&](const auto& v) { return ys[v.first] == y; });
      if (it == votes.end()) {
        votes.emplace_back(by_dist[r].second, 1);
      } else {
        ++it->second;
      }
    }
    std::size_t best = 0;
    for (std::size_t v = 1; v < votes.size(); ++v) {
      if (votes[v].second > votes[best].second ||
          (votes[v].second == votes[best].second && Y->less(ys[votes[v].first], ys[votes[best].first]))) {
        best = v;
      }
    }
    return ys[votes[best].first];
  };
}

Element true_medoid_oracle(const SyntheticDistribution& dist,
                           std::optional<std::span<const Element>> region) {
  if (!dist.law) {
    throw UnsupportedOperation("true_medoid_oracle needs a finite conditional law; '" + dist.id +
                               "' is continuous");
  }
  const auto& law = *dist.law;
  const auto& Y = *dist.label_space;
  std::vector<double> weight(law.xs.size(), region ? 0.0 : 1.0);
  if (region) {
    for (const auto& x : *region) {
      const auto it = std::find(law.xs.begin(), law.xs.end(), x);
      if (it == law.xs.end()) throw PreconditionError("region point outside the support of the law");
      weight[static_cast<std::size_t>(it - law.xs.begin())] = 1.0;
    }
  }
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < law.ys.size(); ++c) {
    double cost = 0.0;
    for (std::size_t i = 0; i < law.xs.size(); ++i) {
      if (weight[i] == 0.0) continue;
      for (std::size_t j = 0; j < law.ys.size(); ++j) {
        cost += law.px[i] * law.py_given_x[i][j] * Y.distance(law.ys[c], law.ys[j]);
      }
    }
    if (cost < best_cost || (cost == best_cost && Y.less(law.ys[c], law.ys[best]))) {
      best = c;
      best_cost = cost;
    }
  }
  return law.ys[best];
}

double estimate_missing_mass(const SyntheticDistribution& dist, const LabeledSample& sample,
                             double gamma, std::uint64_t m, std::uint64_t seed) {
  if (m < 1) throw PreconditionError("estimate_missing_mass needs m >= 1");
  if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
  const auto& X = *dist.instance_space;
  Rng rng(seed);
  std::uint64_t missed = 0;
  for (std::uint64_t i = 0; i < m; ++i) {
    const Element x = dist.draw_instance(rng);
    bool covered = false;
    for (const auto& s : sample.instances()) {
      if (X.distance(x, s) < gamma) {
        covered = true;
        break;
      }
    }
    if (!covered) ++missed;
  }
  return static_cast<double>(missed) / static_cast<double>(m);
}

const std::vector<std::string>& experiment_learner_ids() {
  static const std::vector<std::string> ids{"fin", "countable", "unbounded", "separable", "knn1", "knn"};
  return ids;
}

ExperimentResult convergence_experiment(std::string_view learner_id,
                                        const SyntheticDistribution& dist,
                                        std::span<const std::uint64_t> n_grid,
                                        std::uint64_t trials, std::uint64_t seed,
                                        const ExperimentOptions& opts) {
  const auto& ids = experiment_learner_ids();
  if (std::find(ids.begin(), ids.end(), learner_id) == ids.end()) {
    std::string valid;
    for (const auto& v : ids) valid += (valid.empty() ? "" : ", ") + v;
    throw PreconditionError("unknown learner '" + std::string(learner_id) + "' (valid: " + valid + ")");
  }
  if (!std::is_sorted(n_grid.begin(), n_grid.end())) {
    throw PreconditionError("n_grid must be sorted ascending");
  }
  for (const auto n : n_grid) {
    if (n == 0) throw PreconditionError("n_grid entries must be positive");
  }
  ExperimentResult result;
  result.rows.resize(n_grid.size() * trials);
  std::vector<std::exception_ptr> errors(result.rows.size());
  const std::string learner(learner_id);
  const auto& S = opts.schedules;
  const auto cells = static_cast<std::int64_t>(result.rows.size());

#pragma omp parallel for schedule(dynamic, 1) if (cells > 1)
  for (std::int64_t c = 0; c < cells; ++c) {
    auto& row = result.rows[static_cast<std::size_t>(c)];
    try {
      const std::uint64_t n = n_grid[static_cast<std::size_t>(c) / trials];
      const std::uint64_t t = static_cast<std::uint64_t>(c) % trials;
      const auto start = std::chrono::steady_clock::now();
      const std::uint64_t cell_seed = trial_seed(seed, n, t);
      const LabeledSample sample = dist.sample(cell_seed, n);
      row.n = n;
      row.trial = t;
      row.learner_id = learner;
      Predictor f;
      std::optional<MedoidModel> model;
      const auto& X = dist.instance_space;
      const auto& Y = dist.label_space;
      if (learner == "fin") {
        model = fin_med_net(sample, S.delta(n), X, Y, opts.learner);
      } else if (learner == "countable") {
        model = countable_med_net(sample, S.delta(n), S.bits(n), X, Y, opts.learner);
      } else if (learner == "unbounded") {
        model = ctbl_unbdd(sample, S.delta(n), S.bits(n), S.L(n), X, Y, opts.learner);
      } else if (learner == "separable") {
        model = medoid_net(sample, S, X, Y, opts.learner);
      } else {
        const std::size_t k = learner == "knn1" ? 1 : static_cast<std::size_t>(
                                                          default_schedules().bits(n));
        f = majority_vote_baseline(sample, std::min<std::size_t>(k, n), X, Y);
      }
      if (model) {
        f = model->predictor();
        row.alpha_star = model->alpha_star;
        row.q_star = model->q_star;
        row.selected_gamma = model->selected_gamma;
        row.d = model->size();
      }
      if (dist.law) {
        row.estimated_risk = exact_risk(f, dist);
        row.exact = true;
      } else {
        const auto est = monte_carlo_risk(f, dist, opts.mc_draws, mix64(cell_seed));
        row.estimated_risk = est.estimate;
        row.half_width = est.half_width;
        row.heuristic_cap = est.heuristic_cap;
      }
      row.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

namespace {

const char* risk_method(const ExperimentRow& r) {
  if (r.exact) return "exact";
  return r.heuristic_cap ? "mc-heuristic-cap" : "mc";
}

std::string opt_field(const std::optional<double>& v) {
  return v ? detail::format_double(*v) : std::string();
}

json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

}  // namespace

void write_csv(const ExperimentResult& result, std::ostream& out) {
  out << "n,trial,learner,estimated_risk,risk_method,half_width,alpha_star,q_star,selected_gamma,d\n";
  for (const auto& r : result.rows) {
    out << r.n << ',' << r.trial << ',' << r.learner_id << ',' << detail::format_double(r.estimated_risk)
        << ',' << risk_method(r) << ',' << (r.exact ? std::string() : detail::format_double(r.half_width))
        << ',' << opt_field(r.alpha_star) << ',' << opt_field(r.q_star) << ','
        << opt_field(r.selected_gamma) << ',' << (r.d ? std::to_string(*r.d) : std::string()) << '\n';
  }
}

void write_json_lines(const ExperimentResult& result, std::ostream& out) {
  for (const auto& r : result.rows) {
    json j;
    j["n"] = r.n;
    j["trial"] = r.trial;
    j["learner"] = r.learner_id;
    j["estimated_risk"] = r.estimated_risk;
    j["risk_method"] = risk_method(r);
    j["half_width"] = r.exact ? json(nullptr) : json(r.half_width);
    j["alpha_star"] = opt_json(r.alpha_star);
    j["q_star"] = opt_json(r.q_star);
    j["selected_gamma"] = opt_json(r.selected_gamma);
    j["d"] = r.d ? json(*r.d) : json(nullptr);
    j["wall_time"] = r.wall_time;
    out << j.dump() << '\n';
  }
}

}  // namespace medoidnet
