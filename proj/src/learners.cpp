#include "medoidnet/learners.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "medoidnet/errors.hpp"
#include "medoidnet/net.hpp"

namespace medoidnet {

namespace {

using nlohmann::json;

void check_sample(const LabeledSample& sample, const MetricSpace& X, const MetricSpace& Y) {
  if (sample.empty()) throw PreconditionError("learner needs a nonempty sample");
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!X.contains(sample.instance(i))) {
      throw InvalidElement("instance " + std::to_string(i) + " is not in space '" + X.id() + "'");
    }
    if (!Y.contains(sample.label(i))) {
      throw InvalidElement("label " + std::to_string(i) + " is not in space '" + Y.id() + "'");
    }
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0, 1)");
}

std::uint64_t pow2_capped(std::uint64_t bits) {
  return bits >= 63 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << bits);
}

MedoidModel run_sweep(const LabeledSample& sample, const SpaceHandle& X, const MetricSpace& Y,
                      std::span<const Element> candidates, std::uint64_t bits, double delta,
                      double L, const LearnerOptions& opts) {
  const SweepProblem problem{*X,
                             sample.instances(),
                             Y,
                             sample.labels(),
                             candidates,
                             static_cast<double>(bits),
                             delta,
                             L,
                             opts.distance_cache_cap};
  const SweepResult r = opts.reference_sweep ? sweep_reference(problem) : sweep_parallel(problem);
  MedoidModel m;
  m.instance_space_id = X->id();
  m.selected_gamma = r.gamma;
  m.alpha_star = r.alpha;
  m.q_star = r.q;
  m.n_train = sample.size();
  m.schedule.delta = delta;
  m.schedule.bits = bits;
  m.schedule.L = L;
  m.instance_space = X;
  m.net_points.reserve(r.net.size());
  for (std::size_t c = 0; c < r.net.size(); ++c) {
    m.net_points.emplace_back(sample.instance(r.net.center_indices[c]), r.labels[c]);
  }
  return m;
}

MedoidModel ctbl_unbdd_impl(const LabeledSample& sample, double delta, std::uint64_t bits,
                            double L_trunc, const SpaceHandle& X, const SpaceHandle& Y,
                            const LearnerOptions& opts) {
  if (!Y->is_metric()) {
    throw PreconditionError("ctbl_unbdd needs a metric label space; '" + Y->id() +
                            "' is declared with a general loss");
  }
  if (!(L_trunc > 0.0)) throw PreconditionError("ctbl_unbdd: L_trunc must be positive");
  const auto anchor = Y->anchor();
  if (!anchor) throw UnsupportedOperation("ctbl_unbdd: label space '" + Y->id() + "' has no anchor");
  if (!Y->has_enumeration()) {
    throw UnsupportedOperation("ctbl_unbdd: label space '" + Y->id() + "' has no enumeration");
  }
  const auto ball = ball_elements(*Y, *anchor, L_trunc);
  const auto truncated = truncate_labels(sample, *Y, L_trunc);
  const auto count = std::min<std::uint64_t>(pow2_capped(bits), ball.size());
  const std::span<const Element> candidates(ball.data(), static_cast<std::size_t>(count));
  MedoidModel m = run_sweep(truncated, X, *Y, candidates, bits, delta, 2.0 * L_trunc, opts);
  m.label_space_id = Y->id();
  m.label_space = Y;
  m.schedule.L_trunc = L_trunc;
  m.variant = LearnerVariant::unbounded;
  return m;
}

json element_to_json(const MetricSpace& space, const Element& e) {
  if (space.symbolic()) return space.format(e);
  return json(std::vector<double>(e.coords().begin(), e.coords().end()));
}

Element element_from_json(const MetricSpace& space, const json& j) {
  Element e;
  if (space.symbolic()) {
    if (!j.is_string()) throw FormatError("model: expected an element name");
    try {
      return space.parse(j.get<std::string>());
    } catch (const InvalidElement& err) {
      throw FormatError(std::string("model: ") + err.what());
    }
  }
  if (!j.is_array()) throw FormatError("model: expected a coordinate array");
  e = Element{j.get<std::vector<double>>()};
  if (!space.contains(e)) throw FormatError("model: element outside space '" + space.id() + "'");
  return e;
}

json scale_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double scale_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInfiniteScale;
  if (!j.is_number()) throw FormatError("model: selected_gamma must be a number or \"inf\"");
  return j.get<double>();
}

}  // namespace

LearnerVariant parse_learner_variant(std::string_view name) {
  if (name == "fin") return LearnerVariant::fin;
  if (name == "countable") return LearnerVariant::countable;
  if (name == "unbounded") return LearnerVariant::unbounded;
  if (name == "separable") return LearnerVariant::separable;
  throw PreconditionError("unknown learner '" + std::string(name) +
                          "' (valid: fin, countable, unbounded, separable)");
}

const char* to_string(LearnerVariant v) {
  switch (v) {
    case LearnerVariant::fin: return "fin";
    case LearnerVariant::countable: return "countable";
    case LearnerVariant::unbounded: return "unbounded";
    case LearnerVariant::separable: return "separable";
  }
  return "unknown";
}

Element MedoidModel::predict(const Element& x) const {
  return nn_predict(net_points, x, *instance_space);
}

Predictor MedoidModel::predictor() const {
  return [points = net_points, X = instance_space](const Element& x) {
    return nn_predict(points, x, *X);
  };
}

double empirical_risk(const Predictor& f, const LabeledSample& sample, const MetricSpace& labels) {
  if (sample.empty()) throw PreconditionError("empirical_risk: empty sample");
  double acc = 0.0;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    acc += labels.distance(f(sample.instance(j)), sample.label(j));
  }
  return acc / static_cast<double>(sample.size());
}

MedoidModel fin_med_net(const LabeledSample& sample, double delta, SpaceHandle instance_space,
                        SpaceHandle label_space, const LearnerOptions& opts) {
  check_delta(delta);
  const auto card = label_space->has_enumeration() ? label_space->cardinality() : std::nullopt;
  if (!card) {
    throw PreconditionError("fin_med_net needs a finite label space; use countable_med_net for '" +
                            label_space->id() + "'");
  }
  check_sample(sample, *instance_space, *label_space);
  const auto candidates = label_space->first_elements(*card);
  std::uint64_t bits = 0;
  while ((std::uint64_t{1} << bits) < *card) ++bits;
  MedoidModel m = run_sweep(sample, instance_space, *label_space, candidates, bits, delta,
                            label_space->diameter(), opts);
  m.label_space_id = label_space->id();
  m.label_space = std::move(label_space);
  m.variant = LearnerVariant::fin;
  return m;
}

MedoidModel countable_med_net(const LabeledSample& sample, double delta, std::uint64_t bits,
                              SpaceHandle instance_space, SpaceHandle label_space,
                              const LearnerOptions& opts) {
  check_delta(delta);
  if (!label_space->has_enumeration()) {
    throw UnsupportedOperation("countable_med_net: label space '" + label_space->id() +
                               "' has no enumeration");
  }
  const double L = label_space->diameter();
  if (!std::isfinite(L)) {
    throw PreconditionError("countable_med_net needs a bounded label space; use ctbl_unbdd");
  }
  check_sample(sample, *instance_space, *label_space);
  const auto candidates = enumerate_labels(*label_space, bits);
  MedoidModel m = run_sweep(sample, instance_space, *label_space, candidates, bits, delta, L, opts);
  m.label_space_id = label_space->id();
  m.label_space = std::move(label_space);
  m.variant = LearnerVariant::countable;
  return m;
}

MedoidModel ctbl_unbdd(const LabeledSample& sample, double delta, std::uint64_t bits,
                       double L_trunc, SpaceHandle instance_space, SpaceHandle label_space,
                       const LearnerOptions& opts) {
  check_delta(delta);
  check_sample(sample, *instance_space, *label_space);
  return ctbl_unbdd_impl(sample, delta, bits, L_trunc, instance_space, label_space, opts);
}

MedoidModel medoid_net(const LabeledSample& sample, const Schedules& schedules,
                       SpaceHandle instance_space, SpaceHandle label_space,
                       const LearnerOptions& opts) {
  if (!label_space->has_eps_net()) {
    throw UnsupportedOperation("medoid_net: label space '" + label_space->id() +
                               "' has no eps-net oracle");
  }
  const auto anchor = label_space->anchor();
  if (!anchor) {
    throw UnsupportedOperation("medoid_net: label space '" + label_space->id() + "' has no anchor");
  }
  check_sample(sample, *instance_space, *label_space);
  const std::uint64_t n = sample.size();
  const double eps = schedules.eps(n);
  auto net = label_space->eps_net(eps);
  if (net.empty()) throw PreconditionError("medoid_net: eps-net oracle returned no points");
  const Element net_anchor = project_to_eps_net(*label_space, *anchor, net);
  const auto projected = project_labels(sample, *label_space, net);
  const auto net_space = std::make_shared<SubsetSpace>(label_space, std::move(net), net_anchor);
  MedoidModel m = ctbl_unbdd_impl(projected, schedules.delta(n), schedules.bits(n),
                                  schedules.L(n), instance_space, net_space, opts);
  m.label_space_id = label_space->id();
  m.label_space = std::move(label_space);
  m.schedule.eps = eps;
  m.variant = LearnerVariant::separable;
  return m;
}

LabeledSample truncate_labels(const LabeledSample& sample, const MetricSpace& labels,
                              double L_trunc) {
  if (!(L_trunc > 0.0)) throw PreconditionError("truncate_labels: L must be positive");
  const auto anchor = labels.anchor();
  if (!anchor) throw UnsupportedOperation("label space '" + labels.id() + "' has no anchor");
  std::optional<std::vector<Element>> ball;
  std::vector<Element> out;
  out.reserve(sample.size());
  for (const auto& y : sample.labels()) {
    if (labels.distance(*anchor, y) <= L_trunc) {
      out.push_back(y);
    } else if (auto p = labels.closest_in_ball(y, *anchor, L_trunc)) {
      out.push_back(std::move(*p));
    } else {
      if (!ball) ball = ball_elements(labels, *anchor, L_trunc);
      out.push_back(project_to_eps_net(labels, y, *ball));
    }
  }
  return sample.with_labels(std::move(out));
}

LabeledSample project_labels(const LabeledSample& sample, const MetricSpace& labels,
                             std::span<const Element> net) {
  std::vector<Element> out;
  out.reserve(sample.size());
  for (const auto& y : sample.labels()) out.push_back(project_to_eps_net(labels, y, net));
  return sample.with_labels(std::move(out));
}

std::string serialize_model(const MedoidModel& model) {
  json doc;
  doc["format"] = "medoidnet-model";
  doc["version"] = MedoidModel::kFormatVersion;
  doc["learner_variant"] = to_string(model.variant);
  doc["instance_space_id"] = model.instance_space_id;
  doc["label_space_id"] = model.label_space_id;
  doc["selected_gamma"] = scale_to_json(model.selected_gamma);
  doc["alpha_star"] = model.alpha_star;
  doc["q_star"] = model.q_star;
  doc["n_train"] = model.n_train;
  json sched;
  sched["delta"] = model.schedule.delta;
  sched["bits"] = model.schedule.bits;
  sched["L"] = model.schedule.L;
  sched["L_trunc"] = model.schedule.L_trunc ? json(*model.schedule.L_trunc) : json(nullptr);
  sched["eps"] = model.schedule.eps ? json(*model.schedule.eps) : json(nullptr);
  doc["schedules_used"] = std::move(sched);
  json points = json::array();
  for (const auto& [x, y] : model.net_points) {
    points.push_back({{"x", element_to_json(*model.instance_space, x)},
                      {"y", element_to_json(*model.label_space, y)}});
  }
  doc["net_points"] = std::move(points);
  return doc.dump(2) + "\n";
}

MedoidModel deserialize_model(std::string_view text, SpaceHandle instance_space,
                              SpaceHandle label_space) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "medoidnet-model") throw FormatError("model: not a medoidnet model");
    if (!doc.contains("version")) throw FormatError("model: missing version");
    if (doc.at("version").get<int>() != MedoidModel::kFormatVersion) {
      throw FormatError("model: unsupported version " + doc.at("version").dump());
    }
    MedoidModel m;
    m.variant = parse_learner_variant(doc.at("learner_variant").get<std::string>());
    m.instance_space_id = doc.at("instance_space_id").get<std::string>();
    m.label_space_id = doc.at("label_space_id").get<std::string>();
    m.instance_space = instance_space ? instance_space : make_space(m.instance_space_id);
    m.label_space = label_space ? label_space : make_space(m.label_space_id);
    if (m.instance_space->id() != m.instance_space_id || m.label_space->id() != m.label_space_id) {
      throw FormatError("model: space ids do not match the supplied spaces");
    }
    m.selected_gamma = scale_from_json(doc.at("selected_gamma"));
    m.alpha_star = doc.at("alpha_star").get<double>();
    m.q_star = doc.at("q_star").get<double>();
    m.n_train = doc.at("n_train").get<std::uint64_t>();
    const auto& s = doc.at("schedules_used");
    m.schedule.delta = s.at("delta").get<double>();
    m.schedule.bits = s.at("bits").get<std::uint64_t>();
    m.schedule.L = s.at("L").get<double>();
    if (!s.at("L_trunc").is_null()) m.schedule.L_trunc = s.at("L_trunc").get<double>();
    if (!s.at("eps").is_null()) m.schedule.eps = s.at("eps").get<double>();
    for (const auto& p : doc.at("net_points")) {
      m.net_points.emplace_back(element_from_json(*m.instance_space, p.at("x")),
                                element_from_json(*m.label_space, p.at("y")));
    }
    if (m.net_points.empty()) throw FormatError("model: no net points");
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

}  // namespace medoidnet
