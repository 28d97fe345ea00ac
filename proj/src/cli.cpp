#include "medoidnet/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "medoidnet/dataset.hpp"
#include "medoidnet/errors.hpp"
#include "medoidnet/harness.hpp"
#include "medoidnet/learners.hpp"
#include "medoidnet/net.hpp"
#include "text.hpp"

namespace medoidnet {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands{"train",      "predict",  "experiment",
                                         "bound",      "net-dump", "validate-space"};

struct Options {
  std::string dataset;
  std::string distribution;
  std::string learner;
  std::optional<double> delta;
  std::optional<std::uint64_t> bits;
  std::optional<double> ltrunc;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  std::vector<std::uint64_t> n_grid;
  std::uint64_t trials = 1;
  std::string bound_mode = "q";
  std::string instance_space;
  std::string label_space;
  std::string model;
  std::string jsonl;
  std::uint64_t mc_draws = 100000;
  std::vector<std::string> params;
  // bound
  double n = 1.0;
  double alpha = 0.0;
  double k = 0.0;
  double b = 0.0;
  double L = 1.0;
  // net-dump, validate-space
  std::string gamma = "inf";
  std::string space;
  std::string probes;
  std::size_t probe_count = 12;
};

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(detail::trim(t.substr(0, eq)));
    if (key.starts_with("--")) key = key.substr(2);
    kv[key] = std::string(detail::trim(t.substr(eq + 1)));
  }
  return kv;
}

bool flag_given(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.starts_with(flag + "=");
  });
}

// Merges a --config file into the argument list; explicit flags win.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  auto kv = read_config(*path);
  const bool has_command = std::any_of(args.begin(), args.end(), [](const std::string& a) {
    return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
  });
  if (const auto it = kv.find("command"); it != kv.end()) {
    if (!has_command) args.insert(args.begin(), it->second);
    kv.erase(it);
  }
  for (const auto& [key, value] : kv) {
    if (flag_given(args, key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

int default_threads() {
  if (const char* env = std::getenv("MEDOIDNET_THREADS"); env && *env) {
    const auto v = detail::parse_double(env);
    if (!v || *v < 1 || *v != std::floor(*v)) {
      throw FormatError(std::string("MEDOIDNET_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(*v);
  }
  return omp_get_num_procs();
}

Schedules schedules_from(const Options& o) {
  Schedules s;
  s.fixed_delta = o.delta;
  s.fixed_bits = o.bits;
  s.fixed_L = o.ltrunc;
  s.fixed_eps = o.eps;
  return s;
}

DistributionParams params_from(const Options& o) {
  DistributionParams p;
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw FormatError("--param expects key=value, got '" + kv + "'");
    p[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return p;
}

json scale_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

double parse_scale(const std::string& text) {
  const auto v = detail::parse_double(detail::trim(text));
  if (!v) throw FormatError("cannot parse scale '" + text + "'");
  return *v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

MedoidModel train_model(const Options& o, const LabeledSample& sample, const SpaceHandle& X,
                        const SpaceHandle& Y) {
  const std::uint64_t n = sample.size();
  const Schedules S = schedules_from(o);
  std::string learner = o.learner;
  if (learner.empty()) learner = Y->cardinality() ? "fin" : "separable";
  switch (parse_learner_variant(learner)) {
    case LearnerVariant::fin: return fin_med_net(sample, S.delta(n), X, Y);
    case LearnerVariant::countable: return countable_med_net(sample, S.delta(n), S.bits(n), X, Y);
    case LearnerVariant::unbounded: return ctbl_unbdd(sample, S.delta(n), S.bits(n), S.L(n), X, Y);
    case LearnerVariant::separable: return medoid_net(sample, S, X, Y);
  }
  throw PreconditionError("unknown learner");
}

int cmd_train(const Options& o, std::ostream& out) {
  if (o.dataset.empty() == o.distribution.empty()) {
    throw PreconditionError("train needs exactly one of --dataset or --distribution");
  }
  LabeledSample sample;
  SpaceHandle X;
  SpaceHandle Y;
  if (!o.dataset.empty()) {
    const auto raw = read_dataset(o.dataset);
    if (raw.size() == 0) throw PreconditionError(o.dataset + ": dataset has no rows (n = 0)");
    X = o.instance_space.empty() ? infer_instance_space(raw) : make_space(o.instance_space);
    Y = o.label_space.empty() ? infer_label_space(raw) : make_space(o.label_space);
    sample = dataset_sample(raw, *X, *Y);
  } else {
    if (!o.seed) throw PreconditionError("train --distribution needs --seed");
    if (!(o.n >= 1.0) || o.n != std::floor(o.n)) throw PreconditionError("train --distribution needs --n >= 1");
    const auto dist = make_distribution(o.distribution, params_from(o));
    X = dist.instance_space;
    Y = dist.label_space;
    sample = dist.sample(*o.seed, static_cast<std::size_t>(o.n));
  }
  const MedoidModel m = train_model(o, sample, X, Y);
  if (!o.out.empty()) write_text(o.out, serialize_model(m) + "\n");
  json j;
  j["alpha_star"] = m.alpha_star;
  j["q_star"] = m.q_star;
  j["gamma"] = scale_json(m.selected_gamma);
  j["d"] = m.size();
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  if (o.model.empty() || o.dataset.empty()) throw PreconditionError("predict needs --model and --dataset");
  const MedoidModel m = deserialize_model(read_text(o.model));
  if (!o.instance_space.empty() && o.instance_space != m.instance_space_id) {
    throw PreconditionError("instance space '" + o.instance_space + "' does not match the model's '" +
                            m.instance_space_id + "'");
  }
  const auto raw = read_dataset(o.dataset);
  std::ostringstream text;
  if (!raw.empty_file) {
    const auto xs = dataset_instances(raw, *m.instance_space);
    text << "y\n";
    for (const auto& x : xs) text << m.label_space->format(m.predict(x)) << '\n';
  }
  if (o.out.empty()) {
    out << text.str();
  } else {
    write_text(o.out, text.str());
  }
  return kExitOk;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.distribution.empty()) throw PreconditionError("experiment needs --distribution");
  if (!o.dataset.empty()) throw PreconditionError("experiment takes --distribution, not --dataset");
  if (!o.seed) throw PreconditionError("experiment needs --seed");
  const auto dist = make_distribution(o.distribution, params_from(o));
  ExperimentOptions eo;
  eo.schedules = schedules_from(o);
  eo.mc_draws = o.mc_draws;
  const std::string learner = o.learner.empty() ? "separable" : o.learner;
  const auto result = convergence_experiment(learner, dist, o.n_grid, o.trials, *o.seed, eo);
  std::ostringstream csv;
  write_csv(result, csv);
  if (o.out.empty()) {
    out << csv.str();
  } else {
    write_text(o.out, csv.str());
  }
  if (!o.jsonl.empty()) {
    std::ostringstream jl;
    write_json_lines(result, jl);
    write_text(o.jsonl, jl.str());
  }
  std::ostream& summary = o.out.empty() ? err : out;
  for (const auto n : o.n_grid) {
    std::vector<double> risks;
    for (const auto& r : result.rows) {
      if (r.n == n) risks.push_back(r.estimated_risk);
    }
    if (risks.empty()) continue;
    std::sort(risks.begin(), risks.end());
    const std::size_t h = risks.size() / 2;
    const double median = risks.size() % 2 ? risks[h] : 0.5 * (risks[h - 1] + risks[h]);
    summary << "n=" << n << " trials=" << risks.size() << " median_risk=" << detail::format_double(median)
            << '\n';
  }
  return kExitOk;
}

int cmd_bound(const Options& o, std::ostream& out) {
  BoundParams p;
  p.n = o.n;
  p.alpha = o.alpha;
  p.k = o.k;
  p.b = o.b;
  p.delta = o.delta.value_or(0.05);
  p.L = o.L;
  const double v = o.bound_mode == "q" ? q_bound(p)
                                       : compression_deviation_bound(p, parse_deviation_mode(o.bound_mode));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.12g", v);
  out << buf << '\n';
  return kExitOk;
}

int cmd_net_dump(const Options& o, std::ostream& out) {
  if (o.dataset.empty()) throw PreconditionError("net-dump needs --dataset");
  const auto raw = read_dataset(o.dataset);
  const auto X = o.instance_space.empty() ? infer_instance_space(raw) : make_space(o.instance_space);
  const auto xs = dataset_instances(raw, *X);
  const double gamma = parse_scale(o.gamma);
  if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
  const auto net = build_gamma_net(xs, gamma, *X);
  const auto cells = assign_voronoi(xs, net, *X);
  std::ostringstream text;
  text << "index,x,center,is_center\n";
  std::vector<bool> is_center(xs.size(), false);
  for (const auto c : net.center_indices) is_center[c] = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    text << i << ',' << X->format(xs[i]) << ',' << net.center_indices[cells.cell_of[i]] << ','
         << (is_center[i] ? 1 : 0) << '\n';
  }
  if (o.out.empty()) {
    out << text.str();
  } else {
    write_text(o.out, text.str());
  }
  return kExitOk;
}

int cmd_validate_space(const Options& o, std::ostream& out) {
  const std::string id = o.space.empty() ? o.instance_space : o.space;
  if (id.empty()) throw PreconditionError("validate-space needs --space");
  const auto S = make_space(id);
  std::vector<Element> probes;
  if (!o.probes.empty()) {
    std::ifstream in(o.probes);
    if (!in) throw IoError("cannot open probes '" + o.probes + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = detail::trim(line);
      if (t.empty()) continue;
      try {
        probes.push_back(S->parse(t));
      } catch (const InvalidElement& e) {
        throw FormatError(o.probes + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  } else if (const auto card = S->cardinality(); card && *card <= 256) {
    probes = S->first_elements(*card);
  } else {
    if (!o.seed) throw PreconditionError("random probes need --seed (or pass --probes)");
    Rng rng(*o.seed);
    for (std::size_t i = 0; i < o.probe_count; ++i) {
      if (S->symbolic()) {
        probes.push_back(S->first_elements(*S->cardinality())[rng.below(*S->cardinality())]);
      } else {
        std::vector<double> c(S->dimension());
        for (auto& v : c) v = 2.0 * rng.uniform() - 1.0;
        probes.emplace_back(std::move(c));
      }
    }
  }
  const auto report = validate_metric_axioms(*S, probes);
  json j;
  j["space"] = S->id();
  j["probes"] = probes.size();
  j["valid"] = report.violations.empty();
  j["violations"] = json::array();
  for (const auto& v : report.violations) {
    j["violations"].push_back({{"kind", to_string(v.kind)}, {"probes", v.probes}, {"detail", v.detail}});
  }
  out << j.dump() << '\n';
  return report.violations.empty() ? kExitOk : kExitDomain;
}

void add_schedule_flags(CLI::App* c, Options& o) {
  c->add_option("--delta", o.delta, "confidence parameter delta (fixes the schedule)");
  c->add_option("--bits", o.bits, "side-information bits b (fixes the schedule)");
  c->add_option("--ltrunc", o.ltrunc, "label truncation radius L (fixes the schedule)");
  c->add_option("--eps", o.eps, "label net scale eps (fixes the schedule)");
}

void add_common_flags(CLI::App* c, Options& o) {
  c->add_option("--threads", o.threads, "worker threads (default: MEDOIDNET_THREADS or all cores)");
  c->add_option("--out", o.out, "output path");
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  auto args = apply_config(raw_args);
  Options o;
  o.threads = default_threads();

  CLI::App app{"metric-valued regression with medoid-relabeled nets", "medoidnet"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; command-line flags win");

  auto* train = app.add_subcommand("train", "fit a model and print alpha*, Q*, gamma*, d");
  train->add_option("--dataset", o.dataset, "training CSV");
  train->add_option("--distribution", o.distribution, "sample from a synthetic distribution instead");
  train->add_option("--n", o.n, "sample size for --distribution");
  train->add_option("--seed", o.seed, "seed for --distribution");
  train->add_option("--param", o.params, "distribution parameter key=value");
  train->add_option("--learner", o.learner)->check(CLI::IsMember({"fin", "countable", "unbounded", "separable"}));
  train->add_option("--instance-space", o.instance_space, "instance space id");
  train->add_option("--label-space", o.label_space, "label space id");
  add_schedule_flags(train, o);
  add_common_flags(train, o);

  auto* predict = app.add_subcommand("predict", "predict one label per dataset row");
  predict->add_option("--model", o.model, "model JSON")->required();
  predict->add_option("--dataset", o.dataset, "instances CSV (y column optional)")->required();
  predict->add_option("--instance-space", o.instance_space, "expected instance space id");
  add_common_flags(predict, o);

  auto* experiment = app.add_subcommand("experiment", "run a convergence experiment, write CSV");
  experiment->add_option("--distribution", o.distribution)->required();
  experiment->add_option("--dataset", o.dataset);
  experiment->add_option("--learner", o.learner, "fin, countable, unbounded, separable, knn1, knn");
  experiment->add_option("--n-grid", o.n_grid, "comma-separated sample sizes")->delimiter(',');
  experiment->add_option("--trials", o.trials);
  experiment->add_option("--seed", o.seed);
  experiment->add_option("--param", o.params, "distribution parameter key=value");
  experiment->add_option("--mc-draws", o.mc_draws, "Monte Carlo draws per risk estimate");
  experiment->add_option("--jsonl", o.jsonl, "also write JSON lines (with wall time)");
  add_schedule_flags(experiment, o);
  add_common_flags(experiment, o);

  auto* bound = app.add_subcommand("bound", "evaluate a generalization bound");
  bound->add_option("--bound-mode", o.bound_mode)
      ->check(CLI::IsMember({"q", "hoeffding", "bernstein", "sample-dependent", "final"}));
  bound->add_option("--n", o.n);
  bound->add_option("--alpha", o.alpha);
  bound->add_option("--k", o.k);
  bound->add_option("--b", o.b);
  bound->add_option("--delta", o.delta);
  bound->add_option("--L", o.L);
  bound->add_option("--threads", o.threads);

  auto* dump = app.add_subcommand("net-dump", "write the gamma-net and Voronoi cells as CSV");
  dump->add_option("--dataset", o.dataset)->required();
  dump->add_option("--gamma", o.gamma, "scale (number or inf)");
  dump->add_option("--instance-space", o.instance_space);
  add_common_flags(dump, o);

  auto* validate = app.add_subcommand("validate-space", "check the metric axioms on probe points");
  validate->add_option("--space", o.space)->required();
  validate->add_option("--probes", o.probes, "file with one element per line");
  validate->add_option("--probe-count", o.probe_count);
  validate->add_option("--seed", o.seed);
  validate->add_option("--threads", o.threads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "medoidnet: " << e.what() << '\n';
    return kExitIo;
  }
  if (o.threads < 1) throw PreconditionError("--threads must be at least 1");
  omp_set_num_threads(o.threads);

  if (train->parsed()) return cmd_train(o, out);
  if (predict->parsed()) return cmd_predict(o, out);
  if (experiment->parsed()) return cmd_experiment(o, out, err);
  if (bound->parsed()) return cmd_bound(o, out);
  if (dump->parsed()) return cmd_net_dump(o, out);
  return cmd_validate_space(o, out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const FormatError& e) {
    err << "medoidnet: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    err << "medoidnet: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "medoidnet: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::logic_error& e) {
    err << "medoidnet: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "medoidnet: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace medoidnet
