#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "medoidnet/cli.hpp"
#include "medoidnet/learners.hpp"

using namespace medoidnet;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("medoidnet_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train on a single row") {
  TempDir t;
  const auto data = t.file("one.csv", "x_0,y\n0.5,kite\n");
  const auto model = t.path("m.json");
  const auto r = run({"train", "--dataset", data, "--out", model});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["alpha_star"] == 0.0);
  CHECK(j["d"] == 1);
  const auto q = t.file("q.csv", "x_0\n-4\n9\n");
  const auto p = run({"predict", "--model", model, "--dataset", q});
  REQUIRE(p.code == 0);
  CHECK(p.out == "y\nkite\nkite\n");

  // Real labels: the label survives truncation and the label net once the
  // schedules are fixed wide enough.
  const auto real = t.file("real.csv", "x_0,y\n0.5,3.25\n");
  const auto r2 = run({"train", "--dataset", real, "--out", model, "--ltrunc", "10", "--bits", "8",
                       "--eps", "0.25"});
  REQUIRE(r2.code == 0);
  CHECK(nlohmann::json::parse(r2.out)["alpha_star"] == 0.0);
  CHECK(run({"predict", "--model", model, "--dataset", q}).out == "y\n3.25\n3.25\n");
}

TEST_CASE("train on singleton4 data gives o") {
  TempDir t;
  std::string csv = "x_id,y\n";
  for (const char* y : {"a", "b", "c", "a", "b", "c", "a", "b", "c"}) csv += std::string("x,") + y + "\n";
  const auto data = t.file("s4.csv", csv);
  const auto model = t.path("m.json");
  const auto r = run({"train", "--dataset", data, "--learner", "fin", "--instance-space", "singleton",
                      "--label-space", "fourpoint", "--out", model});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["d"] == 1);
  const auto p = run({"predict", "--model", model, "--dataset", t.file("x.csv", "x_id\nx\nx\n")});
  REQUIRE(p.code == 0);
  CHECK(p.out == "y\no\no\n");
}

TEST_CASE("train error paths") {
  TempDir t;
  const auto missing = t.path("absent.csv");
  const auto r = run({"train", "--dataset", missing});
  CHECK(r.code == 2);
  CHECK(r.err.find(missing) != std::string::npos);

  CHECK(run({"train", "--dataset", t.file("empty.csv", "x_0,y\n")}).code != 0);
  const auto bad = run({"train", "--dataset", t.file("bad.csv", "x_0,y\n1,2\nfoo,3\n")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find(":3:") != std::string::npos);
  CHECK(run({"train", "--dataset", t.file("w.csv", "x_0,y\n1,2,3\n")}).code == 2);
  CHECK(run({"train"}).code == 1);
  CHECK(run({"train", "--distribution", "singleton4", "--n", "5"}).code == 1);
  CHECK(run({"train", "--learner", "magic", "--dataset", missing}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("train from a distribution is deterministic") {
  TempDir t;
  const auto model = t.path("m.json");
  const std::vector<std::string> args{"train", "--distribution", "finite_multiclass", "--n", "60",
                                      "--seed", "3", "--learner", "fin"};
  auto with_out = args;
  with_out.insert(with_out.end(), {"--out", model});
  const auto r = run(with_out);
  REQUIRE(r.code == 0);
  CHECK(run(args).out == r.out);
  const auto m = deserialize_model(slurp(model));
  CHECK(m.n_train == 60);
  CHECK(m.alpha_star == nlohmann::json::parse(r.out)["alpha_star"].get<double>());
}

TEST_CASE("predict reproduces alpha* on the training data") {
  TempDir t;
  std::string csv = "x_0,y\n";
  const double xs[] = {0.0, 0.1, 0.2, 1.0, 1.1, 1.2, 3.0, 3.2};
  const char* ys[] = {"u", "u", "v", "v", "v", "u", "w", "w"};
  for (int i = 0; i < 8; ++i) csv += std::to_string(xs[i]) + "," + ys[i] + "\n";
  const auto data = t.file("d.csv", csv);
  const auto model = t.path("m.json");
  const auto r = run({"train", "--dataset", data, "--out", model});
  REQUIRE(r.code == 0);
  const double alpha = nlohmann::json::parse(r.out)["alpha_star"];
  const auto p = run({"predict", "--model", model, "--dataset", data});
  REQUIRE(p.code == 0);
  std::istringstream in(p.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "y");
  int wrong = 0;
  for (int i = 0; i < 8; ++i) {
    REQUIRE(std::getline(in, line));
    wrong += line != ys[i];
  }
  CHECK(wrong / 8.0 == doctest::Approx(alpha).epsilon(1e-12));

  const auto empty = run({"predict", "--model", model, "--dataset", t.file("e.csv", "")});
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());
  CHECK(run({"predict", "--model", model, "--dataset", t.file("s.csv", "x_id\nq\n")}).code != 0);
  CHECK(run({"predict", "--model", model, "--dataset", t.file("two.csv", "x_0,x_1\n1,2\n")}).code != 0);
  CHECK(run({"predict", "--model", model, "--dataset", data, "--instance-space", "l2-2"}).code != 0);
  const auto out_path = t.path("pred.csv");
  CHECK(run({"predict", "--model", model, "--dataset", data, "--out", out_path}).code == 0);
  CHECK(slurp(out_path) == p.out);
}

TEST_CASE("experiment command") {
  TempDir t;
  const auto r = run({"experiment", "--distribution", "singleton4", "--learner", "fin", "--n-grid", "9",
                      "--trials", "1", "--seed", "17"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  CHECK(r.err.find("n=9 trials=1 median_risk=") != std::string::npos);

  const std::vector<std::string> args{"experiment", "--distribution", "finite_multiclass", "--learner",
                                      "fin", "--n-grid", "10,30", "--trials", "3", "--seed", "5"};
  auto a1 = args, a2 = args;
  a1.insert(a1.end(), {"--out", t.path("a.csv"), "--threads", "1"});
  a2.insert(a2.end(), {"--out", t.path("b.csv"), "--threads", "4"});
  REQUIRE(run(a1).code == 0);
  REQUIRE(run(a2).code == 0);
  CHECK(slurp(t.path("a.csv")) == slurp(t.path("b.csv")));
  CHECK(slurp(t.path("a.csv")).size() > 100);

  const auto zero = run({"experiment", "--distribution", "singleton4", "--learner", "fin", "--n-grid", "9",
                         "--trials", "0", "--seed", "1"});
  CHECK(zero.code == 0);
  CHECK(zero.out ==
        "n,trial,learner,estimated_risk,risk_method,half_width,alpha_star,q_star,selected_gamma,d\n");

  const auto bad_dist = run({"experiment", "--distribution", "nope", "--n-grid", "9", "--seed", "1"});
  CHECK(bad_dist.code != 0);
  CHECK(bad_dist.err.find("lipschitz_identity") != std::string::npos);
  const auto bad_learner = run({"experiment", "--distribution", "singleton4", "--learner", "svm",
                                "--n-grid", "9", "--seed", "1"});
  CHECK(bad_learner.code != 0);
  CHECK(bad_learner.err.find("knn1") != std::string::npos);
  CHECK(run({"experiment", "--distribution", "singleton4", "--n-grid", "9"}).code != 0);

  const auto jl = t.path("r.jsonl");
  REQUIRE(run({"experiment", "--distribution", "singleton4", "--learner", "knn", "--n-grid", "9",
               "--seed", "2", "--jsonl", jl, "--out", t.path("c.csv")})
              .code == 0);
  CHECK(slurp(jl).find("\"wall_time\"") != std::string::npos);
}

TEST_CASE("bound command") {
  const double delta = 4 * std::exp(2.0) * std::exp(-4.0);
  char d[64];
  std::snprintf(d, sizeof d, "%.17g", delta);
  const auto q = run({"bound", "--bound-mode", "q", "--n", "100", "--alpha", "0", "--k", "0", "--b", "0",
                      "--L", "0", "--delta", d});
  REQUIRE(q.code == 0);
  CHECK(q.out == "0.400000000000\n");

  const auto h = run({"bound", "--bound-mode", "hoeffding", "--n", "10", "--k", "5"});
  CHECK(h.code != 0);
  CHECK(h.err.find("requires n > 2k") != std::string::npos);
  CHECK(run({"bound", "--delta", "0"}).code != 0);
  CHECK(run({"bound", "--delta", "1.5"}).code != 0);
  CHECK(run({"bound", "--bound-mode", "tight"}).code != 0);

  const std::vector<std::string> p{"--n", "1000", "--alpha", "0.2", "--k", "7", "--b", "4", "--L", "2"};
  auto qa = std::vector<std::string>{"bound", "--bound-mode", "q"};
  auto fa = std::vector<std::string>{"bound", "--bound-mode", "final"};
  qa.insert(qa.end(), p.begin(), p.end());
  fa.insert(fa.end(), p.begin(), p.end());
  const auto qv = std::stod(run(qa).out);
  const auto fv = std::stod(run(fa).out);
  CHECK(fv + 0.2 == doctest::Approx(qv).epsilon(1e-11));
}

TEST_CASE("config file with flag precedence") {
  TempDir t;
  const auto cfg = t.file("run.cfg",
                          "# bound run\ncommand = bound\nbound-mode = q\nn = 100\nalpha = 0\nk = 0\n"
                          "b = 0\nL = 0\ndelta = 0.5\n");
  const auto a = run({"--config", cfg});
  REQUIRE(a.code == 0);
  const auto b = run({"--config", cfg, "--n", "400"});
  REQUIRE(b.code == 0);
  CHECK(std::stod(b.out) < std::stod(a.out));
  const auto c = run({"bound", "--n", "400", "--config", cfg});
  CHECK(c.out == b.out);
  CHECK(run({"--config", t.path("missing.cfg")}).code == 2);
  CHECK(run({"--config", t.file("bad.cfg", "no equals sign\n")}).code == 2);
}

TEST_CASE("net-dump") {
  TempDir t;
  const auto data = t.file("d.csv", "x_0,y\n0,1\n0.5,1\n2,1\n2.4,1\n");
  const auto r = run({"net-dump", "--dataset", data, "--gamma", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "index,x,center,is_center\n0,0,0,1\n1,0.5,0,0\n2,2,2,1\n3,2.4,2,0\n");
  const auto all = run({"net-dump", "--dataset", data});
  REQUIRE(all.code == 0);
  CHECK(all.out == "index,x,center,is_center\n0,0,0,1\n1,0.5,0,0\n2,2,0,0\n3,2.4,0,0\n");
  CHECK(run({"net-dump", "--dataset", data, "--gamma", "0"}).code == 1);
  CHECK(run({"net-dump", "--dataset", data, "--gamma", "abc"}).code == 2);
}

TEST_CASE("validate-space") {
  TempDir t;
  const auto ok = run({"validate-space", "--space", "fourpoint"});
  REQUIRE(ok.code == 0);
  CHECK(nlohmann::json::parse(ok.out)["valid"] == true);
  CHECK(run({"validate-space", "--space", "l2-3", "--seed", "4"}).code == 0);
  CHECK(run({"validate-space", "--space", "real"}).code == 1);
  const auto probes = t.file("p.txt", "0\n1.5\n-2\n");
  CHECK(run({"validate-space", "--space", "real", "--probes", probes}).code == 0);
  const auto loss = t.file("loss.csv", "name,p,q,r\np,0,1,5\nq,1,0,1\nr,5,1,0\n");
  const auto broken = run({"validate-space", "--space", "csv:" + loss});
  CHECK(broken.code == 1);
  CHECK(nlohmann::json::parse(broken.out)["violations"][0]["kind"] == "triangle");
}

TEST_CASE("threads from the environment") {
  ::setenv("MEDOIDNET_THREADS", "2", 1);
  CHECK(run({"bound", "--n", "50"}).code == 0);
  ::setenv("MEDOIDNET_THREADS", "zero", 1);
  CHECK(run({"bound", "--n", "50"}).code == 2);
  ::unsetenv("MEDOIDNET_THREADS");
  CHECK(run({"bound", "--n", "50", "--threads", "0"}).code == 1);
}

}  // TEST_SUITE
