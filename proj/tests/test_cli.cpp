/*
 * Copyright 2026 The Semifax Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semifax/artifact.hpp"
#include "semifax/metrics.hpp"
#include "semifax/rng.hpp"

using namespace semifax;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "semifax_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const std::string o = path("stdout_" + std::to_string(counter));
  const std::string e = path("stderr_" + std::to_string(counter++));
  const std::string cmd = env + " \"" SEMIFAX_BIN "\" " + args + " >\"" + o + "\" 2>\"" + e + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

// Loan data and a trained model shared by the tests.
const std::string& model() {
  static const std::string m = [] {
    REQUIRE(run("gen-loan --seed 7 --n 1000 --out " + path("loan.csv")).code == 0);
    const auto r = run("train --data " + path("loan.csv") + " --schema " + path("loan.schema.json") +
                       " --out " + path("model.json") + " --seed 7");
    REQUIRE(r.code == 0);
    return path("model.json");
  }();
  return m;
}

}  // namespace

TEST_CASE("train is deterministic and reports accuracy") {
  const auto& m = model();
  const auto again = run("train --data " + path("loan.csv") + " --schema " + path("loan.schema.json") +
                         " --out " + path("model2.json") + " --seed 7");
  REQUIRE(again.code == 0);
  CHECK(slurp(m) == slurp(path("model2.json")));
  const auto summary = json::parse(again.out);
  const double acc = summary.at("test_accuracy").get<double>();
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
}

TEST_CASE("missing schema exits 2 and names the path") {
  const auto r = run("train --data " + path("loan.csv") + " --schema " + path("nope.json") + " --out " +
                     path("x.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("nope.json") != std::string::npos);
}

TEST_CASE("explain echoes defaults and is byte-identical across runs and threads") {
  const std::string args = "explain --model " + model() + " --query 20,550 --class-names reject,accept";
  const auto a = run(args + " --out " + path("e1.json"));
  const auto b = run(args + " --out " + path("e2.json"), "SEMIFAX_THREADS=4");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(path("e1.json")) == slurp(path("e2.json")));

  const auto rep = json::parse(slurp(path("e1.json")));
  const auto& cfg = rep.at("config");
  CHECK(cfg.at("epsilon").get<double>() == -0.3);
  CHECK(cfg.at("theta").get<double>() == 1.5);
  CHECK(cfg.at("steps").get<int>() == 10);
  CHECK(cfg.at("moo").at("pop").get<int>() == 50);
  CHECK(cfg.at("moo").at("gens").get<int>() == 100);
  CHECK(rep.at("seed").get<int>() == 7);
  CHECK(rep.at("tool").at("version") == kVersion);
  CHECK(rep.at("model").contains("dataset_hash"));
  CHECK(rep.at("status") == "found");
  const auto& ex = rep.at("explanation");
  CHECK(ex.at("path").size() == 12);
  CHECK(ex.at("key_feature") == "loan_amount");
  CHECK(ex.at("hidden_feature") == "credit_score");
  CHECK(ex.at("x_sf").at("raw").contains("loan_amount"));
  CHECK(ex.at("sentence").get<std::string>().rfind("Even if loan_amount were ", 0) == 0);
  CHECK(ex.at("sentence").get<std::string>().find("accept") != std::string::npos);
  CHECK(rep.at("quality").is_null());
}

TEST_CASE("trend bands tag report quality") {
  const std::string base = "explain --model " + model() + " --query 20,550";
  const auto good = run(base + " --trend-band=-1:-0.8 --out " + path("good.json"));
  CHECK((good.code == 0 || good.code == 3));
  CHECK(json::parse(slurp(path("good.json"))).at("quality") == "good");
  const auto bad = run(base + " --trend-band=-0.6:-0.3 --out " + path("bad.json"));
  CHECK((bad.code == 0 || bad.code == 3));
  CHECK(json::parse(slurp(path("bad.json"))).at("quality") == "bad");
  const auto custom = run(base + " --trend-band=-0.9:-0.5 --out " + path("custom.json"));
  CHECK(json::parse(slurp(path("custom.json"))).at("quality") == "custom");
}

TEST_CASE("explain usage errors and the no-candidate exit") {
  CHECK(run("explain --model " + model() + " --query 120,550").code == 2);
  CHECK(run("explain --model " + model() + " --query 20").code == 2);
  CHECK(run("explain --model " + model() + " --query 20,550 --trend-band=0.2:0.5").code == 2);
  CHECK(run("explain --model " + path("missing.json") + " --query 20,550").code == 2);
  CHECK(run("explain --query 20,550").code == 2);
  // a band no key trend can land in
  const auto none = run("explain --model " + model() + " --query 20,550 --gens 5 --pop 10 --trend-band=-0.3001:-0.3 --out " +
                        path("none.json"));
  CHECK(none.code == 3);
  const auto rep = json::parse(slurp(path("none.json")));
  CHECK(rep.at("status") == "no_candidate");
  CHECK(rep.at("per_key").size() == 2);
}

TEST_CASE("bench tables") {
  const std::string base = "bench --model " + model() + " --data " + path("loan.csv") + " --schema " +
                           path("loan.schema.json");
  const auto r = run(base + " --methods isf --n-queries 3 --out-csv " + path("b.csv") + " --out-json " + path("b.json"));
  REQUIRE(r.code == 0);
  const auto j = json::parse(slurp(path("b.json")));
  CHECK(j.at("aggregates").size() == 1);
  const auto csv = slurp(path("b.csv"));
  CHECK(csv.rfind("level,query,method", 0) == 0);
  CHECK(csv.find("\nquery,") != std::string::npos);
  CHECK(csv.find("\naggregate,") != std::string::npos);

  const auto again = run(base + " --methods isf --n-queries 3 --out-csv " + path("b2.csv"), "SEMIFAX_THREADS=3");
  REQUIRE(again.code == 0);
  CHECK(slurp(path("b2.csv")) == csv);

  CHECK(run(base + " --methods isf,piece").code == 2);
  const auto big = run(base + " --methods mdn --n-queries 100000 --out-json " + path("big.json"));
  REQUIRE(big.code == 0);
  const auto bj = json::parse(slurp(path("big.json")));
  CHECK_FALSE(bj.at("warnings").empty());
  CHECK(bj.at("n_queries").get<int>() == 200);
}

TEST_CASE("audit percentages and invalid rows") {
  const auto art = load_artifact(model());
  const auto& s = art.schema();
  const ExplainContext ctx{art.forest, art.copula, art.background, art.train};
  // pick nine seesaw pairs and one without, judged in-process
  std::vector<std::pair<Vector, Vector>> yes, no;
  Rng rng(1);
  while (yes.size() < 9 || no.empty()) {
    const Vector q{rng.uniform(), rng.uniform()};
    const Vector x{std::clamp(q[0] + rng.uniform(-0.4, 0.4), 0.0, 1.0), std::clamp(q[1] + rng.uniform(-0.1, 0.1), 0.0, 1.0)};
    if (art.forest.predict(q) != art.forest.predict(x) || q == x) continue;
    const auto v = audit_seesaw(q, x, ctx);
    (v.has_seesaw ? yes : no).emplace_back(q, x);
  }
  auto row = [&](const Vector& q, const Vector& x) {
    std::ostringstream os;
    os.precision(17);
    os << s[0].decode(q[0]) << ',' << s[1].decode(q[1]) << ',' << s[0].decode(x[0]) << ',' << s[1].decode(x[1]) << '\n';
    return os.str();
  };
  std::string pairs = "q_loan_amount,q_credit_score,sf_loan_amount,sf_credit_score\n";
  for (std::size_t i = 0; i < 9; ++i) pairs += row(yes[i].first, yes[i].second);
  pairs += row(no[0].first, no[0].second);
  std::ofstream(path("pairs.csv")) << pairs;
  const auto r = run("audit --model " + model() + " --pairs " + path("pairs.csv") + " --out " + path("audit.csv"));
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("seesaw_pct") == "90.0");

  // an accepted query paired with a rejected point is flagged and excluded
  std::ofstream(path("pairs_bad.csv")) << pairs << "20,550,95,320\n";
  const auto bad = run("audit --model " + model() + " --pairs " + path("pairs_bad.csv") + " --out " + path("audit_bad.csv"));
  REQUIRE(bad.code == 0);
  const auto jb = json::parse(bad.out);
  CHECK(jb.at("invalid") == 1);
  CHECK(jb.at("seesaw_pct") == "90.0");
  CHECK(slurp(path("audit_bad.csv")).find("\n10,0,") != std::string::npos);

  std::ofstream(path("pairs_all.csv")) << "q_loan_amount,q_credit_score,sf_loan_amount,sf_credit_score\n"
                                       << row(yes[0].first, yes[0].second);
  CHECK(json::parse(run("audit --model " + model() + " --pairs " + path("pairs_all.csv")).out).at("seesaw_pct") == "100.0");

  std::ofstream(path("empty.csv")) << "";
  CHECK(run("audit --model " + model() + " --pairs " + path("empty.csv")).code == 2);
  std::ofstream(path("header_only.csv")) << "q_loan_amount,q_credit_score,sf_loan_amount,sf_credit_score\n";
  CHECK(run("audit --model " + model() + " --pairs " + path("header_only.csv")).code == 2);
}
