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

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "semifax/baselines.hpp"
#include "semifax/copula.hpp"
#include "semifax/logistic.hpp"

using namespace semifax;

namespace {

// One split at `threshold` on feature 0: left is class 0, right class 1.
TreeEnsemble stump(double threshold, std::size_t dim = 1) {
  DecisionTree t;
  TreeNode root;
  root.feature = 0;
  root.threshold = threshold;
  root.left = 1;
  root.right = 2;
  TreeNode left;
  left.counts = {1.0, 0.0};
  TreeNode right;
  right.counts = {0.0, 1.0};
  t.nodes = {root, left, right};
  return TreeEnsemble({t}, dim, ForestParams{});
}

struct Loan {
  Dataset train;
  TreeEnsemble forest;
  CopulaModel copula;
  Loan() {
    train = split(gen_loan_scenario(3, 600), {.seed = 3, .test_fraction = 0.2}).first;
    ForestParams fp;
    fp.seed = 3;
    fp.n_trees = 40;
    forest = fit_forest(train, fp);
    copula = fit_copula(train);
  }
};

const Loan& loan() {
  static const Loan l;
  return l;
}

EvaluationScores scores(double dist, double sp, double pl, double tr) {
  EvaluationScores s;
  s.distance = dist;
  s.sparsity = sp;
  s.plausibility = pl;
  s.trustworthiness = tr;
  return s;
}

BaselineResult of(Method m) {
  BaselineResult r;
  r.method = m;
  return r;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::mdn, Method::kleor, Method::local_region, Method::dser}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK_FALSE(method_from_string("piece").has_value());
}

TEST_CASE("semi-factual scoring") {
  CHECK(sfs_score(2, 3, 4.0, 4.0) == doctest::Approx(2.0 / 3.0 + 1.0).epsilon(1e-15));
  CHECK(sfs_score(2, 3, 4.0, 4.0) == doctest::Approx(1.667).epsilon(1e-3));
  CHECK(sfs_score(3, 3, 0.0, 0.0) == 1.0);
  CHECK_THROWS_AS(sfs_score(0, 0, 1.0, 1.0), ValidationError);
}

TEST_CASE("mdn picks the farthest in-class row on a feature") {
  // q = 0.1; class-0 rows at 0.2, 0.3, 0.3 (duplicate), class-1 rows beyond 0.5
  const auto train = fixtures::make_dataset({{0.2}, {0.3}, {0.3}, {0.7}, {0.8}, {0.9}}, {0, 0, 0, 1, 1, 1});
  const auto m = stump(0.5);
  const auto r = mdn(std::vector<double>{0.1}, train, m);
  CHECK(r.method == Method::mdn);
  CHECK(r.x_sf == Vector{0.3});
  CHECK(r.diagnostics.at("row") == "1");
  CHECK(m.predict(r.x_sf) == 0);
}

TEST_CASE("mdn results stay in class on the loan data") {
  const auto& l = loan();
  for (std::size_t i = 0; i < 20; ++i) {
    const auto q = l.train.rows.row(i * 7);
    const auto r = mdn(q, l.train, l.forest);
    CHECK(l.forest.predict(r.x_sf) == l.forest.predict(q));
  }
}

TEST_CASE("kleor prefers the candidate closer to the unlike neighbor") {
  // Rows labelled 0 at 0.65 and 0.7 sit on the class-1 side of the model, so
  // they vote but are not candidates. The NUN is 0.9.
  const auto train = fixtures::make_dataset({{0.2}, {0.6}, {0.65}, {0.7}, {0.9}, {0.95}, {1.0}},
                                            {0, 0, 0, 0, 1, 1, 1});
  const auto m = stump(0.64);
  const auto r = kleor_attr_sim(std::vector<double>{0.1}, train, m, 3);
  CHECK(r.diagnostics.at("nun_row") == "4");
  CHECK(r.x_sf == Vector{0.6});
  // -|0.6 - 0.9| + 1 feature closer to q than the NUN
  CHECK(r.score == doctest::Approx(-0.3 + 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kleor_attr_sim(std::vector<double>{0.1}, fixtures::make_dataset({{0.2}, {0.3}}, {0, 0}), m),
                  ValidationError);
}

TEST_CASE("kleor results are in-class training rows") {
  const auto& l = loan();
  for (std::size_t i = 0; i < 10; ++i) {
    const auto q = l.train.rows.row(i * 13);
    const auto r = kleor_attr_sim(q, l.train, l.forest);
    CHECK(l.forest.predict(r.x_sf) == l.forest.predict(q));
    const auto row = std::stoul(r.diagnostics.at("row"));
    CHECK(Vector(l.train.rows.row(row).begin(), l.train.rows.row(row).end()) == r.x_sf);
  }
}

TEST_CASE("local region warns when a class is short") {
  const auto& l = loan();
  const auto q = l.train.rows.row(0);
  const auto r = local_region(q, l.train, l.forest, 400);
  CHECK(r.diagnostics.count("warning") == 1);
  CHECK(l.forest.predict(r.x_sf) == l.forest.predict(q));
  const auto ok = local_region(q, l.train, l.forest, 50);
  CHECK(ok.diagnostics.count("warning") == 0);
  CHECK(ok.diagnostics.at("region_size") == "100");
}

TEST_CASE("local region returns the most marginal in-class row") {
  const auto& l = loan();
  const std::size_t per_class = 60;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto q = l.train.rows.row(i * 31);
    const int cls = l.forest.predict(q);
    const auto r = local_region(q, l.train, l.forest, per_class);
    if (r.diagnostics.count("fallback")) continue;
    // oracle: rebuild the region and scan it
    std::vector<std::pair<double, std::size_t>> by[2];
    for (std::size_t k = 0; k < l.train.size(); ++k) {
      by[l.train.labels[k]].emplace_back(euclidean(q, l.train.rows.row(k)), k);
    }
    std::vector<std::size_t> region;
    for (auto& b : by) {
      std::sort(b.begin(), b.end());
      for (std::size_t t = 0; t < std::min(per_class, b.size()); ++t) region.push_back(b[t].second);
    }
    std::sort(region.begin(), region.end());
    Matrix rows(0, 2);
    std::vector<int> labels;
    for (std::size_t k : region) {
      rows.push_row(l.train.rows.row(k));
      labels.push_back(l.train.labels[k]);
    }
    const auto lr = fit_logistic(rows, labels, 1e-3, 500, 1.0);
    double best = kInf;
    for (std::size_t k : region) {
      if (l.forest.predict(l.train.rows.row(k)) != cls) continue;
      const double p1 = lr.probability(l.train.rows.row(k));
      const double p = cls == 1 ? p1 : 1 - p1;
      if (p >= 0.5) best = std::min(best, p);
    }
    CHECK(r.score == best);
    CHECK(r.score >= 0.5);
  }
}

TEST_CASE("dser loss terms") {
  DserConfig cfg;
  const Vector q{0.1, 0.2, 0.3, 0.4};
  const std::vector<bool> none(4, false);
  const auto same = dser_loss(0.1, 0.1, q, q, none, cfg);
  CHECK(same.similar == 0.0);
  CHECK(same.sparse == 0.0);
  CHECK(same.diverse == 0.0);

  const Vector three{0.5, 0.6, 0.7, 0.4};
  CHECK(dser_loss(0.1, 0.1, three, q, none, cfg).sparse == 1.0);
  const auto l = dser_loss(0.3, 0.2, three, q, none, cfg);
  CHECK(l.feasible == 0.0);
  CHECK(l.similar == doctest::Approx(-std::sqrt(3 * 0.16)).epsilon(1e-12));
  CHECK(dser_loss(0.5, 0.45, three, q, none, cfg).feasible == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(dser_loss(0.1, 0.3, three, q, none, cfg).feasible == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(dser_loss(0.1, 0.1, three, q, {true, false, true, true}, cfg).diverse == 2.0);
}

TEST_CASE("dser returns a deterministic in-class point") {
  const auto& l = loan();
  DserConfig cfg;
  cfg.moo.generations = 30;
  cfg.seed = 4;
  const auto q = l.train.rows.row(5);
  const auto a = dser(q, l.train, l.forest, l.copula, cfg);
  const auto b = dser(q, l.train, l.forest, l.copula, cfg);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->x_sf == b->x_sf);
  CHECK(l.forest.predict(a->x_sf) == l.forest.predict(q));
  CHECK(a->diagnostics.at("generated") == "true");
  CHECK(reject_score(l.forest, a->x_sf) >= 0.0);
}

TEST_CASE("ensemble_best") {
  CHECK(ensemble_best({of(Method::kleor)}, {scores(0.1, 1.0, 0.2, 1.0)}) == 0);
  const std::vector<BaselineResult> rs{of(Method::mdn), of(Method::kleor), of(Method::dser)};
  CHECK(ensemble_best(rs, {scores(0.1, 0.5, 0.3, 1.0), scores(0.9, 1.0, 0.0, 3.0), scores(0.2, 0.5, 0.2, 1.5)}) == 1);
  const auto s = scores(0.3, 0.5, 0.1, 2.0);
  CHECK(ensemble_best({of(Method::dser), of(Method::local_region), of(Method::kleor)}, {s, s, s}) == 2);
  CHECK(ensemble_best({of(Method::dser), of(Method::mdn)}, {s, s}) == 1);
  CHECK_THROWS_AS(ensemble_best({}, {}), ValidationError);

  auto r1 = s;
  auto r2 = s;
  r1.robustness = 5.0;
  r2.robustness = 0.1;
  CHECK(ensemble_best({of(Method::mdn), of(Method::kleor)}, {r1, r2}) == 0);
  CHECK(ensemble_best({of(Method::mdn), of(Method::kleor)}, {r1, r2}, true) == 1);
}
