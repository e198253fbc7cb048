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

#include <cmath>

#include "fixtures.hpp"
#include "semifax/copula.hpp"
#include "semifax/metrics.hpp"

using namespace semifax;

namespace {

std::vector<TrendResult> trends(std::initializer_list<double> taus) {
  std::vector<TrendResult> out;
  for (double t : taus) {
    TrendResult r;
    r.tau = t;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("distance") {
  const Vector q{0.1, 0.2, 0.3};
  CHECK(metric_distance(q, q) == 0.0);
  CHECK(metric_distance(q, Vector{1.1, 0.2, 0.3}) == doctest::Approx(1.0));
  CHECK(metric_distance(Vector{0.0, 0.0}, Vector{0.3, 0.4}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(metric_distance(q, Vector{0.1}), Error);
}

TEST_CASE("distance is a metric on random triples") {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    Vector a(4), b(4), c(4);
    for (std::size_t j = 0; j < 4; ++j) {
      a[j] = rng.uniform();
      b[j] = rng.uniform();
      c[j] = rng.uniform();
    }
    CHECK(metric_distance(a, c) <= metric_distance(a, b) + metric_distance(b, c) + 1e-12);
    CHECK(metric_distance(a, b) == metric_distance(b, a));
  }
}

TEST_CASE("sparsity") {
  const Vector q{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(metric_sparsity(q, Vector{0.9, 0.2, 0.3, 0.4, 0.5}) == 1.0);
  CHECK(metric_sparsity(q, Vector{0.9, 0.8, 0.7, 0.6, 0.5}) == 0.25);
  CHECK(metric_sparsity(q, Vector{0.1 + 1e-12, 0.2, 0.3, 0.4, 0.6}) == 1.0);
  CHECK_THROWS_AS(metric_sparsity(q, q), Error);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Vector x = q;
    std::size_t changed = 0;
    for (auto& v : x) {
      if (rng.uniform() < 0.5) {
        v += 0.1;
        ++changed;
      }
    }
    if (changed == 0) continue;
    CHECK(metric_sparsity(q, x) == 1.0 / static_cast<double>(changed));
  }
}

TEST_CASE("plausibility") {
  Matrix rows(0, 2);
  rows.push_row(Vector{0.0, 0.0});
  CHECK(metric_plausibility(Vector{0.3, 0.4}, rows) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(metric_plausibility(Vector{0.0, 0.0}, rows) == 0.0);
  rows.push_row(Vector{1.0, 0.0});
  CHECK(metric_plausibility(Vector{0.5, 0.0}, rows) == 0.5);
}

TEST_CASE("trustworthiness") {
  // class 0 at the origin, class 1 at (1, 0)
  const auto train = fixtures::make_dataset({{0.0, 0.0}, {1.0, 0.0}}, {0, 1});
  CHECK(metric_trustworthiness(Vector{0.5, 0.0}, train, 0) == 1.0);
  CHECK(metric_trustworthiness(Vector{1.0 / 3.0, 0.0}, train, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(metric_trustworthiness(Vector{0.0, 0.0}, train, 0) == kTrustCap);
  CHECK(metric_trustworthiness(Vector{0.0, 0.0}, train, 1) == 0.0);

  // leave-one-out skips the identical row
  const auto more = fixtures::make_dataset({{0.0, 0.0}, {0.2, 0.0}, {1.0, 0.0}}, {0, 0, 1});
  CHECK(metric_trustworthiness(Vector{0.0, 0.0}, more, 0, true) == doctest::Approx(5.0).epsilon(1e-12));

  Rng rng(5);
  const auto d = fixtures::random_dataset(80, 2, 6, [](const std::vector<double>& r) { return r[0] > 0.5; });
  for (int i = 0; i < 200; ++i) {
    const Vector x{rng.uniform(), rng.uniform()};
    double near[2] = {kInf, kInf};
    for (std::size_t k = 0; k < d.size(); ++k) {
      near[d.labels[k]] = std::min(near[d.labels[k]], euclidean(x, d.rows.row(k)));
    }
    const double t = metric_trustworthiness(x, d, 1);
    CHECK((t > 1.0) == (near[1] < near[0]));
  }
}

TEST_CASE("robustness") {
  const Vector q{0.4, 0.6};
  const Explainer constant = [](std::span<const double>) { return std::optional<Vector>(Vector{0.2, 0.2}); };
  CHECK(metric_robustness(constant, q, 0.05, 10, 1).value == 0.0);
  const Explainer identity = [](std::span<const double> x) { return std::optional<Vector>(Vector(x.begin(), x.end())); };
  const auto r = metric_robustness(identity, q, 0.05, 10, 1);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.evaluated == 10);
  CHECK_THROWS_AS(metric_robustness(identity, q, 0.05, 0, 1), ValidationError);

  int calls = 0;
  const Explainer flaky = [&calls](std::span<const double> x) -> std::optional<Vector> {
    if (++calls % 2 == 0) return std::nullopt;
    return Vector(x.begin(), x.end());
  };
  const auto f = metric_robustness(flaky, q, 0.05, 10, 1);
  CHECK(f.skipped > 0);
  CHECK(f.evaluated + f.skipped == 10);
}

TEST_CASE("seesaw verdict thresholds") {
  const auto yes = seesaw_from_trends(trends({-0.5, 0.6, 0.1}), 0);
  CHECK(yes.has_seesaw);
  CHECK(yes.hidden_index == 1);
  CHECK(yes.tau_best_hidden == 0.6);
  CHECK_FALSE(seesaw_from_trends(trends({-0.1, 0.9}), 0).has_seesaw);
  CHECK_FALSE(seesaw_from_trends(trends({-0.9, 0.0, -0.2}), 0).has_seesaw);
  CHECK(seesaw_from_trends(trends({0.3, -0.3}), 1).has_seesaw);
  // lowest index on ties
  CHECK(seesaw_from_trends(trends({0.5, 0.5, -0.8}), 2).hidden_index == 0);
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const double a = rng.uniform(-1, 1);
    const double b = rng.uniform(-1, 1);
    const auto v = seesaw_from_trends(trends({a, b}), 0);
    CHECK(v.has_seesaw == (a <= -0.3 && b >= 0.3));
  }
}

TEST_CASE("audit on a trained model") {
  const auto train = split(gen_loan_scenario(7, 800), {.seed = 7, .test_fraction = 0.2}).first;
  ForestParams fp;
  fp.seed = 7;
  fp.n_trees = 30;
  const auto forest = fit_forest(train, fp);
  const auto copula = fit_copula(train);
  const auto bg = sample_background(train.rows, 32, 7);
  const ExplainContext ctx{forest, copula, bg, train};
  const auto s = train.schema;
  const Vector q{s[0].encode(20), s[1].encode(550)};
  const Vector x{s[0].encode(60), s[1].encode(560)};
  REQUIRE(forest.predict(q) == forest.predict(x));
  const auto v = audit_seesaw(q, x, ctx);
  CHECK(v.key_index == 0);
  CHECK(v.hidden_index == 1);
  CHECK(v.has_seesaw == (v.tau_key <= -0.3 && v.tau_best_hidden >= 0.3));
  CHECK_THROWS_AS(audit_seesaw(q, Vector{s[0].encode(95), s[1].encode(320)}, ctx), ValidationError);

  const auto scored = score_semifactual(q, x, train, forest.predict(q));
  CHECK(scored.sparsity == 0.5);
  CHECK(scored.distance == doctest::Approx(metric_distance(q, x)));
  CHECK_FALSE(scored.robustness_computed);
}
