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
#include <numeric>

#include "fixtures.hpp"
#include "semifax/copula.hpp"

using namespace semifax;

namespace {

EmpiricalMarginal flat_marginal() {
  EmpiricalMarginal m;
  m.knots = {0.0, 1.0};
  m.cdf = {1.0 / 3.0, 2.0 / 3.0};
  m.u_floor = 1.0 / 3.0;
  return m;
}

CopulaModel bivariate(double rho, double mu = 0.0, double sigma = 1.0) {
  Matrix r(2, 2, rho);
  r(0, 0) = 1.0;
  r(1, 1) = 1.0;
  return CopulaModel::from_parts({flat_marginal(), flat_marginal()}, r, mu, sigma);
}

}  // namespace

TEST_CASE("independent features have near-zero correlation") {
  const auto d = fixtures::random_dataset(2000, 2, 17, [](const std::vector<double>& r) { return r[0] > 0.5; });
  const auto c = fit_copula(d);
  CHECK(std::abs(c.correlation()(0, 1)) < 0.1);
  CHECK(c.correlation()(0, 0) == 1.0);
  CHECK(c.correlation()(0, 1) == c.correlation()(1, 0));
}

TEST_CASE("comonotone pair is almost perfectly correlated") {
  Rng rng(3);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) {
    const double v = rng.uniform();
    rows.push_back({v, v});
    labels.push_back(i % 2);
  }
  const auto c = fit_copula(fixtures::make_dataset(rows, labels));
  CHECK(c.correlation()(0, 1) >= 0.99);
  CHECK(c.correlation()(0, 1) < 1.0);
  CHECK(std::isfinite(c.log_pdf(std::vector<double>{0.2, 0.8})));
}

TEST_CASE("one feature gives the 1x1 identity") {
  const auto d = fixtures::random_dataset(50, 1, 2, [](const std::vector<double>& r) { return r[0] > 0.5; });
  const auto c = fit_copula(d);
  CHECK(c.correlation().rows() == 1);
  CHECK(c.correlation()(0, 0) == 1.0);
  CHECK(c.log_copula_density(std::vector<double>{0.7}) == 0.0);
}

TEST_CASE("bivariate copula term at the median") {
  // -0.5 log(1 - rho^2) at z = 0
  const double expected = -0.5 * std::log(1.0 - 0.36);
  CHECK(expected == doctest::Approx(0.22314).epsilon(1e-4));
  CHECK(bivariate(0.6).log_copula_density(std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
  // closed form at an arbitrary point
  const double z1 = 0.7;
  const double z2 = -1.2;
  const double rho = 0.6;
  const double direct = -0.5 * std::log(1 - rho * rho) -
                        (rho * rho * (z1 * z1 + z2 * z2) - 2 * rho * z1 * z2) / (2 * (1 - rho * rho));
  CHECK(bivariate(0.6).log_copula_density(std::vector<double>{z1, z2}) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("independence copula contributes nothing") {
  const auto c = bivariate(0.0);
  for (double a : {-2.0, 0.0, 0.4}) {
    for (double b : {-1.0, 0.3, 2.5}) CHECK(c.log_copula_density(std::vector<double>{a, b}) == 0.0);
  }
  // log_pdf is then the sum of marginal log-densities
  const std::vector<double> x{0.3, 0.6};
  CHECK(c.log_pdf(x) == doctest::Approx(2 * std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("band edges and violation magnitudes") {
  const double mu = -1.7;
  const double sigma = 0.8;
  const auto c = bivariate(0.0, mu, sigma);
  const auto band = PlausibilityBand::from(c, 1.5);
  CHECK(band.delta == 1.5 * sigma);
  CHECK(band.low <= band.high);
  CHECK(band_violation(band, mu) == 0.0);
  CHECK(band_violation(band, mu + 1.6 * sigma) == doctest::Approx(0.1 * sigma).epsilon(1e-12));
  CHECK(band_violation(band, mu - 1.5 * sigma) == 0.0);
  CHECK(band_violation(band, mu + 1.5 * sigma) == 0.0);
  CHECK(band_violation(band, mu - 2.0 * sigma) == doctest::Approx(0.5 * sigma).epsilon(1e-12));
  CHECK_THROWS_AS(PlausibilityBand::from(c, 0.0), ValidationError);
}

TEST_CASE("most training rows fall inside the band") {
  const auto loan = gen_loan_scenario(7, 800);
  const auto d = fixtures::random_dataset(600, 4, 5, [](const std::vector<double>& r) { return r[0] > r[1]; });
  for (const Dataset* data : {&loan, &d}) {
    const auto c = fit_copula(*data);
    const auto band = PlausibilityBand::from(c, 1.5);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < data->size(); ++i) inside += g2_violation(c, band, data->rows.row(i)) == 0.0;
    CHECK(static_cast<double>(inside) / data->size() >= 0.8);
  }
}

TEST_CASE("log pdf is finite everywhere in the unit cube") {
  const auto d = gen_loan_scenario(1, 200);
  const auto c = fit_copula(d);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> x{rng.uniform(), rng.uniform()};
    CHECK(std::isfinite(c.log_pdf(x)));
  }
  CHECK(std::isfinite(c.log_pdf(std::vector<double>{0.0, 1.0})));
  CHECK(std::isfinite(c.log_pdf(std::vector<double>{1.0, 0.0})));
}

TEST_CASE("fit is invariant to row order") {
  const auto d = fixtures::random_dataset(120, 3, 9, [](const std::vector<double>& r) { return r[2] > 0.4; });
  std::vector<std::size_t> perm(d.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[40]);
  const auto a = fit_copula(d);
  const auto b = fit_copula(subset(d, perm));
  CHECK(a.log_pdf_mean() == b.log_pdf_mean());
  CHECK(a.log_pdf_std() == b.log_pdf_std());
  CHECK(a.correlation() == b.correlation());
}

TEST_CASE("fit errors") {
  const auto constant = fixtures::make_dataset({{0.5, 0.1}, {0.5, 0.2}, {0.5, 0.3}, {0.5, 0.4}}, {0, 1, 0, 1});
  try {
    fit_copula(constant);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("f0") != std::string::npos);
  }
  const auto tiny = fixtures::make_dataset({{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.9}}, {0, 1, 0});
  CHECK_THROWS_AS(fit_copula(tiny), ValidationError);
}

TEST_CASE("copula serializes losslessly") {
  const auto c = fit_copula(gen_loan_scenario(4, 150));
  const auto back = CopulaModel::from_json(c.to_json());
  CHECK(back.to_json().dump() == c.to_json().dump());
  CHECK(back.log_pdf(std::vector<double>{0.3, 0.3}) == c.log_pdf(std::vector<double>{0.3, 0.3}));
}

TEST_CASE("normal quantile") {
  CHECK(standard_normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(standard_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
}
