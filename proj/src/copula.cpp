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

#include "semifax/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

namespace semifax {

double standard_normal_quantile(double u) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, u);
}

double EmpiricalMarginal::cdf_at(double x) const {
  if (knots.size() == 1) return 0.5;
  if (x <= knots.front()) return cdf.front();
  if (x >= knots.back()) return cdf.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const auto hi = static_cast<std::size_t>(it - knots.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - knots[lo]) / (knots[hi] - knots[lo]);
  return cdf[lo] + t * (cdf[hi] - cdf[lo]);
}

double EmpiricalMarginal::density_at(double x) const {
  if (knots.size() < 2 || x < knots.front() || x > knots.back()) return kDensityFloor;
  // Segment to the right of an interior knot; the last segment at the top knot.
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  if (it == knots.end()) --it;
  const auto hi = static_cast<std::size_t>(it - knots.begin());
  const std::size_t lo = hi - 1;
  const double slope = (cdf[hi] - cdf[lo]) / (knots[hi] - knots[lo]);
  return std::max(slope, kDensityFloor);
}

Vector CopulaModel::normal_scores(std::span<const double> x) const {
  if (x.size() != dim()) throw Error("copula: dimension mismatch");
  Vector z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& m = marginals_[j];
    const double u = std::clamp(m.cdf_at(x[j]), m.u_floor, 1.0 - m.u_floor);
    z[j] = standard_normal_quantile(u);
  }
  return z;
}

double CopulaModel::log_copula_density(std::span<const double> z) const {
  const std::size_t d = dim();
  double quad = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += precision_minus_identity_(i, j) * z[j];
    quad += z[i] * row;
  }
  return -0.5 * log_det_ - 0.5 * quad;
}

double CopulaModel::log_pdf(std::span<const double> x) const {
  if (x.size() != dim()) throw Error("log_pdf: dimension mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw Error("log_pdf: non-finite input");
  }
  const Vector z = normal_scores(x);
  double total = log_copula_density(z);
  for (std::size_t j = 0; j < x.size(); ++j) total += std::log(marginals_[j].density_at(x[j]));
  return total;
}

void CopulaModel::prepare() {
  const std::size_t d = dim();
  Eigen::MatrixXd r(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = correlation_(i, j);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw Error("copula: correlation matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  log_det_ = 2.0 * l.diagonal().array().log().sum();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  precision_minus_identity_ = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      precision_minus_identity_(i, j) =
          inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - (i == j ? 1.0 : 0.0);
    }
  }
}

CopulaModel CopulaModel::from_parts(std::vector<EmpiricalMarginal> marginals, Matrix correlation,
                                    double mean, double std) {
  CopulaModel c;
  c.marginals_ = std::move(marginals);
  c.correlation_ = std::move(correlation);
  c.mean_ = mean;
  c.std_ = std;
  if (c.correlation_.rows() != c.marginals_.size() || c.correlation_.cols() != c.marginals_.size()) {
    throw Error("copula: correlation shape does not match marginals");
  }
  c.prepare();
  return c;
}

CopulaModel fit_copula(const Dataset& train) {
  const std::size_t n = train.size();
  const std::size_t d = train.dim();
  if (d == 0) throw ValidationError("fit_copula: no features");
  if (n < d + 2) throw ValidationError("fit_copula: need at least D + 2 rows");

  // Canonical row order makes every reduction below permutation-invariant.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = train.rows.row(a);
    const auto rb = train.rows.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });

  const double denom = static_cast<double>(n) + 1.0;
  std::vector<EmpiricalMarginal> marginals(d);
  Matrix z(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    Vector col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = train.rows(order[k], j);
    Vector sorted = col;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
      throw ValidationError("fit_copula: feature '" + train.schema[j].name + "' is constant");
    }
    auto& m = marginals[j];
    m.u_floor = 1.0 / denom;
    for (std::size_t k = 0; k < n;) {
      std::size_t e = k;
      while (e < n && sorted[e] == sorted[k]) ++e;
      // Mid-rank (1-based) of the tie block.
      const double mid_rank = 0.5 * (static_cast<double>(k + 1) + static_cast<double>(e));
      m.knots.push_back(sorted[k]);
      m.cdf.push_back(mid_rank / denom);
      k = e;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double u = std::clamp(m.cdf_at(col[k]), m.u_floor, 1.0 - m.u_floor);
      z(k, j) = standard_normal_quantile(u);
    }
  }

  Vector mean(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += z(k, j);
  }
  for (auto& v : mean) v /= static_cast<double>(n);
  Matrix cov(d, d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) cov(i, j) += (z(k, i) - mean[i]) * (z(k, j) - mean[j]);
    }
  }
  Matrix corr(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double rho = i == j ? 1.0 : cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
      const double shrunk = i == j ? 1.0 : (1.0 - kCorrelationShrinkage) * rho;
      corr(i, j) = shrunk;
      corr(j, i) = shrunk;
    }
  }

  CopulaModel c = CopulaModel::from_parts(std::move(marginals), std::move(corr), 0.0, 0.0);
  double sum = 0.0;
  Vector lp(n);
  for (std::size_t k = 0; k < n; ++k) {
    lp[k] = c.log_pdf(train.rows.row(order[k]));
    sum += lp[k];
  }
  c.mean_ = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : lp) ss += (v - c.mean_) * (v - c.mean_);
  c.std_ = std::sqrt(ss / static_cast<double>(n));
  return c;
}

nlohmann::json CopulaModel::to_json() const {
  nlohmann::json j;
  auto margs = nlohmann::json::array();
  for (const auto& m : marginals_) {
    margs.push_back({{"knots", m.knots}, {"cdf", m.cdf}, {"u_floor", m.u_floor}});
  }
  j["marginals"] = std::move(margs);
  j["correlation"] = correlation_.data();
  j["log_pdf_mean"] = mean_;
  j["log_pdf_std"] = std_;
  return j;
}

CopulaModel CopulaModel::from_json(const nlohmann::json& j) {
  try {
    std::vector<EmpiricalMarginal> margs;
    for (const auto& jm : j.at("marginals")) {
      EmpiricalMarginal m;
      m.knots = jm.at("knots").get<Vector>();
      m.cdf = jm.at("cdf").get<Vector>();
      m.u_floor = jm.at("u_floor").get<double>();
      margs.push_back(std::move(m));
    }
    const auto flat = j.at("correlation").get<Vector>();
    const std::size_t d = margs.size();
    if (flat.size() != d * d) throw ValidationError("copula artifact: bad correlation size");
    Matrix corr(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) corr(i, k) = flat[i * d + k];
    }
    return from_parts(std::move(margs), std::move(corr), j.at("log_pdf_mean").get<double>(),
                      j.at("log_pdf_std").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed copula artifact: ") + e.what());
  }
}

PlausibilityBand PlausibilityBand::from(const CopulaModel& c, double theta) {
  if (!(theta > 0)) throw ValidationError("plausibility band: theta must be > 0");
  PlausibilityBand b;
  b.theta = theta;
  b.delta = theta * c.log_pdf_std();
  b.low = c.log_pdf_mean() - b.delta;
  b.high = c.log_pdf_mean() + b.delta;
  return b;
}

double band_violation(const PlausibilityBand& band, double log_density) {
  if (log_density < band.low) return band.low - log_density;
  if (log_density > band.high) return log_density - band.high;
  return 0.0;
}

double g2_violation(const CopulaModel& c, const PlausibilityBand& band, std::span<const double> x) {
  return band_violation(band, c.log_pdf(x));
}

}  // namespace semifax
