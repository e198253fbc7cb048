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

#ifndef SEMIFAX_COPULA_HPP
#define SEMIFAX_COPULA_HPP

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "semifax/common.hpp"
#include "semifax/data.hpp"

namespace semifax {

// Piecewise-linear empirical CDF through (unique value, mid-rank / (N + 1)).
struct EmpiricalMarginal {
  Vector knots;  // sorted unique training values
  Vector cdf;    // CDF at each knot
  double u_floor = 0.0;  // 1 / (N + 1)

  [[nodiscard]] double cdf_at(double x) const;
  // Slope of the interpolated CDF, floored at kDensityFloor.
  [[nodiscard]] double density_at(double x) const;
};

inline constexpr double kDensityFloor = 1e-6;
inline constexpr double kCorrelationShrinkage = 1e-3;

class CopulaModel {
 public:
  CopulaModel() = default;

  [[nodiscard]] double log_pdf(std::span<const double> x) const;
  // log c(u) alone (zero under the independence copula).
  [[nodiscard]] double log_copula_density(std::span<const double> z) const;
  [[nodiscard]] Vector normal_scores(std::span<const double> x) const;

  [[nodiscard]] std::size_t dim() const { return marginals_.size(); }
  [[nodiscard]] const Matrix& correlation() const { return correlation_; }
  [[nodiscard]] const std::vector<EmpiricalMarginal>& marginals() const { return marginals_; }
  [[nodiscard]] double log_pdf_mean() const { return mean_; }
  [[nodiscard]] double log_pdf_std() const { return std_; }

  // Builds a model from parts; mean/std are recomputed by fit_copula only.
  static CopulaModel from_parts(std::vector<EmpiricalMarginal> marginals, Matrix correlation,
                                double mean, double std);

  [[nodiscard]] nlohmann::json to_json() const;
  static CopulaModel from_json(const nlohmann::json& j);

 private:
  void prepare();

  std::vector<EmpiricalMarginal> marginals_;
  Matrix correlation_;
  Matrix precision_minus_identity_;  // R^-1 - I
  double log_det_ = 0.0;
  double mean_ = 0.0;
  double std_ = 0.0;

  friend CopulaModel fit_copula(const Dataset& train);
};

// Gaussian copula over empirical marginals. Rows are canonically sorted before
// any reduction, so the fit is invariant to row order.
CopulaModel fit_copula(const Dataset& train);

// Closed band [mu - theta*sigma, mu + theta*sigma] on the joint log-density.
struct PlausibilityBand {
  double theta = 1.5;
  double delta = 0.0;
  double low = 0.0;
  double high = 0.0;

  static PlausibilityBand from(const CopulaModel& c, double theta);
};

// Distance of log_pdf(x) outside the band; 0 inside (edges included).
double g2_violation(const CopulaModel& c, const PlausibilityBand& band, std::span<const double> x);
double band_violation(const PlausibilityBand& band, double log_density);

double standard_normal_quantile(double u);

}  // namespace semifax

#endif  // SEMIFAX_COPULA_HPP
