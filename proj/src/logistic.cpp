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

#include "semifax/logistic.hpp"

#include <algorithm>
#include <cmath>

namespace semifax {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double margin(const LogisticModel& m, std::span<const double> x) {
  double z = m.bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += m.weights[j] * x[j];
  return z;
}

}  // namespace

double LogisticModel::probability(std::span<const double> x) const {
  if (x.size() != weights.size()) throw Error("LogisticModel: dimension mismatch");
  // Clamp keeps the output strictly inside (0, 1).
  return std::clamp(sigmoid(margin(*this, x)), 1e-15, 1.0 - 1e-15);
}

double logistic_loss(const LogisticModel& m, const Matrix& rows, const std::vector<int>& labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const double z = margin(m, rows.row(i));
    // log(1 + e^z) - y z, written stably.
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - labels[i] * z;
  }
  loss /= static_cast<double>(rows.rows());
  double sq = 0.0;
  for (double w : m.weights) sq += w * w;
  return loss + 0.5 * m.l2 * sq;
}

LogisticModel fit_logistic(const Matrix& rows, const std::vector<int>& labels, double l2,
                           std::size_t iters, double step) {
  if (rows.rows() != labels.size() || rows.rows() == 0) {
    throw ValidationError("fit_logistic: rows/labels mismatch or empty");
  }
  if (iters < 1) throw ValidationError("fit_logistic: iters must be >= 1");
  if (l2 < 0) throw ValidationError("fit_logistic: l2 must be >= 0");
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || pos == static_cast<long>(labels.size())) {
    throw ValidationError("fit_logistic: both classes must be present");
  }
  const std::size_t d = rows.cols();
  LogisticModel m{Vector(d, 0.0), 0.0, l2};
  Vector grad(d);
  const auto n = static_cast<double>(rows.rows());
  for (std::size_t it = 0; it < iters; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      const auto x = rows.row(i);
      const double r = sigmoid(margin(m, x)) - labels[i];
      for (std::size_t j = 0; j < d; ++j) grad[j] += r * x[j];
      grad_b += r;
    }
    for (std::size_t j = 0; j < d; ++j) m.weights[j] -= step * (grad[j] / n + l2 * m.weights[j]);
    m.bias -= step * grad_b / n;
  }
  return m;
}

}  // namespace semifax
