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

#ifndef SEMIFAX_LOGISTIC_HPP
#define SEMIFAX_LOGISTIC_HPP

#include <span>
#include <vector>

#include "semifax/common.hpp"

namespace semifax {

// Binary logistic regression, p(y=1|x) = sigmoid(w.x + b).
struct LogisticModel {
  Vector weights;
  double bias = 0.0;
  double l2 = 0.0;

  [[nodiscard]] double probability(std::span<const double> x) const;
};

// Mean cross-entropy plus (l2/2)|w|^2, minimized by full-batch gradient descent
// from zero weights.
LogisticModel fit_logistic(const Matrix& rows, const std::vector<int>& labels, double l2,
                           std::size_t iters, double step);

double logistic_loss(const LogisticModel& m, const Matrix& rows, const std::vector<int>& labels);

}  // namespace semifax

#endif  // SEMIFAX_LOGISTIC_HPP
