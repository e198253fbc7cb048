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

#ifndef SEMIFAX_METRICS_HPP
#define SEMIFAX_METRICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "semifax/common.hpp"
#include "semifax/data.hpp"
#include "semifax/trace.hpp"

namespace semifax {

struct EvaluationScores {
  double distance = 0.0;         // higher preferred
  double sparsity = 1.0;         // 1 / changed features, higher preferred
  double plausibility = 0.0;     // distance to nearest training row, lower preferred
  double trustworthiness = 0.0;  // d(x, CF class) / d(x, query class), higher preferred
  double robustness = 0.0;       // local Lipschitz estimate, lower preferred
  bool robustness_computed = false;
};

inline constexpr double kChangeTolerance = 1e-9;
inline constexpr double kTrustDenominatorFloor = 1e-9;
inline constexpr double kTrustCap = 1e6;

double metric_distance(std::span<const double> q, std::span<const double> x);
std::size_t changed_features(std::span<const double> q, std::span<const double> x);
// Throws when x equals q (no observed difference).
double metric_sparsity(std::span<const double> q, std::span<const double> x);
double metric_plausibility(std::span<const double> x, const Matrix& train_rows);
// leave_one_out skips training rows identical to x, so a retrieved instance is
// not scored against itself.
double metric_trustworthiness(std::span<const double> x, const Dataset& train, int query_class,
                              bool leave_one_out = false);

// Maps a query to its semi-factual; nullopt when the method finds none.
using Explainer = std::function<std::optional<Vector>(std::span<const double>)>;

struct RobustnessResult {
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

// Max over seeded perturbations x_i drawn uniformly from the radius ball around
// q (clipped to [0, 1]) of |E(q) - E(x_i)| / |q - x_i|.
RobustnessResult metric_robustness(const Explainer& explainer, std::span<const double> q,
                                   double radius, std::size_t n_perturb, std::uint64_t seed);

// Distance, sparsity, plausibility and leave-one-out trustworthiness;
// robustness left unset.
EvaluationScores score_semifactual(std::span<const double> q, std::span<const double> x,
                                   const Dataset& train, int query_class);

nlohmann::json to_json(const EvaluationScores& s);

struct SeesawThresholds {
  double weakening = -0.3;
  double strengthening = 0.3;
};

struct SeesawVerdict {
  bool has_seesaw = false;
  double tau_key = 0.0;
  double tau_best_hidden = 0.0;
  std::size_t key_index = 0;
  std::size_t hidden_index = 0;
};

// Verdict from per-feature trends given the key; hidden = argmax tau over the
// other features (lowest index on ties).
SeesawVerdict seesaw_from_trends(const std::vector<TrendResult>& trends, std::size_t key,
                                 const SeesawThresholds& thresholds = {});

// Key = largest absolute change. Throws when x_sf is not in the query's class.
SeesawVerdict audit_seesaw(std::span<const double> q, std::span<const double> x_sf,
                           const ExplainContext& ctx, std::size_t steps = 10,
                           const SeesawThresholds& thresholds = {});

}  // namespace semifax

#endif  // SEMIFAX_METRICS_HPP
