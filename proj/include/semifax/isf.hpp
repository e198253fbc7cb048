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

#ifndef SEMIFAX_ISF_HPP
#define SEMIFAX_ISF_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "semifax/metrics.hpp"
#include "semifax/nsga2.hpp"
#include "semifax/trace.hpp"

namespace semifax {

struct TrendBand {
  double low = -1.0;
  double high = -0.8;

  [[nodiscard]] bool contains(double tau) const { return tau >= low && tau <= high; }
};

struct IsfConfig {
  double epsilon = -0.3;
  double theta = 1.5;
  std::size_t steps = 10;
  MooConfig moo{};
  // When set, replaces the tau_key < epsilon gate.
  std::optional<TrendBand> trend_band;
  double hidden_min_tau = 0.3;
  // Post-pass: features closer than this to the query snap back to it.
  double snap_tolerance = 1e-3;
  std::uint64_t seed = 0;
  // Workers across key features.
  std::size_t threads = 1;

  void validate() const;
};

struct InformativeSemifactual {
  Vector query;
  Vector x_sf;
  int query_class = 0;
  std::size_t key_feature = 0;
  std::size_t hidden_feature = 0;
  double tau_key = 0.0;
  double tau_hidden = 0.0;
  // tau_hidden >= hidden_min_tau.
  bool hidden_strong = false;
  double o1 = 0.0;
  double o2 = 0.0;
  InterpolationPath path;
  AttributionTrace trace;
  EvaluationScores metrics;
  std::uint64_t seed = 0;
};

// Per-key bookkeeping, reported whether or not a candidate was found.
struct KeyDiagnostics {
  std::size_t key = 0;
  std::size_t pareto_size = 0;
  std::size_t valid = 0;    // passed post-hoc class, plausibility and key checks
  std::size_t traced = 0;   // valid solutions whose path was traced
  std::size_t passing = 0;  // traced and passed the trend gate
  std::optional<double> best_tau;  // most negative key tau among traced solutions
};

struct KeyOutcome {
  std::optional<InformativeSemifactual> best;
  KeyDiagnostics diagnostics;
};

struct ExplainOutcome {
  std::optional<InformativeSemifactual> explanation;
  std::vector<KeyDiagnostics> per_key;
};

double objective_o1(std::span<const double> x, std::span<const double> q, std::size_t k);
double objective_o2(std::span<const double> x, std::span<const double> q, std::size_t k);
// How far the largest off-key change exceeds the key change; 0 when the key
// feature is the maximally changed one.
double key_dominance_violation(std::span<const double> x, std::span<const double> q, std::size_t k);
// 0 when x and q get the same predicted class, 1 otherwise.
int constraint_g1(const TreeEnsemble& m, std::span<const double> x, std::span<const double> q);

// Within one key: a strong hidden feature first, then the smallest off-key
// drift (o2), then most negative key tau, then larger key change (o1).
bool better_for_key(const InformativeSemifactual& a, const InformativeSemifactual& b);
// Across keys: a strong hidden feature first, then most negative key tau, then
// smaller o2, then lower key index.
bool better_across_keys(const InformativeSemifactual& a, const InformativeSemifactual& b);

// Optimizes with k as key feature and keeps the best trend-passing solution. `query_effects` optionally caches the main effects at
// the query.
KeyOutcome explain_for_key(std::span<const double> q, std::size_t k, const ExplainContext& ctx,
                           const IsfConfig& cfg,
                           const std::optional<Vector>& query_effects = std::nullopt);

// Runs every actionable key feature and returns the best of the per-key
// winners. Throws for D < 2 or when no feature is actionable.
ExplainOutcome explain(std::span<const double> q, const ExplainContext& ctx, const IsfConfig& cfg);

// Re-checks an explanation against the model and density: same class,
// inside the plausibility band, key maximally changed, key tau gate, hidden = argmax of other taus.
bool verify_explanation(const InformativeSemifactual& e, const ExplainContext& ctx,
                        const IsfConfig& cfg);

}  // namespace semifax

#endif  // SEMIFAX_ISF_HPP
