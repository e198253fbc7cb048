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

#ifndef SEMIFAX_ATTRIBUTION_HPP
#define SEMIFAX_ATTRIBUTION_HPP

#include <cstdint>
#include <functional>
#include <span>

#include "semifax/common.hpp"
#include "semifax/forest.hpp"

namespace semifax {

// Reference rows for the interventional value function.
struct BackgroundSet {
  Matrix rows;
  std::uint64_t seed = 0;
};

// Draws k rows without replacement (all rows, in order, when k >= N).
BackgroundSet sample_background(const Matrix& train_rows, std::size_t k, std::uint64_t seed);

using ModelFn = std::function<double(std::span<const double>)>;

// The explained scalar output (class-1 probability). Wraps either a forest,
// which unlocks the tree-structured exact value table, or an arbitrary function.
class AttributionModel {
 public:
  AttributionModel(const TreeEnsemble& forest);  // NOLINT: implicit by design of call sites
  explicit AttributionModel(ModelFn fn);

  [[nodiscard]] double operator()(std::span<const double> x) const;
  [[nodiscard]] const TreeEnsemble* forest() const { return forest_; }

 private:
  const TreeEnsemble* forest_ = nullptr;
  ModelFn fn_;
};

struct AttributionOptions {
  std::size_t exact_limit = 12;
  std::size_t permutations = 256;
  std::uint64_t seed = 0;
  bool allow_sampling = true;
};

struct AttributionVector {
  Vector values;  // one per feature
  double base_value = 0.0;  // v(empty set)
  double fx = 0.0;          // model output at x
  bool exact = true;
};

using FeatureMask = std::uint64_t;

// Mean over background rows of f(x on S, background off S).
double value_function(const AttributionModel& m, std::span<const double> x, FeatureMask subset,
                      const BackgroundSet& bg);

// v(S) for every S, indexed by bitmask. Forests use a single pass per
// (tree, background row) that records which coalitions reach each leaf.
Vector value_table(const AttributionModel& m, std::span<const double> x, const BackgroundSet& bg);

// Shapley values from a complete value table.
Vector shapley_from_table(std::span<const double> table, std::size_t dim);

// Shapley interaction values: off-diagonal entries split the pairwise
// interaction index in half; the diagonal holds the main effects so that each
// row sums to that feature's Shapley value.
Matrix interactions_from_table(std::span<const double> table, std::size_t dim);

AttributionVector shapley_values(const AttributionModel& m, std::span<const double> x,
                                 const BackgroundSet& bg, const AttributionOptions& opts = {});

// Diagonal of the interaction matrix (pure main effects). Exact when
// D <= exact_limit, otherwise a seeded permutation estimate.
AttributionVector main_effects(const AttributionModel& m, std::span<const double> x,
                               const BackgroundSet& bg, const AttributionOptions& opts = {});

// Full interaction matrix; exact mode only.
Matrix interaction_matrix(const AttributionModel& m, std::span<const double> x,
                          const BackgroundSet& bg, const AttributionOptions& opts = {});

// Permutation-sampling estimates of the Shapley values and main effects
// (returned in that order), regardless of dimension.
std::pair<AttributionVector, AttributionVector> sampled_attributions(
    const AttributionModel& m, std::span<const double> x, const BackgroundSet& bg,
    std::size_t permutations, std::uint64_t seed);

}  // namespace semifax

#endif  // SEMIFAX_ATTRIBUTION_HPP
