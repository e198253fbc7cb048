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

#ifndef SEMIFAX_TRACE_HPP
#define SEMIFAX_TRACE_HPP

#include <optional>
#include <span>
#include <vector>

#include "semifax/attribution.hpp"
#include "semifax/copula.hpp"
#include "semifax/data.hpp"
#include "semifax/forest.hpp"
#include "semifax/trend.hpp"

namespace semifax {

// Everything a query is explained against. Non-owning.
struct ExplainContext {
  const TreeEnsemble& model;
  const CopulaModel& density;
  const BackgroundSet& background;
  const Dataset& train;
  AttributionOptions attribution{};
};

// Straight line from the query (t = 0) to the semi-factual (t = 1).
struct InterpolationPath {
  Vector t;
  std::vector<Vector> points;
};

// points at t = i / (steps + 1), i = 0 .. steps + 1.
InterpolationPath build_path(std::span<const double> query, std::span<const double> target,
                             std::size_t steps);

// Main effects along a path, oriented toward the query class: class-1 effects
// as-is for class-1 queries, negated for class-0 queries.
struct AttributionTrace {
  Matrix effects;  // (path length) x D
  std::vector<TrendResult> trends;
};

double orientation(int query_class);

// Effects are rounded to this grid before trend testing, so summation noise in
// mathematically constant traces does not register as a trend.
inline constexpr double kTraceResolution = 1e-12;

// `at_query` optionally supplies the (unoriented) main effects at points[0].
AttributionTrace trace_path(const ExplainContext& ctx, const InterpolationPath& path,
                            int query_class, const std::optional<Vector>& at_query = std::nullopt);

// Trends for an already computed effects matrix (one sequence per column).
std::vector<TrendResult> column_trends(const Matrix& effects);

}  // namespace semifax

#endif  // SEMIFAX_TRACE_HPP
