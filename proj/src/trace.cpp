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

#include "semifax/trace.hpp"

#include <cmath>

namespace semifax {

InterpolationPath build_path(std::span<const double> query, std::span<const double> target,
                             std::size_t steps) {
  if (steps < 1) throw ValidationError("build_path: steps must be >= 1");
  if (query.size() != target.size()) throw ValidationError("build_path: dimension mismatch");
  InterpolationPath path;
  const std::size_t n = steps + 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps + 1);
    Vector p(query.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      // Endpoints are copied so t = 0 and t = 1 reproduce the inputs exactly.
      p[j] = i == 0 ? query[j] : (i + 1 == n ? target[j] : (1.0 - t) * query[j] + t * target[j]);
    }
    path.t.push_back(t);
    path.points.push_back(std::move(p));
  }
  return path;
}

double orientation(int query_class) { return query_class == 1 ? 1.0 : -1.0; }

std::vector<TrendResult> column_trends(const Matrix& effects) {
  std::vector<TrendResult> trends;
  Vector seq(effects.rows());
  for (std::size_t j = 0; j < effects.cols(); ++j) {
    for (std::size_t i = 0; i < effects.rows(); ++i) seq[i] = effects(i, j);
    trends.push_back(mann_kendall(seq));
  }
  return trends;
}

AttributionTrace trace_path(const ExplainContext& ctx, const InterpolationPath& path,
                            int query_class, const std::optional<Vector>& at_query) {
  const std::size_t n = path.points.size();
  if (n == 0) throw ValidationError("trace_path: empty path");
  const std::size_t d = path.points.front().size();
  const double sign = orientation(query_class);
  const AttributionModel model(ctx.model);
  AttributionTrace trace;
  trace.effects = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    Vector effects;
    if (i == 0 && at_query) {
      effects = *at_query;
    } else {
      effects = main_effects(model, path.points[i], ctx.background, ctx.attribution).values;
    }
    for (std::size_t j = 0; j < d; ++j) {
      trace.effects(i, j) = sign * std::round(effects[j] / kTraceResolution) * kTraceResolution;
    }
  }
  trace.trends = column_trends(trace.effects);
  return trace;
}

}  // namespace semifax
