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

#include "semifax/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "semifax/rng.hpp"

namespace semifax {

double metric_distance(std::span<const double> q, std::span<const double> x) {
  if (q.size() != x.size()) throw ValidationError("metric_distance: dimension mismatch");
  return euclidean(q, x);
}

std::size_t changed_features(std::span<const double> q, std::span<const double> x) {
  if (q.size() != x.size()) throw ValidationError("changed_features: dimension mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (std::abs(x[i] - q[i]) > kChangeTolerance) ++n;
  }
  return n;
}

double metric_sparsity(std::span<const double> q, std::span<const double> x) {
  const std::size_t n = changed_features(q, x);
  if (n == 0) throw ValidationError("metric_sparsity: semi-factual equals the query");
  return 1.0 / static_cast<double>(n);
}

double metric_plausibility(std::span<const double> x, const Matrix& train_rows) {
  if (train_rows.rows() == 0) throw ValidationError("metric_plausibility: empty training set");
  double best = kInf;
  for (std::size_t i = 0; i < train_rows.rows(); ++i) best = std::min(best, euclidean(x, train_rows.row(i)));
  return best;
}

double metric_trustworthiness(std::span<const double> x, const Dataset& train, int query_class,
                              bool leave_one_out) {
  double to_query = kInf;
  double to_other = kInf;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double d = euclidean(x, train.rows.row(i));
    if (leave_one_out && d == 0.0) continue;
    if (train.labels[i] == query_class) {
      to_query = std::min(to_query, d);
    } else {
      to_other = std::min(to_other, d);
    }
  }
  if (!std::isfinite(to_query) || !std::isfinite(to_other)) {
    throw ValidationError("metric_trustworthiness: both classes must be present in training data");
  }
  return std::min(kTrustCap, to_other / std::max(to_query, kTrustDenominatorFloor));
}

RobustnessResult metric_robustness(const Explainer& explainer, std::span<const double> q,
                                   double radius, std::size_t n_perturb, std::uint64_t seed) {
  if (n_perturb == 0) throw ValidationError("metric_robustness: n_perturb must be >= 1");
  if (!(radius > 0)) throw ValidationError("metric_robustness: radius must be > 0");
  RobustnessResult out;
  const auto base = explainer(q);
  if (!base) {
    out.skipped = n_perturb;
    return out;
  }
  Rng rng(seed);
  const std::size_t d = q.size();
  for (std::size_t k = 0; k < n_perturb; ++k) {
    Vector dir(d);
    double norm = 0.0;
    for (auto& v : dir) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    Vector xi(q.begin(), q.end());
    for (std::size_t j = 0; j < d; ++j) {
      xi[j] = std::clamp(q[j] + (norm > 0 ? r * dir[j] / norm : 0.0), 0.0, 1.0);
    }
    const double dq = euclidean(q, xi);
    if (dq <= 0) {
      ++out.skipped;
      continue;
    }
    const auto e = explainer(xi);
    if (!e) {
      ++out.skipped;
      continue;
    }
    out.value = std::max(out.value, euclidean(*base, *e) / dq);
    ++out.evaluated;
  }
  return out;
}

EvaluationScores score_semifactual(std::span<const double> q, std::span<const double> x,
                                   const Dataset& train, int query_class) {
  EvaluationScores s;
  s.distance = metric_distance(q, x);
  const std::size_t changed = changed_features(q, x);
  s.sparsity = changed == 0 ? 1.0 : 1.0 / static_cast<double>(changed);
  s.plausibility = metric_plausibility(x, train.rows);
  s.trustworthiness = metric_trustworthiness(x, train, query_class, true);
  return s;
}

nlohmann::json to_json(const EvaluationScores& s) {
  nlohmann::json j;
  j["distance"] = s.distance;
  j["sparsity"] = s.sparsity;
  j["plausibility"] = s.plausibility;
  j["trustworthiness"] = s.trustworthiness;
  if (s.robustness_computed) {
    j["robustness"] = s.robustness;
  } else {
    j["robustness"] = nullptr;
  }
  return j;
}

SeesawVerdict seesaw_from_trends(const std::vector<TrendResult>& trends, std::size_t key,
                                 const SeesawThresholds& thresholds) {
  if (key >= trends.size()) throw ValidationError("seesaw: key index out of range");
  if (trends.size() < 2) throw ValidationError("seesaw: need at least two features");
  SeesawVerdict v;
  v.key_index = key;
  v.tau_key = trends[key].tau;
  bool first = true;
  for (std::size_t j = 0; j < trends.size(); ++j) {
    if (j == key) continue;
    if (first || trends[j].tau > v.tau_best_hidden) {
      v.tau_best_hidden = trends[j].tau;
      v.hidden_index = j;
      first = false;
    }
  }
  v.has_seesaw = v.tau_key <= thresholds.weakening && v.tau_best_hidden >= thresholds.strengthening;
  return v;
}

SeesawVerdict audit_seesaw(std::span<const double> q, std::span<const double> x_sf,
                           const ExplainContext& ctx, std::size_t steps,
                           const SeesawThresholds& thresholds) {
  const int cls = ctx.model.predict(q);
  if (ctx.model.predict(x_sf) != cls) {
    throw ValidationError("audit_seesaw: pair is not a semi-factual (predicted classes differ)");
  }
  std::size_t key = 0;
  double largest = -1.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double change = std::abs(x_sf[j] - q[j]);
    if (change > largest) {
      largest = change;
      key = j;
    }
  }
  const auto path = build_path(q, x_sf, steps);
  const auto trace = trace_path(ctx, path, cls);
  return seesaw_from_trends(trace.trends, key, thresholds);
}

}  // namespace semifax
