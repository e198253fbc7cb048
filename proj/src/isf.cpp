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

#include "semifax/isf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semifax/rng.hpp"

namespace semifax {

void IsfConfig::validate() const {
  if (!(epsilon < 0)) throw ValidationError("isf: epsilon must be negative");
  if (!(theta > 0)) throw ValidationError("isf: theta must be positive");
  if (steps < 3) throw ValidationError("isf: steps must be >= 3");
  if (trend_band) {
    if (!(trend_band->low >= -1.0 && trend_band->low <= trend_band->high && trend_band->high < 0.0)) {
      throw ValidationError("isf: trend band must satisfy -1 <= low <= high < 0");
    }
  }
  moo.validate();
}

double objective_o1(std::span<const double> x, std::span<const double> q, std::size_t k) {
  if (k >= x.size() || x.size() != q.size()) throw ValidationError("objective_o1: bad index or dimension");
  return std::abs(x[k] - q[k]);
}

double objective_o2(std::span<const double> x, std::span<const double> q, std::size_t k) {
  if (k >= x.size() || x.size() != q.size()) throw ValidationError("objective_o2: bad index or dimension");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i != k) sum += std::abs(x[i] - q[i]);
  }
  return sum;
}

double key_dominance_violation(std::span<const double> x, std::span<const double> q, std::size_t k) {
  const double key = std::abs(x[k] - q[k]);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i != k) worst = std::max(worst, std::abs(x[i] - q[i]) - key);
  }
  return worst;
}

int constraint_g1(const TreeEnsemble& m, std::span<const double> x, std::span<const double> q) {
  return m.predict(x) == m.predict(q) ? 0 : 1;
}

bool better_for_key(const InformativeSemifactual& a, const InformativeSemifactual& b) {
  if (a.hidden_strong != b.hidden_strong) return a.hidden_strong;
  if (a.o2 != b.o2) return a.o2 < b.o2;
  if (a.tau_key != b.tau_key) return a.tau_key < b.tau_key;
  return a.o1 > b.o1;
}

bool better_across_keys(const InformativeSemifactual& a, const InformativeSemifactual& b) {
  if (a.hidden_strong != b.hidden_strong) return a.hidden_strong;
  if (a.tau_key != b.tau_key) return a.tau_key < b.tau_key;
  if (a.o2 != b.o2) return a.o2 < b.o2;
  return a.key_feature < b.key_feature;
}

namespace {

bool gate(double tau, const IsfConfig& cfg) {
  return cfg.trend_band ? cfg.trend_band->contains(tau) : tau < cfg.epsilon;
}

std::pair<std::size_t, double> hidden_of(const std::vector<TrendResult>& trends, std::size_t key) {
  std::size_t best = key == 0 ? 1 : 0;
  for (std::size_t j = 0; j < trends.size(); ++j) {
    if (j != key && trends[j].tau > trends[best].tau) best = j;
  }
  return {best, trends[best].tau};
}

bool is_valid_semifactual(std::span<const double> x, std::span<const double> q, int cls,
                          const ExplainContext& ctx, const PlausibilityBand& band) {
  return ctx.model.predict(x) == cls && g2_violation(ctx.density, band, x) == 0.0 &&
         ctx.model.predict(q) == cls;
}

}  // namespace

KeyOutcome explain_for_key(std::span<const double> q, std::size_t k, const ExplainContext& ctx,
                           const IsfConfig& cfg, const std::optional<Vector>& query_effects) {
  cfg.validate();
  const std::size_t d = q.size();
  const Schema& schema = ctx.train.schema;
  if (d != schema.size() || d != ctx.model.dim()) throw ValidationError("explain: query dimension mismatch");
  if (k >= d) throw ValidationError("explain: key index out of range");
  if (!schema[k].actionable) throw ValidationError("explain: key feature '" + schema[k].name + "' is not actionable");
  if (d < 2) throw ValidationError("explain: a hidden feature needs at least two features");

  const int cls = ctx.model.predict(q);
  const PlausibilityBand band = PlausibilityBand::from(ctx.density, cfg.theta);
  const Vector query(q.begin(), q.end());

  Problem problem;
  problem.lower.assign(d, 0.0);
  problem.upper.assign(d, 1.0);
  problem.anchor = query;
  problem.seed_genes = {k};
  problem.evaluate = [&](std::span<const double> x) {
    Evaluation e;
    e.objectives = {-objective_o1(x, query, k), objective_o2(x, query, k)};
    e.violation = (ctx.model.predict(x) == cls ? 0.0 : 1.0) + g2_violation(ctx.density, band, x) +
                  key_dominance_violation(x, query, k);
    return e;
  };
  problem.repair = [&schema](std::span<double> x) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = schema[j].snap(x[j]);
  };
  std::vector<bool> frozen(d);
  for (std::size_t j = 0; j < d; ++j) frozen[j] = !schema[j].actionable;

  MooConfig moo = cfg.moo;
  moo.seed = derive_seed(cfg.seed, k);
  const std::vector<Candidate> front = evolve(problem, moo, frozen);

  KeyOutcome out;
  out.diagnostics.key = k;
  out.diagnostics.pareto_size = front.size();

  // Cheap checks first; snapped genomes that still pass replace the raw ones.
  std::vector<Vector> valid;
  for (const auto& member : front) {
    Vector x = member.genome;
    Vector snapped = x;
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(snapped[j] - query[j]) < cfg.snap_tolerance) snapped[j] = query[j];
    }
    if (is_valid_semifactual(snapped, query, cls, ctx, band)) {
      x = std::move(snapped);
    } else if (!is_valid_semifactual(x, query, cls, ctx, band)) {
      continue;
    }
    if (x[k] == query[k] || key_dominance_violation(x, query, k) > 0.0) continue;
    valid.push_back(std::move(x));
  }
  out.diagnostics.valid = valid.size();

  // Traces are the expensive part. Visiting candidates by ascending o2 lets the
  // scan stop once a strong candidate passed and o2 has moved past it, since
  // better_for_key ranks hidden strength first and o2 second.
  std::vector<std::size_t> order(valid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return objective_o2(valid[a], query, k) < objective_o2(valid[b], query, k);
  });

  std::optional<Vector> at_query = query_effects;
  std::vector<InformativeSemifactual> passing;
  std::optional<double> strong_o2;
  for (std::size_t idx : order) {
    const Vector& x = valid[idx];
    const double o2 = objective_o2(x, query, k);
    if (strong_o2 && o2 > *strong_o2) break;
    if (!at_query) {
      at_query = main_effects(AttributionModel(ctx.model), query, ctx.background, ctx.attribution).values;
    }
    InformativeSemifactual e;
    e.query = query;
    e.x_sf = x;
    e.query_class = cls;
    e.key_feature = k;
    e.path = build_path(query, x, cfg.steps);
    e.trace = trace_path(ctx, e.path, cls, at_query);
    e.tau_key = e.trace.trends[k].tau;
    std::tie(e.hidden_feature, e.tau_hidden) = hidden_of(e.trace.trends, k);
    e.hidden_strong = e.tau_hidden >= cfg.hidden_min_tau;
    e.o1 = objective_o1(x, query, k);
    e.o2 = o2;
    e.seed = cfg.seed;
    ++out.diagnostics.traced;
    if (!out.diagnostics.best_tau || e.tau_key < *out.diagnostics.best_tau) {
      out.diagnostics.best_tau = e.tau_key;
    }
    if (!gate(e.tau_key, cfg)) continue;
    ++out.diagnostics.passing;
    if (e.hidden_strong && !strong_o2) strong_o2 = o2;
    passing.push_back(std::move(e));
  }
  if (passing.empty()) return out;
  // stable: equal candidates keep front order.
  const auto best = std::min_element(passing.begin(), passing.end(), better_for_key);
  best->metrics = score_semifactual(best->query, best->x_sf, ctx.train, cls);
  out.best = std::move(*best);
  return out;
}

ExplainOutcome explain(std::span<const double> q, const ExplainContext& ctx, const IsfConfig& cfg) {
  cfg.validate();
  const std::size_t d = q.size();
  if (d < 2) {
    throw ValidationError("explain: a hidden feature cannot exist with fewer than two features");
  }
  if (d != ctx.train.dim()) throw ValidationError("explain: query dimension mismatch");
  std::vector<std::size_t> keys;
  for (std::size_t j = 0; j < d; ++j) {
    if (ctx.train.schema[j].actionable) keys.push_back(j);
  }
  if (keys.empty()) throw ValidationError("explain: no actionable feature");

  const Vector query_effects =
      main_effects(AttributionModel(ctx.model), q, ctx.background, ctx.attribution).values;
  std::vector<KeyOutcome> outcomes(keys.size());
  parallel_for(keys.size(), cfg.threads, [&](std::size_t i) {
    outcomes[i] = explain_for_key(q, keys[i], ctx, cfg, query_effects);
  });

  ExplainOutcome result;
  for (auto& o : outcomes) {
    result.per_key.push_back(o.diagnostics);
    if (!o.best) continue;
    if (!result.explanation || better_across_keys(*o.best, *result.explanation)) {
      result.explanation = std::move(o.best);
    }
  }
  return result;
}

bool verify_explanation(const InformativeSemifactual& e, const ExplainContext& ctx,
                        const IsfConfig& cfg) {
  const PlausibilityBand band = PlausibilityBand::from(ctx.density, cfg.theta);
  if (constraint_g1(ctx.model, e.x_sf, e.query) != 0) return false;
  if (g2_violation(ctx.density, band, e.x_sf) != 0.0) return false;
  const auto path = build_path(e.query, e.x_sf, cfg.steps);
  const auto trace = trace_path(ctx, path, ctx.model.predict(e.query));
  const double tau_key = trace.trends[e.key_feature].tau;
  if (!gate(tau_key, cfg) || tau_key != e.tau_key) return false;
  if (e.hidden_feature == e.key_feature) return false;
  if (key_dominance_violation(e.x_sf, e.query, e.key_feature) > 0.0) return false;
  const auto [hidden, tau_hidden] = hidden_of(trace.trends, e.key_feature);
  return hidden == e.hidden_feature && tau_hidden == e.tau_hidden;
}

}  // namespace semifax
