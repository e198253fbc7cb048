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

#include "semifax/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "semifax/logistic.hpp"
#include "semifax/rng.hpp"

namespace semifax {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_query(std::span<const double> q, const Dataset& train, const TreeEnsemble& m) {
  if (train.size() == 0) throw ValidationError("baseline: empty training set");
  if (q.size() != train.dim() || q.size() != m.dim()) throw ValidationError("baseline: query dimension mismatch");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::mdn: return "mdn";
    case Method::kleor: return "kleor";
    case Method::local_region: return "local_region";
    case Method::dser: return "dser";
  }
  return "?";
}

std::optional<Method> method_from_string(const std::string& name) {
  for (Method m : {Method::mdn, Method::kleor, Method::local_region, Method::dser}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

double sfs_score(std::size_t same, std::size_t n_features, double diff, double diff_max) {
  if (n_features == 0) throw ValidationError("sfs: no features");
  const double second = diff_max > 0 ? diff / diff_max : 0.0;
  return static_cast<double>(same) / static_cast<double>(n_features) + second;
}

BaselineResult mdn(std::span<const double> q, const Dataset& train, const TreeEnsemble& m) {
  check_query(q, train, m);
  const std::size_t d = q.size();
  const int cls = m.predict(q);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (m.predict(train.rows.row(i)) == cls) members.push_back(i);
  }
  if (members.empty()) throw ValidationError("mdn: no training instance in the query class");

  // Same-tolerance from the feature's std over the whole training set.
  Vector tol(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    if (train.schema[j].kind == FeatureKind::categorical) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) mean += train.rows(i, j);
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) var += (train.rows(i, j) - mean) * (train.rows(i, j) - mean);
    tol[j] = kMdnSameFraction * std::sqrt(var / static_cast<double>(train.size()));
  }
  auto same_count = [&](std::span<const double> x) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (train.schema[j].kind == FeatureKind::categorical ? x[j] == q[j] : std::abs(x[j] - q[j]) <= tol[j]) ++n;
    }
    return n;
  };

  std::optional<std::size_t> best_row;
  double best_score = -kInf;
  std::size_t best_feature = 0;
  for (std::size_t f = 0; f < d; ++f) {
    for (int side : {+1, -1}) {
      double diff_max = 0.0;
      for (std::size_t i : members) {
        const double diff = side * (train.rows(i, f) - q[f]);
        if (diff > 0) diff_max = std::max(diff_max, diff);
      }
      if (diff_max == 0.0) continue;
      for (std::size_t i : members) {
        const auto x = train.rows.row(i);
        const double diff = side * (x[f] - q[f]);
        if (!(diff > 0)) continue;
        const double s = sfs_score(same_count(x), d, diff, diff_max);
        if (s > best_score || (s == best_score && i < *best_row)) {
          best_score = s;
          best_row = i;
          best_feature = f;
        }
      }
    }
  }
  if (!best_row) throw ValidationError("mdn: every query-class instance equals the query");
  BaselineResult r;
  r.method = Method::mdn;
  const auto x = train.rows.row(*best_row);
  r.x_sf.assign(x.begin(), x.end());
  r.score = best_score;
  r.diagnostics["row"] = std::to_string(*best_row);
  r.diagnostics["feature"] = train.schema[best_feature].name;
  return r;
}

BaselineResult kleor_attr_sim(std::span<const double> q, const Dataset& train, const TreeEnsemble& m,
                              std::size_t k_nn) {
  check_query(q, train, m);
  if (k_nn == 0) throw ValidationError("kleor: k_nn must be positive");
  const std::size_t n = train.size();
  const std::size_t d = q.size();
  const int cls = m.predict(q);
  bool has[2] = {false, false};
  for (int y : train.labels) has[y] = true;
  if (!has[0] || !has[1]) throw ValidationError("kleor: training set must contain both classes");

  // Class of each training row by a k-NN vote over the other training rows.
  std::vector<int> knn_class(n);
  const std::size_t k = std::min(k_nn, n - 1);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back(euclidean(train.rows.row(i), train.rows.row(j)), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    int votes = 0;
    for (std::size_t t = 0; t < k; ++t) votes += train.labels[dist[t].second];
    knn_class[i] = 2 * votes > static_cast<int>(k) ? 1 : (2 * votes == static_cast<int>(k) ? train.labels[i] : 0);
  }

  std::optional<std::size_t> nun;
  double nun_dist = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (knn_class[i] == cls) continue;
    const double dd = euclidean(q, train.rows.row(i));
    if (dd < nun_dist) {
      nun_dist = dd;
      nun = i;
    }
  }
  if (!nun) throw ValidationError("kleor: no unlike neighbor");
  const auto nun_x = train.rows.row(*nun);

  std::optional<std::size_t> best_row;
  double best = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = train.rows.row(i);
    if (train.labels[i] != cls || m.predict(x) != cls) continue;
    std::size_t count = 0;
    for (std::size_t a = 0; a < d; ++a) {
      if (std::abs(q[a] - x[a]) < std::abs(q[a] - nun_x[a])) ++count;
    }
    const double s = -euclidean(x, nun_x) + static_cast<double>(count);
    if (s > best) {
      best = s;
      best_row = i;
    }
  }
  if (!best_row) throw ValidationError("kleor: no query-class candidate");
  BaselineResult r;
  r.method = Method::kleor;
  const auto x = train.rows.row(*best_row);
  r.x_sf.assign(x.begin(), x.end());
  r.score = best;
  r.diagnostics["row"] = std::to_string(*best_row);
  r.diagnostics["nun_row"] = std::to_string(*nun);
  return r;
}

BaselineResult local_region(std::span<const double> q, const Dataset& train, const TreeEnsemble& m,
                            std::size_t min_per_class) {
  check_query(q, train, m);
  if (min_per_class == 0) throw ValidationError("local_region: min_per_class must be positive");
  const int cls = m.predict(q);
  std::vector<std::pair<double, std::size_t>> by_class[2];
  for (std::size_t i = 0; i < train.size(); ++i) {
    by_class[train.labels[i]].emplace_back(euclidean(q, train.rows.row(i)), i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw ValidationError("local_region: the region holds a single class; surrogate cannot be fit");
  }
  BaselineResult r;
  r.method = Method::local_region;
  std::vector<std::size_t> region;
  for (auto& members : by_class) {
    std::sort(members.begin(), members.end());
    if (members.size() < min_per_class) {
      r.diagnostics["warning"] = "fewer than " + std::to_string(min_per_class) +
                                 " instances in a class; region truncated to the available rows";
    }
    const std::size_t take = std::min(min_per_class, members.size());
    for (std::size_t t = 0; t < take; ++t) region.push_back(members[t].second);
  }
  std::sort(region.begin(), region.end());

  Matrix rows(0, q.size());
  std::vector<int> labels;
  for (std::size_t i : region) {
    rows.push_row(train.rows.row(i));
    labels.push_back(train.labels[i]);
  }
  const LogisticModel lr = fit_logistic(rows, labels, 1e-3, 500, 1.0);

  std::optional<std::size_t> best_row;
  double best_p = kInf;
  std::optional<std::size_t> fallback_row;
  double fallback_p = -kInf;
  for (std::size_t i : region) {
    const auto x = train.rows.row(i);
    if (m.predict(x) != cls) continue;
    const double p1 = lr.probability(x);
    const double p = cls == 1 ? p1 : 1.0 - p1;
    if (p >= 0.5 && p < best_p) {
      best_p = p;
      best_row = i;
    }
    if (p > fallback_p) {
      fallback_p = p;
      fallback_row = i;
    }
  }
  if (!best_row) {
    if (!fallback_row) throw ValidationError("local_region: no query-class instance in the region");
    best_row = fallback_row;
    best_p = fallback_p;
    r.diagnostics["fallback"] = "no candidate at or above 0.5; took the most probable";
  }
  const auto x = train.rows.row(*best_row);
  r.x_sf.assign(x.begin(), x.end());
  r.score = best_p;
  r.diagnostics["row"] = std::to_string(*best_row);
  r.diagnostics["region_size"] = std::to_string(region.size());
  return r;
}

double reject_score(const TreeEnsemble& m, std::span<const double> x) {
  const auto p = m.predict_proba(x);
  return 1.0 - std::max(p[0], p[1]);
}

DserLoss dser_loss(double r_x, double r_q, std::span<const double> x, std::span<const double> q,
                   const std::vector<bool>& used, const DserConfig& cfg) {
  if (x.size() != q.size() || used.size() != q.size()) throw ValidationError("dser: dimension mismatch");
  DserLoss l;
  l.feasible = cfg.c_feasible * std::max(r_x - cfg.reject_threshold, 0.0) +
               cfg.c_sf * std::max(r_q - r_x, 0.0);
  std::size_t changed = 0;
  std::size_t reused = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (std::abs(x[i] - q[i]) > kChangeTolerance) {
      ++changed;
      if (used[i]) ++reused;
    }
  }
  l.sparse = cfg.c_sparse * std::max(static_cast<double>(changed) - cfg.mu, 0.0);
  l.similar = -cfg.c_similar * euclidean(x, q);
  l.diverse = cfg.c_diverse * static_cast<double>(reused);
  return l;
}

std::optional<BaselineResult> dser(std::span<const double> q, const Dataset& train,
                                   const TreeEnsemble& m, const CopulaModel& density,
                                   const DserConfig& cfg) {
  check_query(q, train, m);
  if (cfg.n_outputs == 0) throw ValidationError("dser: n_outputs must be positive");
  cfg.moo.validate();
  const std::size_t d = q.size();
  const int cls = m.predict(q);
  const double r_q = reject_score(m, q);
  const Vector query(q.begin(), q.end());

  std::vector<bool> frozen(d);
  std::vector<std::size_t> actionable;
  for (std::size_t j = 0; j < d; ++j) {
    frozen[j] = !train.schema[j].actionable;
    if (!frozen[j]) actionable.push_back(j);
  }
  if (actionable.empty()) throw ValidationError("dser: no actionable feature");

  std::vector<bool> used(d, false);
  std::optional<BaselineResult> best;
  double best_loss = kInf;
  std::size_t outputs = 0;
  for (std::size_t run = 0; run < cfg.n_outputs; ++run) {
    Problem problem;
    problem.lower.assign(d, 0.0);
    problem.upper.assign(d, 1.0);
    problem.anchor = query;
    problem.seed_genes = actionable;
    problem.evaluate = [&, used](std::span<const double> x) {
      Evaluation e;
      e.objectives = {dser_loss(reject_score(m, x), r_q, x, query, used, cfg).total(), 0.0};
      e.violation = m.predict(x) == cls ? 0.0 : 1.0;
      return e;
    };
    problem.repair = [&train](std::span<double> x) {
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = train.schema[j].snap(x[j]);
    };
    MooConfig moo = cfg.moo;
    moo.seed = derive_seed(cfg.seed, run);
    const auto front = evolve(problem, moo, frozen);

    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (m.predict(front[i].genome) != cls) continue;
      if (!pick || front[i].objectives[0] < front[*pick].objectives[0]) pick = i;
    }
    if (!pick) continue;
    ++outputs;
    const Vector& x = front[*pick].genome;
    // Compared across runs without the diversity term, which differs per run.
    DserLoss loss = dser_loss(reject_score(m, x), r_q, x, query, used, cfg);
    const double base = loss.total() - loss.diverse;
    if (base < best_loss) {
      best_loss = base;
      BaselineResult r;
      r.method = Method::dser;
      r.x_sf = x;
      r.score = base;
      r.diagnostics["run"] = std::to_string(run);
      r.diagnostics["generated"] = "true";
      r.diagnostics["reject_query"] = fmt(r_q);
      r.diagnostics["reject_sf"] = fmt(reject_score(m, x));
      r.diagnostics["log_density"] = fmt(density.log_pdf(x));
      best = std::move(r);
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(x[j] - query[j]) > kChangeTolerance) used[j] = true;
    }
  }
  if (best) best->diagnostics["outputs"] = std::to_string(outputs);
  return best;
}

std::size_t ensemble_best(const std::vector<BaselineResult>& results,
                          const std::vector<EvaluationScores>& scores, bool include_robustness) {
  if (results.empty()) throw ValidationError("ensemble_best: no results");
  if (results.size() != scores.size()) throw ValidationError("ensemble_best: results and scores differ in length");
  const std::size_t n = results.size();
  Vector total(n, 0.0);
  auto add = [&](auto get, bool higher_better) {
    double lo = kInf;
    double hi = -kInf;
    for (const auto& s : scores) {
      lo = std::min(lo, get(s));
      hi = std::max(hi, get(s));
    }
    if (!(hi > lo)) return;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (get(scores[i]) - lo) / (hi - lo);
      total[i] += higher_better ? z : 1.0 - z;
    }
  };
  add([](const EvaluationScores& s) { return s.distance; }, true);
  add([](const EvaluationScores& s) { return s.sparsity; }, true);
  add([](const EvaluationScores& s) { return s.plausibility; }, false);
  add([](const EvaluationScores& s) { return s.trustworthiness; }, true);
  if (include_robustness) add([](const EvaluationScores& s) { return s.robustness; }, false);

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (total[i] > total[best] ||
        (total[i] == total[best] && results[i].method < results[best].method)) {
      best = i;
    }
  }
  return best;
}

}  // namespace semifax
