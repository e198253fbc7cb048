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

#include "semifax/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "semifax/rng.hpp"

namespace semifax {

namespace {

constexpr const char* kIsf = "isf";
constexpr const char* kEnsemble = "ensemble_best";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::optional<Vector> run_method(const std::string& method, std::span<const double> q,
                                 const ExplainContext& ctx, const BenchConfig& cfg,
                                 std::uint64_t seed, std::string& note,
                                 std::optional<InformativeSemifactual>* kept = nullptr) {
  if (method == kIsf) {
    IsfConfig isf = cfg.isf;
    isf.seed = seed;
    auto out = explain(q, ctx, isf);
    if (!out.explanation) return std::nullopt;
    Vector x = out.explanation->x_sf;
    if (kept) *kept = std::move(out.explanation);
    return x;
  }
  switch (*method_from_string(method)) {
    case Method::mdn: return mdn(q, ctx.train, ctx.model).x_sf;
    case Method::kleor: return kleor_attr_sim(q, ctx.train, ctx.model, cfg.kleor_k).x_sf;
    case Method::local_region: {
      auto r = local_region(q, ctx.train, ctx.model, cfg.local_min_per_class);
      if (auto it = r.diagnostics.find("warning"); it != r.diagnostics.end()) note = it->second;
      return r.x_sf;
    }
    case Method::dser: {
      DserConfig d = cfg.dser;
      d.seed = seed;
      auto r = dser(q, ctx.train, ctx.model, ctx.density, d);
      if (!r) return std::nullopt;
      return r->x_sf;
    }
  }
  return std::nullopt;
}

// Fills scores and the seesaw verdict; a pair the metrics reject is marked not found.
void score_row(BenchRow& row, std::span<const double> q, const ExplainContext& ctx, int cls) {
  try {
    if (ctx.model.predict(row.x_sf) != cls) {
      row.found = false;
      row.note = "class changed";
      return;
    }
    row.scores = score_semifactual(q, row.x_sf, ctx.train, cls);
    row.seesaw = audit_seesaw(q, row.x_sf, ctx, 10);
  } catch (const ValidationError& e) {
    row.found = false;
    row.note = e.what();
  }
}

}  // namespace

void BenchConfig::validate() const {
  if (methods.empty()) throw ValidationError("bench: no method selected");
  for (const auto& m : methods) {
    if (m != kIsf && !method_from_string(m)) {
      throw ValidationError("bench: unknown method '" + m + "' (expected isf, mdn, kleor, local_region or dser)");
    }
  }
  if (n_queries == 0) throw ValidationError("bench: n_queries must be positive");
  isf.validate();
}

BenchReport run_benchmark(const Dataset& queries, const ExplainContext& ctx, const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  std::size_t n = cfg.n_queries;
  if (n > queries.size()) {
    report.warnings.push_back("n_queries " + std::to_string(n) + " exceeds the " +
                              std::to_string(queries.size()) + " available test rows; truncated");
    n = queries.size();
  }
  report.n_queries = n;
  std::vector<std::string> baselines;
  for (const auto& m : cfg.methods) {
    if (m != kIsf) baselines.push_back(m);
  }
  const bool with_ensemble = !baselines.empty();
  const std::size_t per_query = cfg.methods.size() + (with_ensemble ? 1 : 0);

  // Parallel across queries; inner stages run single-threaded.
  BenchConfig inner = cfg;
  inner.isf.threads = 1;
  inner.isf.moo.threads = 1;
  inner.dser.moo.threads = 1;

  std::vector<std::vector<BenchRow>> slots(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto q = queries.rows.row(i);
    const int cls = ctx.model.predict(q);
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    auto& rows = slots[i];
    std::vector<BaselineResult> pool;
    std::vector<EvaluationScores> pool_scores;
    for (const auto& method : cfg.methods) {
      BenchRow row;
      row.query = i;
      row.method = method;
      std::optional<Vector> x;
      try {
        x = run_method(method, q, ctx, inner, seed, row.note, &row.explanation);
      } catch (const ValidationError& e) {
        row.note = e.what();
      }
      if (x) {
        row.found = true;
        row.x_sf = *x;
        score_row(row, q, ctx, cls);
      }
      if (row.found && cfg.robustness) {
        const Explainer explainer = [&, method](std::span<const double> p) -> std::optional<Vector> {
          std::string ignored;
          try {
            return run_method(method, p, ctx, inner, seed, ignored);
          } catch (const ValidationError&) {
            return std::nullopt;
          }
        };
        row.scores.robustness =
            metric_robustness(explainer, q, cfg.robustness_radius, cfg.robustness_samples, seed).value;
        row.scores.robustness_computed = true;
      }
      if (row.found && method != kIsf) {
        BaselineResult r;
        r.method = *method_from_string(method);
        r.x_sf = row.x_sf;
        pool.push_back(std::move(r));
        pool_scores.push_back(row.scores);
      }
      rows.push_back(std::move(row));
    }
    if (with_ensemble) {
      BenchRow row;
      row.query = i;
      row.method = kEnsemble;
      if (!pool.empty()) {
        const std::size_t b = ensemble_best(pool, pool_scores, cfg.robustness && cfg.robustness_in_ensemble);
        row.found = true;
        row.source = to_string(pool[b].method);
        row.x_sf = pool[b].x_sf;
        score_row(row, q, ctx, cls);
        row.scores = pool_scores[b];
      } else {
        row.note = "no baseline produced a semi-factual";
      }
      rows.push_back(std::move(row));
    }
  });

  report.rows.reserve(n * per_query);
  for (auto& s : slots) {
    for (auto& r : s) report.rows.push_back(std::move(r));
  }

  std::vector<std::string> names = cfg.methods;
  if (with_ensemble) names.emplace_back(kEnsemble);
  for (const auto& name : names) {
    BenchAggregate a;
    a.method = name;
    a.queries = n;
    double robust = 0.0;
    std::size_t robust_n = 0;
    for (const auto& r : report.rows) {
      if (r.method != name || !r.found) continue;
      ++a.found;
      if (r.seesaw.has_seesaw) ++a.seesaw;
      a.distance += r.scores.distance;
      a.sparsity += r.scores.sparsity;
      a.plausibility += r.scores.plausibility;
      a.trustworthiness += r.scores.trustworthiness;
      if (r.scores.robustness_computed) {
        robust += r.scores.robustness;
        ++robust_n;
      }
    }
    if (a.found > 0) {
      const double f = static_cast<double>(a.found);
      a.seesaw_pct = 100.0 * static_cast<double>(a.seesaw) / f;
      a.distance /= f;
      a.sparsity /= f;
      a.plausibility /= f;
      a.trustworthiness /= f;
    }
    if (robust_n > 0) a.robustness = robust / static_cast<double>(robust_n);
    report.aggregates.push_back(a);
  }
  return report;
}

std::string bench_csv(const BenchReport& report, const Schema& schema) {
  std::ostringstream os;
  os << "level,query,method,source,found,seesaw_pct,has_seesaw,tau_key,tau_hidden,key,hidden,"
        "distance,sparsity,plausibility,trustworthiness,robustness,n_found,n_queries\n";
  for (const auto& r : report.rows) {
    os << "query," << r.query << ',' << r.method << ',' << r.source << ',' << (r.found ? 1 : 0) << ",,";
    if (r.found) {
      os << (r.seesaw.has_seesaw ? 1 : 0) << ',' << num(r.seesaw.tau_key) << ','
         << num(r.seesaw.tau_best_hidden) << ',' << schema[r.seesaw.key_index].name << ','
         << schema[r.seesaw.hidden_index].name << ',' << num(r.scores.distance) << ','
         << num(r.scores.sparsity) << ',' << num(r.scores.plausibility) << ','
         << num(r.scores.trustworthiness) << ','
         << (r.scores.robustness_computed ? num(r.scores.robustness) : "");
    } else {
      os << ",,,,,,,,,";
    }
    os << ",,\n";
  }
  for (const auto& a : report.aggregates) {
    os << "aggregate,," << a.method << ",,," << num(a.seesaw_pct) << ",,,,,," << num(a.distance) << ','
       << num(a.sparsity) << ',' << num(a.plausibility) << ',' << num(a.trustworthiness) << ','
       << (a.robustness ? num(*a.robustness) : "") << ',' << a.found << ',' << a.queries << '\n';
  }
  return os.str();
}

nlohmann::json bench_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j{{"level", "query"}, {"query", r.query}, {"method", r.method}, {"found", r.found}};
    if (!r.source.empty()) j["source"] = r.source;
    if (!r.note.empty()) j["note"] = r.note;
    if (r.found) {
      j["x_sf"] = r.x_sf;
      j["metrics"] = to_json(r.scores);
      j["seesaw"] = {{"has_seesaw", r.seesaw.has_seesaw},
                     {"tau_key", r.seesaw.tau_key},
                     {"tau_best_hidden", r.seesaw.tau_best_hidden},
                     {"key_index", r.seesaw.key_index},
                     {"hidden_index", r.seesaw.hidden_index}};
    }
    rows.push_back(std::move(j));
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    nlohmann::json j{{"level", "aggregate"},
                     {"method", a.method},
                     {"queries", a.queries},
                     {"found", a.found},
                     {"seesaw", a.seesaw},
                     {"seesaw_pct", a.seesaw_pct},
                     {"distance", a.distance},
                     {"sparsity", a.sparsity},
                     {"plausibility", a.plausibility},
                     {"trustworthiness", a.trustworthiness}};
    j["robustness"] = a.robustness ? nlohmann::json(*a.robustness) : nlohmann::json(nullptr);
    aggs.push_back(std::move(j));
  }
  return {{"warnings", report.warnings}, {"n_queries", report.n_queries}, {"rows", rows}, {"aggregates", aggs}};
}

}  // namespace semifax
