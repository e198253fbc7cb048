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

#ifndef SEMIFAX_BENCH_HPP
#define SEMIFAX_BENCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semifax/baselines.hpp"
#include "semifax/isf.hpp"

namespace semifax {

struct BenchConfig {
  std::vector<std::string> methods{"isf", "mdn", "kleor", "local_region", "dser"};
  std::size_t n_queries = 100;
  std::uint64_t seed = 0;
  IsfConfig isf{};
  DserConfig dser{};
  std::size_t kleor_k = 3;
  std::size_t local_min_per_class = 200;
  bool robustness = false;
  double robustness_radius = 0.05;
  std::size_t robustness_samples = 10;
  bool robustness_in_ensemble = false;
  std::size_t threads = 1;

  // Throws ValidationError on an unknown method name.
  void validate() const;
};

// One (query, method) cell. method "ensemble_best" carries the winning
// baseline in `source`.
struct BenchRow {
  std::size_t query = 0;
  std::string method;
  std::string source;
  bool found = false;
  std::string note;
  Vector x_sf;
  EvaluationScores scores;
  SeesawVerdict seesaw;
  std::optional<InformativeSemifactual> explanation;  // isf rows only
};

struct BenchAggregate {
  std::string method;
  std::size_t queries = 0;
  std::size_t found = 0;
  std::size_t seesaw = 0;
  double seesaw_pct = 0.0;  // over found
  double distance = 0.0;
  double sparsity = 0.0;
  double plausibility = 0.0;
  double trustworthiness = 0.0;
  std::optional<double> robustness;
};

struct BenchReport {
  std::vector<std::string> warnings;
  std::size_t n_queries = 0;
  std::vector<BenchRow> rows;  // query-major, method order as configured, then ensemble_best
  std::vector<BenchAggregate> aggregates;
};

// Explains the first n_queries rows of `queries` with every configured method.
// The ensemble_best column is added when at least one baseline is configured.
BenchReport run_benchmark(const Dataset& queries, const ExplainContext& ctx, const BenchConfig& cfg);

std::string bench_csv(const BenchReport& report, const Schema& schema);
nlohmann::json bench_json(const BenchReport& report);

}  // namespace semifax

#endif  // SEMIFAX_BENCH_HPP
