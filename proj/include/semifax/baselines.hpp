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

#ifndef SEMIFAX_BASELINES_HPP
#define SEMIFAX_BASELINES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semifax/copula.hpp"
#include "semifax/data.hpp"
#include "semifax/forest.hpp"
#include "semifax/metrics.hpp"
#include "semifax/nsga2.hpp"

namespace semifax {

// Enum order doubles as the ensemble tie-break.
enum class Method { mdn, kleor, local_region, dser };

std::string to_string(Method m);
std::optional<Method> method_from_string(const std::string& name);

struct BaselineResult {
  Method method = Method::mdn;
  Vector x_sf;
  double score = 0.0;  // method-native
  std::map<std::string, std::string> diagnostics;
};

// Numeric features count as the same within this fraction of their training std.
inline constexpr double kMdnSameFraction = 0.2;

// same / F + diff / diff_max; the second term is 0 when diff_max is 0.
double sfs_score(std::size_t same, std::size_t n_features, double diff, double diff_max);

// Most distant neighbor over the per-feature Higher/Lower sets of training rows
// the model puts in the query's class. Ties go to the lower row index.
BaselineResult mdn(std::span<const double> q, const Dataset& train, const TreeEnsemble& m);

// Attr-Sim: maximizes -|x - nun| plus the number of features on which x is
// closer to q than the NUN is. k_nn neighbors vote the class of each
// training row when picking the NUN.
BaselineResult kleor_attr_sim(std::span<const double> q, const Dataset& train,
                              const TreeEnsemble& m, std::size_t k_nn = 3);

// Logistic surrogate on the nearest min_per_class rows of each class; returns the
// in-class row with the lowest surrogate query-class probability that is still
// >= 0.5.
BaselineResult local_region(std::span<const double> q, const Dataset& train,
                            const TreeEnsemble& m, std::size_t min_per_class = 200);

struct DserConfig {
  double reject_threshold = 0.4;
  double c_feasible = 1.0;
  double c_sf = 1.0;
  double c_sparse = 1.0;
  double c_similar = 1.0;
  double c_diverse = 1.0;
  double mu = 2.0;
  std::size_t n_outputs = 4;
  MooConfig moo{};
  std::uint64_t seed = 0;
};

// 1 - max class probability.
double reject_score(const TreeEnsemble& m, std::span<const double> x);

struct DserLoss {
  double feasible = 0.0;
  double sparse = 0.0;
  double similar = 0.0;
  double diverse = 0.0;
  [[nodiscard]] double total() const { return feasible + sparse + similar + diverse; }
};

// `used` marks features changed by earlier outputs.
DserLoss dser_loss(double r_x, double r_q, std::span<const double> x, std::span<const double> q,
                   const std::vector<bool>& used, const DserConfig& cfg);

// nullopt when no run produced a same-class candidate.
std::optional<BaselineResult> dser(std::span<const double> q, const Dataset& train,
                                   const TreeEnsemble& m, const CopulaModel& density,
                                   const DserConfig& cfg);

// Min-max normalizes each metric across results (lower-is-better metrics
// inverted), sums and returns the index of the best. Robustness joins only when
// include_robustness is set.
std::size_t ensemble_best(const std::vector<BaselineResult>& results,
                          const std::vector<EvaluationScores>& scores,
                          bool include_robustness = false);

}  // namespace semifax

#endif  // SEMIFAX_BASELINES_HPP
