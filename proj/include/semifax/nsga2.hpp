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

#ifndef SEMIFAX_NSGA2_HPP
#define SEMIFAX_NSGA2_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "semifax/common.hpp"
#include "semifax/rng.hpp"

namespace semifax {

struct Evaluation {
  std::array<double, 2> objectives{0.0, 0.0};  // both minimized
  double violation = 0.0;                      // summed constraint violation, >= 0
};

struct Candidate {
  Vector genome;
  std::array<double, 2> objectives{0.0, 0.0};
  double violation = 0.0;
  std::size_t rank = 0;
  double crowding = 0.0;

  [[nodiscard]] bool feasible() const { return violation == 0.0; }
};

enum class InitMode { uniform, mixed };

struct MooConfig {
  std::size_t pop_size = 50;
  std::size_t generations = 100;
  double sbx_prob = 0.9;
  double sbx_eta = 15.0;
  double mut_prob = 0.9;  // per individual; each gene mutates with mut_prob / D
  double mut_eta = 20.0;
  std::uint64_t seed = 0;
  InitMode init = InitMode::mixed;
  std::size_t threads = 1;

  void validate() const;
};

struct Problem {
  Vector lower;
  Vector upper;
  std::function<Evaluation(std::span<const double>)> evaluate;
  // Optional projection applied after every variation step (e.g. snapping
  // categorical codes).
  std::function<void(std::span<double>)> repair;
  // Optional reference genome: frozen genes are held at it, and in mixed
  // initialization half the population starts here with one of `seed_genes`
  // resampled.
  Vector anchor;
  std::vector<std::size_t> seed_genes;

  [[nodiscard]] std::size_t dim() const { return lower.size(); }
};

// Feasible beats infeasible; infeasible compare by violation; feasible compare
// by Pareto dominance (minimization).
bool constrained_dominates(const Candidate& a, const Candidate& b);

// Fronts of indices into pop, best first.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Candidate> pop);

// Crowding distance of each member of `front` (same order). Boundary members
// per objective get +inf.
Vector crowding_distance(std::span<const Candidate> front);

// SBX children for one gene given the uniform draw u, before clipping.
std::pair<double, double> sbx_gene(double p1, double p2, double u, double eta);
// Polynomial-mutation step as a fraction of the gene range for draw u.
double polynomial_delta(double u, double eta);

std::pair<Vector, Vector> sbx_crossover(std::span<const double> p1, std::span<const double> p2,
                                        std::span<const double> lower,
                                        std::span<const double> upper, const MooConfig& cfg,
                                        Rng& rng);
Vector polynomial_mutation(std::span<const double> genome, std::span<const double> lower,
                           std::span<const double> upper, const MooConfig& cfg, Rng& rng);

using GenerationObserver = std::function<void(std::size_t generation, std::span<const Candidate>)>;

// Constrained NSGA-II. Returns the de-duplicated feasible members of the final
// first front; empty when nothing feasible survived.
std::vector<Candidate> evolve(const Problem& problem, const MooConfig& cfg,
                              const std::vector<bool>& frozen = {},
                              const GenerationObserver& observer = nullptr);

}  // namespace semifax

#endif  // SEMIFAX_NSGA2_HPP
