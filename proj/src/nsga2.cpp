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

#include "semifax/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semifax {

void MooConfig::validate() const {
  if (pop_size < 2) throw ValidationError("moo: pop_size must be >= 2");
  if (sbx_prob < 0 || sbx_prob > 1 || mut_prob < 0 || mut_prob > 1) {
    throw ValidationError("moo: probabilities must lie in [0, 1]");
  }
  if (!(sbx_eta > 0) || !(mut_eta > 0)) throw ValidationError("moo: distribution indices must be > 0");
}

bool constrained_dominates(const Candidate& a, const Candidate& b) {
  const bool fa = a.feasible();
  const bool fb = b.feasible();
  if (fa && !fb) return true;
  if (!fa && fb) return false;
  if (!fa && !fb) return a.violation < b.violation;
  bool strictly = false;
  for (std::size_t k = 0; k < 2; ++k) {
    if (a.objectives[k] > b.objectives[k]) return false;
    if (a.objectives[k] < b.objectives[k]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Candidate> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (constrained_dominates(pop[p], pop[q])) {
        dominated[p].push_back(q);
      } else if (constrained_dominates(pop[q], pop[p])) {
        ++count[p];
      }
    }
    if (count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

Vector crowding_distance(std::span<const Candidate> front) {
  const std::size_t n = front.size();
  Vector dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < 2; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return front[a].objectives[k] < front[b].objectives[k];
    });
    const double lo = front[order.front()].objectives[k];
    const double hi = front[order.back()].objectives[k];
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    if (!(hi > lo)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      dist[order[i]] += (front[order[i + 1]].objectives[k] - front[order[i - 1]].objectives[k]) / (hi - lo);
    }
  }
  return dist;
}

std::pair<double, double> sbx_gene(double p1, double p2, double u, double eta) {
  const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                               : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
  return {0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
          0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)};
}

double polynomial_delta(double u, double eta) {
  if (u < 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0)) - 1.0;
  return 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta + 1.0));
}

std::pair<Vector, Vector> sbx_crossover(std::span<const double> p1, std::span<const double> p2,
                                        std::span<const double> lower,
                                        std::span<const double> upper, const MooConfig& cfg,
                                        Rng& rng) {
  if (p1.size() != p2.size()) throw Error("sbx_crossover: parent length mismatch");
  Vector c1(p1.begin(), p1.end());
  Vector c2(p2.begin(), p2.end());
  for (std::size_t g = 0; g < p1.size(); ++g) {
    if (rng.uniform() >= cfg.sbx_prob) continue;
    const double u = rng.uniform();
    if (p1[g] == p2[g]) continue;
    const auto [a, b] = sbx_gene(p1[g], p2[g], u, cfg.sbx_eta);
    c1[g] = std::clamp(a, lower[g], upper[g]);
    c2[g] = std::clamp(b, lower[g], upper[g]);
  }
  return {std::move(c1), std::move(c2)};
}

Vector polynomial_mutation(std::span<const double> genome, std::span<const double> lower,
                           std::span<const double> upper, const MooConfig& cfg, Rng& rng) {
  Vector out(genome.begin(), genome.end());
  const double per_gene = genome.empty() ? 0.0 : cfg.mut_prob / static_cast<double>(genome.size());
  for (std::size_t g = 0; g < out.size(); ++g) {
    if (rng.uniform() >= per_gene) continue;
    const double u = rng.uniform();
    out[g] = std::clamp(out[g] + polynomial_delta(u, cfg.mut_eta) * (upper[g] - lower[g]), lower[g],
                        upper[g]);
  }
  return out;
}

namespace {

class Engine {
 public:
  Engine(const Problem& problem, const MooConfig& cfg, const std::vector<bool>& frozen)
      : problem_(problem), cfg_(cfg), rng_(cfg.seed), frozen_(frozen) {
    const std::size_t d = problem.dim();
    if (d == 0 || problem.upper.size() != d) throw ValidationError("evolve: bad bounds");
    for (std::size_t g = 0; g < d; ++g) {
      if (!(problem.lower[g] <= problem.upper[g])) throw ValidationError("evolve: lower > upper");
    }
    if (!problem.evaluate) throw ValidationError("evolve: missing evaluator");
    if (frozen_.empty()) frozen_.assign(d, false);
    if (frozen_.size() != d) throw ValidationError("evolve: frozen mask length mismatch");
    const bool any_frozen = std::any_of(frozen_.begin(), frozen_.end(), [](bool b) { return b; });
    if (any_frozen && problem.anchor.size() != d) {
      throw ValidationError("evolve: frozen genes need an anchor genome");
    }
    if (!problem.anchor.empty() && problem.anchor.size() != d) {
      throw ValidationError("evolve: anchor length mismatch");
    }
    for (std::size_t g = 0; g < d; ++g) {
      if (!frozen_[g]) free_genes_.push_back(g);
    }
    for (std::size_t g : problem.seed_genes) {
      if (g < d && !frozen_[g]) seed_genes_.push_back(g);
    }
    if (seed_genes_.empty()) seed_genes_ = free_genes_;
  }

  std::vector<Candidate> run(const GenerationObserver& observer) {
    std::vector<Candidate> pop = initial_population();
    evaluate(pop);
    rank(pop);
    if (observer) observer(0, pop);
    for (std::size_t gen = 1; gen <= cfg_.generations; ++gen) {
      std::vector<Candidate> offspring = make_offspring(pop);
      evaluate(offspring);
      pop.insert(pop.end(), std::make_move_iterator(offspring.begin()),
                 std::make_move_iterator(offspring.end()));
      pop = survive(std::move(pop));
      if (observer) observer(gen, pop);
    }
    std::vector<Candidate> front;
    for (const auto& c : pop) {
      if (c.rank != 0 || !c.feasible()) continue;
      if (is_duplicate(c.genome, front)) continue;
      front.push_back(c);
    }
    return front;
  }

 private:
  void finalize(Vector& g) {
    if (problem_.repair) problem_.repair(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (frozen_[k]) {
        g[k] = problem_.anchor[k];
      } else {
        g[k] = std::clamp(g[k], problem_.lower[k], problem_.upper[k]);
      }
    }
  }

  Vector random_genome() {
    Vector g = problem_.anchor.empty() ? problem_.lower : problem_.anchor;
    for (std::size_t k : free_genes_) g[k] = rng_.uniform(problem_.lower[k], problem_.upper[k]);
    return g;
  }

  std::vector<Candidate> initial_population() {
    std::vector<Candidate> pop(cfg_.pop_size);
    const bool seeded = cfg_.init == InitMode::mixed && !problem_.anchor.empty() && !seed_genes_.empty();
    const std::size_t n_seeded = seeded ? cfg_.pop_size / 2 : 0;
    for (std::size_t i = 0; i < cfg_.pop_size; ++i) {
      Vector g;
      if (i < n_seeded) {
        g = problem_.anchor;
        const std::size_t k = seed_genes_[rng_.below(seed_genes_.size())];
        g[k] = rng_.uniform(problem_.lower[k], problem_.upper[k]);
      } else {
        g = random_genome();
      }
      finalize(g);
      pop[i].genome = std::move(g);
    }
    return pop;
  }

  void evaluate(std::vector<Candidate>& pop) {
    parallel_for(pop.size(), cfg_.threads, [&](std::size_t i) {
      const Evaluation e = problem_.evaluate(pop[i].genome);
      if (!std::isfinite(e.objectives[0]) || !std::isfinite(e.objectives[1]) ||
          !std::isfinite(e.violation) || e.violation < 0) {
        throw Error("evolve: evaluator returned a non-finite or negative value");
      }
      pop[i].objectives = e.objectives;
      pop[i].violation = e.violation;
    });
  }

  static void rank(std::vector<Candidate>& pop) {
    const auto fronts = non_dominated_sort(pop);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
      std::vector<Candidate> members;
      members.reserve(fronts[r].size());
      for (std::size_t i : fronts[r]) members.push_back(pop[i]);
      const Vector cd = crowding_distance(members);
      for (std::size_t k = 0; k < fronts[r].size(); ++k) {
        pop[fronts[r][k]].rank = r;
        pop[fronts[r][k]].crowding = cd[k];
      }
    }
  }

  static bool better(const Candidate& a, const Candidate& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
  }

  const Candidate& tournament(const std::vector<Candidate>& pop) {
    const std::size_t a = rng_.below(pop.size());
    const std::size_t b = rng_.below(pop.size());
    return better(pop[b], pop[a]) ? pop[b] : pop[a];
  }

  static bool is_duplicate(const Vector& g, const std::vector<Candidate>& pool) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const Candidate& c) { return euclidean(g, c.genome) < 1e-9; });
  }

  std::vector<Candidate> make_offspring(const std::vector<Candidate>& pop) {
    std::vector<Candidate> offspring;
    offspring.reserve(cfg_.pop_size);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 20 * cfg_.pop_size;
    while (offspring.size() < cfg_.pop_size) {
      const Candidate& p1 = tournament(pop);
      const Candidate& p2 = tournament(pop);
      auto [c1, c2] = sbx_crossover(p1.genome, p2.genome, problem_.lower, problem_.upper, cfg_, rng_);
      for (Vector* child : {&c1, &c2}) {
        *child = polynomial_mutation(*child, problem_.lower, problem_.upper, cfg_, rng_);
        finalize(*child);
        ++attempts;
        const bool dup = attempts <= max_attempts &&
                         (is_duplicate(*child, pop) || is_duplicate(*child, offspring));
        if (dup || offspring.size() >= cfg_.pop_size) continue;
        Candidate c;
        c.genome = std::move(*child);
        offspring.push_back(std::move(c));
      }
    }
    return offspring;
  }

  std::vector<Candidate> survive(std::vector<Candidate> merged) {
    const auto fronts = non_dominated_sort(merged);
    std::vector<Candidate> next;
    next.reserve(cfg_.pop_size);
    for (std::size_t r = 0; r < fronts.size() && next.size() < cfg_.pop_size; ++r) {
      std::vector<Candidate> members;
      for (std::size_t i : fronts[r]) members.push_back(merged[i]);
      const Vector cd = crowding_distance(members);
      for (std::size_t k = 0; k < members.size(); ++k) {
        members[k].rank = r;
        members[k].crowding = cd[k];
      }
      if (next.size() + members.size() <= cfg_.pop_size) {
        next.insert(next.end(), members.begin(), members.end());
        continue;
      }
      std::vector<std::size_t> order(members.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return members[a].crowding > members[b].crowding;
      });
      for (std::size_t k : order) {
        if (next.size() >= cfg_.pop_size) break;
        next.push_back(members[k]);
      }
    }
    return next;
  }

  const Problem& problem_;
  const MooConfig& cfg_;
  Rng rng_;
  std::vector<bool> frozen_;
  std::vector<std::size_t> free_genes_;
  std::vector<std::size_t> seed_genes_;
};

}  // namespace

std::vector<Candidate> evolve(const Problem& problem, const MooConfig& cfg,
                              const std::vector<bool>& frozen, const GenerationObserver& observer) {
  cfg.validate();
  Engine engine(problem, cfg, frozen);
  return engine.run(observer);
}

}  // namespace semifax
