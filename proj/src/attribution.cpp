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

#include "semifax/attribution.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <unordered_map>

#include "semifax/rng.hpp"

namespace semifax {

namespace {

constexpr std::size_t kMaxMaskDim = 63;

void check_inputs(std::span<const double> x, const BackgroundSet& bg) {
  if (bg.rows.rows() == 0) throw ValidationError("attribution: empty background set");
  if (bg.rows.cols() != x.size()) throw ValidationError("attribution: background/query dimension mismatch");
  if (x.size() > kMaxMaskDim) throw ValidationError("attribution: more than 63 features");
}

// Coalition weights |S|! (n-|S|-1)! / n! for |S| = 0..n-1.
Vector shapley_weights(std::size_t n) {
  Vector w(n);
  for (std::size_t s = 0; s < n; ++s) {
    // Computed as 1 / (n * C(n-1, s)) to stay exact for moderate n.
    double binom = 1.0;
    for (std::size_t k = 0; k < s; ++k) {
      binom = binom * static_cast<double>(n - 1 - k) / static_cast<double>(k + 1);
    }
    w[s] = 1.0 / (static_cast<double>(n) * binom);
  }
  return w;
}

// Ternary accumulation of leaf values per partial coalition assignment.
// Digit f of a cell index is 0 (f must be absent), 1 (f must be present) or
// 2 (unconstrained).
class TernaryTable {
 public:
  explicit TernaryTable(std::size_t dim) : dim_(dim), pow3_(dim + 1, 1) {
    for (std::size_t f = 1; f <= dim; ++f) pow3_[f] = pow3_[f - 1] * 3;
    cells_.assign(pow3_[dim], 0.0);
    digits_.assign(dim, 2);
    free_index_ = 0;
    for (std::size_t f = 0; f < dim; ++f) free_index_ += 2 * pow3_[f];
  }

  void accumulate(const DecisionTree& tree, std::span<const double> x, std::span<const double> b) {
    walk(tree, 0, x, b, free_index_);
  }

  Vector finish(double scale) {
    for (std::size_t f = 0; f < dim_; ++f) {
      const std::size_t p = pow3_[f];
      for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
        if ((idx / p) % 3 != 2) continue;
        const double v = cells_[idx];
        if (v == 0.0) continue;
        cells_[idx - p] += v;
        cells_[idx - 2 * p] += v;
      }
    }
    const std::size_t n = std::size_t{1} << dim_;
    Vector table(n);
    for (std::size_t mask = 0; mask < n; ++mask) {
      std::size_t idx = 0;
      for (std::size_t f = 0; f < dim_; ++f) {
        if (mask & (std::size_t{1} << f)) idx += pow3_[f];
      }
      table[mask] = cells_[idx] * scale;
    }
    return table;
  }

 private:
  void walk(const DecisionTree& tree, int id, std::span<const double> x, std::span<const double> b,
            std::size_t idx) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      cells_[idx] += node.class1_fraction();
      return;
    }
    const auto f = static_cast<std::size_t>(node.feature);
    const int x_next = x[f] <= node.threshold ? node.left : node.right;
    const int b_next = b[f] <= node.threshold ? node.left : node.right;
    if (x_next == b_next) {
      walk(tree, x_next, x, b, idx);
      return;
    }
    const int saved = digits_[f];
    if (saved != 0) {  // x's branch: f in S
      digits_[f] = 1;
      walk(tree, x_next, x, b, saved == 2 ? idx - pow3_[f] : idx);
      digits_[f] = saved;
    }
    if (saved != 1) {  // background's branch: f not in S
      digits_[f] = 0;
      walk(tree, b_next, x, b, saved == 2 ? idx - 2 * pow3_[f] : idx);
      digits_[f] = saved;
    }
  }

  std::size_t dim_;
  std::vector<std::size_t> pow3_;
  std::vector<double> cells_;
  std::vector<int> digits_;
  std::size_t free_index_ = 0;
};

void compose(std::span<const double> x, std::span<const double> b, FeatureMask subset,
             std::span<double> out) {
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (subset >> j) & 1U ? x[j] : b[j];
}

// Shapley values and main effects from an interaction matrix.
AttributionVector diagonal_of(const Matrix& inter, double base, double fx) {
  AttributionVector out;
  out.values.resize(inter.rows());
  for (std::size_t i = 0; i < inter.rows(); ++i) out.values[i] = inter(i, i);
  out.base_value = base;
  out.fx = fx;
  return out;
}

}  // namespace

AttributionModel::AttributionModel(const TreeEnsemble& forest) : forest_(&forest) {}

AttributionModel::AttributionModel(ModelFn fn) : fn_(std::move(fn)) {
  if (!fn_) throw Error("AttributionModel: empty function");
}

double AttributionModel::operator()(std::span<const double> x) const {
  return forest_ != nullptr ? forest_->class1_probability(x) : fn_(x);
}

BackgroundSet sample_background(const Matrix& train_rows, std::size_t k, std::uint64_t seed) {
  if (train_rows.rows() == 0 || k == 0) throw ValidationError("sample_background: empty input");
  BackgroundSet bg;
  bg.seed = seed;
  bg.rows = Matrix(0, train_rows.cols());
  std::vector<std::size_t> idx(train_rows.rows());
  std::iota(idx.begin(), idx.end(), 0);
  if (k < idx.size()) {
    Rng rng(seed);
    // Partial Fisher-Yates: the first k slots form the sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  for (std::size_t i : idx) bg.rows.push_row(train_rows.row(i));
  return bg;
}

double value_function(const AttributionModel& m, std::span<const double> x, FeatureMask subset,
                      const BackgroundSet& bg) {
  check_inputs(x, bg);
  Vector z(x.size());
  double sum = 0.0;
  for (std::size_t r = 0; r < bg.rows.rows(); ++r) {
    compose(x, bg.rows.row(r), subset, z);
    sum += m(z);
  }
  return sum / static_cast<double>(bg.rows.rows());
}

Vector value_table(const AttributionModel& m, std::span<const double> x, const BackgroundSet& bg) {
  check_inputs(x, bg);
  const std::size_t d = x.size();
  if (d > 24) throw ValidationError("value_table: dimension too large for a full table");
  if (const TreeEnsemble* forest = m.forest()) {
    if (forest->dim() != d) throw ValidationError("value_table: model/query dimension mismatch");
    TernaryTable tern(d);
    for (const auto& tree : forest->trees()) {
      for (std::size_t r = 0; r < bg.rows.rows(); ++r) tern.accumulate(tree, x, bg.rows.row(r));
    }
    const double scale =
        1.0 / (static_cast<double>(forest->trees().size()) * static_cast<double>(bg.rows.rows()));
    return tern.finish(scale);
  }
  const std::size_t n = std::size_t{1} << d;
  Vector table(n);
  for (std::size_t mask = 0; mask < n; ++mask) table[mask] = value_function(m, x, mask, bg);
  return table;
}

Vector shapley_from_table(std::span<const double> table, std::size_t dim) {
  const Vector w = shapley_weights(dim);
  Vector phi(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t s = 0; s < table.size(); ++s) {
      if (s & bit) continue;
      phi[i] += w[static_cast<std::size_t>(std::popcount(s))] * (table[s | bit] - table[s]);
    }
  }
  return phi;
}

Matrix interactions_from_table(std::span<const double> table, std::size_t dim) {
  Matrix inter(dim, dim, 0.0);
  const Vector phi = shapley_from_table(table, dim);
  if (dim >= 2) {
    // Pair weights |S|! (n-|S|-2)! / (n-1)! are Shapley weights over n-1 players.
    const Vector w = shapley_weights(dim - 1);
    for (std::size_t i = 0; i < dim; ++i) {
      const std::size_t bi = std::size_t{1} << i;
      for (std::size_t j = i + 1; j < dim; ++j) {
        const std::size_t bj = std::size_t{1} << j;
        double sum = 0.0;
        for (std::size_t s = 0; s < table.size(); ++s) {
          if (s & (bi | bj)) continue;
          const double delta = table[s | bi | bj] - table[s | bi] - table[s | bj] + table[s];
          sum += w[static_cast<std::size_t>(std::popcount(s))] * delta;
        }
        inter(i, j) = 0.5 * sum;
        inter(j, i) = 0.5 * sum;
      }
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      if (j != i) off += inter(i, j);
    }
    inter(i, i) = phi[i] - off;
  }
  return inter;
}

std::pair<AttributionVector, AttributionVector> sampled_attributions(
    const AttributionModel& m, std::span<const double> x, const BackgroundSet& bg,
    std::size_t permutations, std::uint64_t seed) {
  check_inputs(x, bg);
  if (permutations == 0) throw ValidationError("sampled_attributions: need >= 1 permutation");
  const std::size_t d = x.size();
  std::unordered_map<FeatureMask, double> memo;
  auto v = [&](FeatureMask s) {
    const auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const double val = value_function(m, x, s, bg);
    memo.emplace(s, val);
    return val;
  };

  Rng rng(seed);
  Vector marginal(d, 0.0);
  Matrix pair_sum(d, d, 0.0);
  std::vector<std::size_t> perm(d);
  std::vector<std::size_t> pos(d);
  for (std::size_t it = 0; it < permutations; ++it) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = d - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (std::size_t p = 0; p < d; ++p) pos[perm[p]] = p;
    FeatureMask before = 0;
    for (std::size_t p = 0; p < d; ++p) {
      const std::size_t i = perm[p];
      const FeatureMask bi = FeatureMask{1} << i;
      marginal[i] += v(before | bi) - v(before);
      // With j removed, the predecessors of i follow the pair-interaction
      // coalition distribution over the remaining n-1 players.
      for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        const FeatureMask bj = FeatureMask{1} << j;
        const FeatureMask s = pos[j] < p ? (before & ~bj) : before;
        pair_sum(i, j) += v(s | bi | bj) - v(s | bi) - v(s | bj) + v(s);
      }
      before |= bi;
    }
  }
  const auto mcount = static_cast<double>(permutations);
  const double base = v(0);
  const double fx = m(x);
  AttributionVector classic{Vector(d), base, fx, false};
  AttributionVector main{Vector(d), base, fx, false};
  for (std::size_t i = 0; i < d; ++i) {
    classic.values[i] = marginal[i] / mcount;
    double off = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (j != i) off += 0.25 * (pair_sum(i, j) + pair_sum(j, i)) / mcount;
    }
    main.values[i] = classic.values[i] - off;
  }
  return {classic, main};
}

AttributionVector shapley_values(const AttributionModel& m, std::span<const double> x,
                                 const BackgroundSet& bg, const AttributionOptions& opts) {
  check_inputs(x, bg);
  const std::size_t d = x.size();
  if (d > opts.exact_limit) {
    if (!opts.allow_sampling) {
      throw ValidationError("shapley_values: dimension " + std::to_string(d) +
                            " exceeds exact_limit and sampling is disabled");
    }
    return sampled_attributions(m, x, bg, opts.permutations, opts.seed).first;
  }
  const Vector table = value_table(m, x, bg);
  return {shapley_from_table(table, d), table[0], m(x), true};
}

Matrix interaction_matrix(const AttributionModel& m, std::span<const double> x,
                          const BackgroundSet& bg, const AttributionOptions& opts) {
  check_inputs(x, bg);
  if (x.size() > opts.exact_limit) {
    throw ValidationError("interaction_matrix: dimension exceeds exact_limit");
  }
  const Vector table = value_table(m, x, bg);
  return interactions_from_table(table, x.size());
}

AttributionVector main_effects(const AttributionModel& m, std::span<const double> x,
                               const BackgroundSet& bg, const AttributionOptions& opts) {
  check_inputs(x, bg);
  const std::size_t d = x.size();
  if (d > opts.exact_limit) {
    if (!opts.allow_sampling) {
      throw ValidationError("main_effects: dimension " + std::to_string(d) +
                            " exceeds exact_limit and sampling is disabled");
    }
    return sampled_attributions(m, x, bg, opts.permutations, opts.seed).second;
  }
  const Vector table = value_table(m, x, bg);
  return diagonal_of(interactions_from_table(table, d), table[0], m(x));
}

}  // namespace semifax
