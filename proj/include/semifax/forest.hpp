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

#ifndef SEMIFAX_FOREST_HPP
#define SEMIFAX_FOREST_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semifax/common.hpp"
#include "semifax/data.hpp"

namespace semifax {

// A node of a binary decision tree. Leaves have feature == -1 and carry the
// class counts of the bootstrap rows that reached them; internal nodes route
// x[feature] <= threshold to `left`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, 2> counts{0.0, 0.0};

  [[nodiscard]] bool is_leaf() const { return feature < 0; }
  [[nodiscard]] double class1_fraction() const { return counts[1] / (counts[0] + counts[1]); }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  [[nodiscard]] const TreeNode& leaf_for(std::span<const double> x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_samples_leaf = 2;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Bagged CART ensemble with soft voting.
class TreeEnsemble {
 public:
  TreeEnsemble() = default;
  TreeEnsemble(std::vector<DecisionTree> trees, std::size_t dim, ForestParams params);

  [[nodiscard]] std::array<double, 2> predict_proba(std::span<const double> x) const;
  [[nodiscard]] double class1_probability(std::span<const double> x) const;
  // Argmax of predict_proba; ties go to class 0.
  [[nodiscard]] int predict(std::span<const double> x) const;

  [[nodiscard]] const std::vector<DecisionTree>& trees() const { return trees_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] const ForestParams& params() const { return params_; }
  [[nodiscard]] double train_accuracy() const { return train_accuracy_; }
  void set_train_accuracy(double acc) { train_accuracy_ = acc; }

  [[nodiscard]] nlohmann::json to_json() const;
  static TreeEnsemble from_json(const nlohmann::json& j);

  bool operator==(const TreeEnsemble& o) const {
    return dim_ == o.dim_ && trees_ == o.trees_;
  }

 private:
  void check_dim(std::span<const double> x) const;

  std::vector<DecisionTree> trees_;
  std::size_t dim_ = 0;
  ForestParams params_;
  double train_accuracy_ = 0.0;
};

// CART with Gini impurity, bootstrap rows, and floor(sqrt(D)) candidate
// features per split. Tree t draws from derive_seed(seed, t).
TreeEnsemble fit_forest(const Dataset& train, const ForestParams& params);

double accuracy(const TreeEnsemble& m, const Dataset& d);

}  // namespace semifax

#endif  // SEMIFAX_FOREST_HPP
