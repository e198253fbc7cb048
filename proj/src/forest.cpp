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

#include "semifax/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semifax/rng.hpp"

namespace semifax {

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

TreeEnsemble::TreeEnsemble(std::vector<DecisionTree> trees, std::size_t dim, ForestParams params)
    : trees_(std::move(trees)), dim_(dim), params_(params) {
  if (trees_.empty()) throw Error("TreeEnsemble: no trees");
  for (const auto& t : trees_) {
    if (t.nodes.empty()) throw Error("TreeEnsemble: empty tree");
    const int n = static_cast<int>(t.nodes.size());
    for (const auto& node : t.nodes) {
      if (node.is_leaf()) {
        if (node.counts[0] < 0 || node.counts[1] < 0 || node.counts[0] + node.counts[1] <= 0) {
          throw Error("TreeEnsemble: leaf with invalid class counts");
        }
      } else if (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n ||
                 node.feature >= static_cast<int>(dim_)) {
        throw Error("TreeEnsemble: invalid child index or feature");
      }
    }
  }
}

void TreeEnsemble::check_dim(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw Error("predict: expected " + std::to_string(dim_) + " features, got " +
                std::to_string(x.size()));
  }
}

double TreeEnsemble::class1_probability(std::span<const double> x) const {
  check_dim(x);
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.leaf_for(x).class1_fraction();
  return sum / static_cast<double>(trees_.size());
}

std::array<double, 2> TreeEnsemble::predict_proba(std::span<const double> x) const {
  const double p1 = class1_probability(x);
  return {1.0 - p1, p1};
}

int TreeEnsemble::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  return p[1] > p[0] ? 1 : 0;
}

nlohmann::json TreeEnsemble::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["n_trees"] = params_.n_trees;
  j["max_depth"] = params_.max_depth;
  j["min_samples_leaf"] = params_.min_samples_leaf;
  j["seed"] = params_.seed;
  j["train_accuracy"] = train_accuracy_;
  auto trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1]});
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& j) {
  try {
    ForestParams p;
    p.n_trees = j.at("n_trees").get<std::size_t>();
    p.max_depth = j.at("max_depth").get<std::size_t>();
    p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    std::vector<DecisionTree> trees;
    for (const auto& jt : j.at("trees")) {
      DecisionTree t;
      for (const auto& jn : jt) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<int>();
        n.right = jn.at(3).get<int>();
        n.counts = {jn.at(4).get<double>(), jn.at(5).get<double>()};
        t.nodes.push_back(n);
      }
      trees.push_back(std::move(t));
    }
    TreeEnsemble m(std::move(trees), j.at("dim").get<std::size_t>(), p);
    m.train_accuracy_ = j.value("train_accuracy", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed forest artifact: ") + e.what());
  }
}

namespace {

double gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0) return 0.0;
  const double p0 = n0 / n;
  const double p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng) {
    const auto d = data.dim();
    mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  DecisionTree build(std::vector<std::size_t> sample) {
    tree_.nodes.clear();
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
  };

  int grow(std::vector<std::size_t> sample, std::size_t depth) {
    TreeNode node;
    for (std::size_t i : sample) node.counts[static_cast<std::size_t>(data_.labels[i])] += 1.0;
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    const bool pure = node.counts[0] == 0.0 || node.counts[1] == 0.0;
    if (pure || depth >= params_.max_depth || sample.size() < 2 * params_.min_samples_leaf) {
      return id;
    }
    const Split best = find_split(sample, node.counts);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : sample) {
      (data_.rows(i, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right)
          .push_back(i);
    }
    sample.clear();
    sample.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& n = tree_.nodes[static_cast<std::size_t>(id)];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.left = l;
    n.right = r;
    return id;
  }

  // Draws features in random order and scores the first mtry that are not
  // constant within the node. Ties keep the lowest feature, then the lowest
  // threshold.
  Split find_split(const std::vector<std::size_t>& sample, const std::array<double, 2>& counts) {
    const std::size_t d = data_.dim();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = d - 1; i > 0; --i) std::swap(order[i], order[rng_.below(i + 1)]);

    std::vector<std::size_t> chosen;
    std::vector<std::pair<double, int>> values(sample.size());
    for (std::size_t f : order) {
      if (chosen.size() == mtry_) break;
      double lo = kInf;
      double hi = -kInf;
      for (std::size_t i : sample) {
        lo = std::min(lo, data_.rows(i, f));
        hi = std::max(hi, data_.rows(i, f));
      }
      if (hi > lo) chosen.push_back(f);
    }
    std::sort(chosen.begin(), chosen.end());

    const double n = counts[0] + counts[1];
    const double parent = gini(counts[0], counts[1]);
    const auto min_leaf = static_cast<double>(params_.min_samples_leaf);
    Split best;
    for (std::size_t f : chosen) {
      for (std::size_t k = 0; k < sample.size(); ++k) {
        values[k] = {data_.rows(sample[k], f), data_.labels[sample[k]]};
      }
      std::sort(values.begin(), values.end());
      std::array<double, 2> left{0.0, 0.0};
      for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        left[static_cast<std::size_t>(values[k].second)] += 1.0;
        if (values[k].first == values[k + 1].first) continue;
        const double nl = left[0] + left[1];
        const double nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = parent - (nl / n) * gini(left[0], left[1]) -
                            (nr / n) * gini(counts[0] - left[0], counts[1] - left[1]);
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (values[k].first + values[k + 1].first);
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t mtry_ = 1;
  DecisionTree tree_;
};

}  // namespace

TreeEnsemble fit_forest(const Dataset& train, const ForestParams& params) {
  if (train.size() == 0) throw ValidationError("fit_forest: empty training set");
  if (params.n_trees == 0) throw ValidationError("fit_forest: n_trees must be >= 1");
  const auto positives = std::count(train.labels.begin(), train.labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(train.size())) {
    throw ValidationError("fit_forest: training data must contain both classes");
  }
  std::vector<DecisionTree> trees(params.n_trees);
  parallel_for(params.n_trees, params.threads, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::size_t> sample(train.size());
    for (auto& s : sample) s = rng.below(train.size());
    std::sort(sample.begin(), sample.end());
    TreeBuilder builder(train, params, rng);
    trees[t] = builder.build(std::move(sample));
  });
  TreeEnsemble m(std::move(trees), train.dim(), params);
  m.set_train_accuracy(accuracy(m, train));
  return m;
}

double accuracy(const TreeEnsemble& m, const Dataset& d) {
  if (d.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (m.predict(d.rows.row(i)) == d.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace semifax
