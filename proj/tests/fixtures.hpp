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

#ifndef SEMIFAX_TESTS_FIXTURES_HPP
#define SEMIFAX_TESTS_FIXTURES_HPP

#include <string>
#include <vector>

#include "semifax/data.hpp"
#include "semifax/rng.hpp"

namespace fixtures {

inline semifax::Schema unit_schema(std::size_t d) {
  semifax::Schema s;
  for (std::size_t j = 0; j < d; ++j) {
    semifax::FeatureSchema f;
    f.name = "f" + std::to_string(j);
    f.lower = 0.0;
    f.upper = 1.0;
    s.push_back(f);
  }
  return s;
}

inline semifax::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                     const std::vector<int>& labels) {
  semifax::Dataset d;
  d.schema = unit_schema(rows.front().size());
  d.rows = semifax::Matrix(0, rows.front().size());
  for (const auto& r : rows) d.rows.push_row(r);
  d.labels = labels;
  d.name = "fixture";
  return d;
}

// Uniform rows in [0,1]^d labelled by a rule.
template <class Rule>
semifax::Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed, Rule rule) {
  semifax::Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(d);
    for (auto& v : r) v = rng.uniform();
    labels.push_back(rule(r));
    rows.push_back(std::move(r));
  }
  return make_dataset(rows, labels);
}

}  // namespace fixtures

#endif  // SEMIFAX_TESTS_FIXTURES_HPP
