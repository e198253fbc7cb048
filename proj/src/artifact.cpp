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

#include "semifax/artifact.hpp"

#include <fstream>
#include <sstream>

namespace semifax {

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(Vector(r.begin(), r.end()));
  }
  return rows;
}

Matrix matrix_from(const nlohmann::json& j, std::size_t cols) {
  Matrix m(0, cols);
  for (const auto& r : j) {
    const auto v = r.get<Vector>();
    if (v.size() != cols) throw ValidationError("artifact: row width does not match the schema");
    m.push_row(v);
  }
  return m;
}

}  // namespace

std::pair<ModelArtifact, Dataset> train_artifact(const Dataset& full, const TrainOptions& opts) {
  full.validate();
  auto [train, test] = split(full, opts.split);
  ModelArtifact a;
  a.dataset_name = full.name;
  a.dataset_hash = full.hash();
  a.split = opts.split;
  a.background_size = opts.background_size;
  a.forest = fit_forest(train, opts.forest);
  a.copula = fit_copula(train);
  a.background = sample_background(train.rows, opts.background_size, opts.forest.seed);
  a.train_accuracy = accuracy(a.forest, train);
  a.test_accuracy = accuracy(a.forest, test);
  a.train = std::move(train);
  return {std::move(a), std::move(test)};
}

nlohmann::json artifact_to_json(const ModelArtifact& a) {
  nlohmann::json j;
  j["version"] = a.version;
  j["dataset"] = {{"name", a.dataset_name}, {"hash", a.dataset_hash}};
  j["split"] = {{"seed", a.split.seed}, {"test_fraction", a.split.test_fraction}};
  j["schema"] = schema_to_json(a.train.schema);
  j["schema_hash"] = schema_hash(a.train.schema);
  j["train"] = {{"rows", matrix_json(a.train.rows)}, {"labels", a.train.labels}};
  j["forest"] = a.forest.to_json();
  j["copula"] = a.copula.to_json();
  j["background"] = {{"size", a.background_size}, {"seed", a.background.seed}, {"rows", matrix_json(a.background.rows)}};
  j["accuracy"] = {{"train", a.train_accuracy}, {"test", a.test_accuracy}};
  return j;
}

ModelArtifact artifact_from_json(const nlohmann::json& j) {
  try {
    ModelArtifact a;
    a.version = j.at("version").get<std::string>();
    a.dataset_name = j.at("dataset").at("name").get<std::string>();
    a.dataset_hash = j.at("dataset").at("hash").get<std::string>();
    a.split.seed = j.at("split").at("seed").get<std::uint64_t>();
    a.split.test_fraction = j.at("split").at("test_fraction").get<double>();
    a.train.schema = schema_from_json(j.at("schema"));
    if (schema_hash(a.train.schema) != j.at("schema_hash").get<std::string>()) {
      throw ValidationError("artifact: schema hash mismatch");
    }
    const std::size_t d = a.train.schema.size();
    a.train.name = a.dataset_name;
    a.train.rows = matrix_from(j.at("train").at("rows"), d);
    a.train.labels = j.at("train").at("labels").get<std::vector<int>>();
    a.train.validate();
    a.forest = TreeEnsemble::from_json(j.at("forest"));
    a.copula = CopulaModel::from_json(j.at("copula"));
    if (a.forest.dim() != d || a.copula.dim() != d) throw ValidationError("artifact: model dimension mismatch");
    a.background_size = j.at("background").at("size").get<std::size_t>();
    a.background.seed = j.at("background").at("seed").get<std::uint64_t>();
    a.background.rows = matrix_from(j.at("background").at("rows"), d);
    a.train_accuracy = j.at("accuracy").at("train").get<double>();
    a.test_accuracy = j.at("accuracy").at("test").get<double>();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("artifact: malformed JSON: ") + e.what());
  }
}

void save_artifact(const ModelArtifact& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << artifact_to_json(a).dump() << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read model artifact '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("model artifact '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return artifact_from_json(j);
}

Dataset held_out(const ModelArtifact& a, const Dataset& full) {
  if (full.hash() != a.dataset_hash) {
    throw ValidationError("dataset does not match the one the model was trained on (hash " + full.hash() +
                          " vs " + a.dataset_hash + ")");
  }
  return split(full, a.split).second;
}

}  // namespace semifax
