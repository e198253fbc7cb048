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

#ifndef SEMIFAX_ARTIFACT_HPP
#define SEMIFAX_ARTIFACT_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "semifax/attribution.hpp"
#include "semifax/copula.hpp"
#include "semifax/data.hpp"
#include "semifax/forest.hpp"

namespace semifax {

inline constexpr const char* kVersion = "0.1.0";

struct TrainOptions {
  ForestParams forest{};
  SplitSpec split{};
  std::size_t background_size = 64;
};

// Everything explain/bench/audit need: schema, training partition, model,
// density and background, plus the provenance to rebuild them.
struct ModelArtifact {
  std::string version = kVersion;
  std::string dataset_name;
  std::string dataset_hash;  // full dataset before splitting
  SplitSpec split{};
  std::size_t background_size = 0;
  Dataset train;
  TreeEnsemble forest;
  CopulaModel copula;
  BackgroundSet background;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;

  [[nodiscard]] const Schema& schema() const { return train.schema; }
};

// Splits, fits forest and copula, samples the background. Returns the artifact
// and the held-out partition.
std::pair<ModelArtifact, Dataset> train_artifact(const Dataset& full, const TrainOptions& opts);

nlohmann::json artifact_to_json(const ModelArtifact& a);
ModelArtifact artifact_from_json(const nlohmann::json& j);

void save_artifact(const ModelArtifact& a, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

// Re-splits `full` with the artifact's split spec after checking its hash.
Dataset held_out(const ModelArtifact& a, const Dataset& full);

}  // namespace semifax

#endif  // SEMIFAX_ARTIFACT_HPP
