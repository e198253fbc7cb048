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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "semifax/artifact.hpp"

using namespace semifax;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "semifax_test_artifact";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TrainOptions small() {
  TrainOptions o;
  o.forest.n_trees = 10;
  o.forest.seed = 7;
  o.split.seed = 7;
  return o;
}

}  // namespace

TEST_CASE("artifact round trip") {
  const auto full = gen_loan_scenario(7, 400);
  const auto [a, test] = train_artifact(full, small());
  CHECK(a.background.rows.rows() == 64);
  CHECK(a.background_size == 64);
  CHECK(a.train.size() + test.size() == full.size());
  CHECK(a.test_accuracy >= 0.0);
  CHECK(a.test_accuracy <= 1.0);

  const auto path = scratch("loan.json");
  save_artifact(a, path);
  const auto b = load_artifact(path);
  CHECK(b.forest == a.forest);
  CHECK(b.train.rows == a.train.rows);
  CHECK(b.background.rows == a.background.rows);
  CHECK(artifact_to_json(b).dump() == artifact_to_json(a).dump());
  CHECK(held_out(b, full).rows == test.rows);
}

TEST_CASE("training is reproducible") {
  const auto full = gen_loan_scenario(7, 300);
  const auto a = train_artifact(full, small()).first;
  const auto b = train_artifact(full, small()).first;
  CHECK(artifact_to_json(a).dump() == artifact_to_json(b).dump());
}

TEST_CASE("artifact validation") {
  const auto full = gen_loan_scenario(7, 300);
  const auto a = train_artifact(full, small()).first;
  auto j = artifact_to_json(a);
  j["schema_hash"] = "0000";
  CHECK_THROWS_AS(artifact_from_json(j), ValidationError);

  CHECK_THROWS_AS(held_out(a, gen_loan_scenario(8, 300)), ValidationError);
  CHECK_THROWS_AS(load_artifact(scratch("missing.json")), ValidationError);
  const auto junk = scratch("junk.json");
  std::ofstream(junk) << "{not json";
  CHECK_THROWS_AS(load_artifact(junk), ValidationError);
  std::ofstream(junk) << "{\"version\": \"0.1.0\"}";
  CHECK_THROWS_AS(load_artifact(junk), ValidationError);
}
