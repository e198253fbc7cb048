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

#ifndef SEMIFAX_DATA_HPP
#define SEMIFAX_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semifax/common.hpp"

namespace semifax {

enum class FeatureKind { numeric, categorical };

// One column of the feature space. Raw values live in [lower, upper] (numeric)
// or in `categories` (categorical); the encoded value is always in [0, 1].
struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> categories;
  bool actionable = true;
  // Categories ordered by descending training frequency (ties keep declared
  // order). Position i maps to code i / (m - 1). Filled at ingestion.
  std::vector<std::string> code_order;

  void validate() const;

  [[nodiscard]] double encode(double raw) const;
  [[nodiscard]] double encode_category(const std::string& value) const;
  [[nodiscard]] double decode(double encoded) const;
  [[nodiscard]] const std::string& decode_category(double encoded) const;
  // Nearest valid encoded value; identity for numeric features.
  [[nodiscard]] double snap(double encoded) const;
  // Encoded raw value as JSON (number or category string).
  [[nodiscard]] nlohmann::json raw_json(double encoded) const;
  // Parses a raw cell (number or category label) to its encoded value.
  [[nodiscard]] double encode_cell(const std::string& cell) const;

  bool operator==(const FeatureSchema&) const = default;
};

using Schema = std::vector<FeatureSchema>;

struct Dataset {
  Schema schema;
  Matrix rows;              // N x D, encoded and normalized
  std::vector<int> labels;  // class ids in {0, 1}
  std::string name;

  [[nodiscard]] std::size_t size() const { return rows.rows(); }
  [[nodiscard]] std::size_t dim() const { return schema.size(); }
  void validate() const;
  // Stable content hash over schema, rows and labels.
  [[nodiscard]] std::string hash() const;
};

struct SplitSpec {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

// Schema sidecar: JSON array of {name, kind, lower, upper, categories, actionable}.
Schema load_schema(const std::filesystem::path& path);
Schema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const Schema& schema);
std::string schema_hash(const Schema& schema);

// Reads a CSV whose header names every schema feature plus `label_column`.
// Errors carry the file line (header = 1) as the row, and the column name.
Dataset load_csv(const std::filesystem::path& csv_path,
                 const std::filesystem::path& schema_path,
                 const std::string& label_column = "label");
Dataset parse_csv(const std::string& text, Schema schema,
                  const std::string& label_column = "label",
                  std::string name = "dataset");

// Stratified, seeded train/test partition. Row order within each part follows
// the source order.
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices);

// Loan scenario: loan_amount in [0, 100] k$, credit_score in [300, 850].
// Accept (class 1) iff loan_amount <= kLoanIntercept + kLoanSlope * credit_score.
inline constexpr double kLoanIntercept = 1.0;
inline constexpr double kLoanSlope = 0.12;
Schema loan_schema();
int loan_label(double loan_k, double credit_score);
Dataset gen_loan_scenario(std::uint64_t seed, std::size_t n);

std::string dataset_to_csv(const Dataset& d, const std::string& label_column = "label");

// Splits one CSV line on commas, honoring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace semifax

#endif  // SEMIFAX_DATA_HPP
