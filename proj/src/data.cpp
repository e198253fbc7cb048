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

#include "semifax/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "semifax/rng.hpp"

namespace semifax {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void FeatureSchema::validate() const {
  if (name.empty()) throw ValidationError("feature with empty name");
  if (kind == FeatureKind::numeric) {
    if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper)) {
      throw ValidationError("feature '" + name + "': lower must be < upper");
    }
  } else {
    if (categories.empty()) {
      throw ValidationError("feature '" + name + "': categorical feature needs categories");
    }
    std::set<std::string> seen(categories.begin(), categories.end());
    if (seen.size() != categories.size()) {
      throw ValidationError("feature '" + name + "': duplicate categories");
    }
  }
}

double FeatureSchema::encode(double raw) const {
  return (raw - lower) / (upper - lower);
}

double FeatureSchema::decode(double encoded) const {
  if (kind == FeatureKind::categorical) return snap(encoded);
  return lower + encoded * (upper - lower);
}

double FeatureSchema::encode_category(const std::string& value) const {
  const auto& order = code_order.empty() ? categories : code_order;
  const auto it = std::find(order.begin(), order.end(), value);
  if (it == order.end()) {
    throw ValidationError("feature '" + name + "': unknown category '" + value + "'");
  }
  if (order.size() == 1) return 0.0;
  return static_cast<double>(it - order.begin()) / static_cast<double>(order.size() - 1);
}

const std::string& FeatureSchema::decode_category(double encoded) const {
  const auto& order = code_order.empty() ? categories : code_order;
  if (order.size() == 1) return order.front();
  const double scaled = std::clamp(encoded, 0.0, 1.0) * static_cast<double>(order.size() - 1);
  return order[static_cast<std::size_t>(std::lround(scaled))];
}

double FeatureSchema::snap(double encoded) const {
  if (kind == FeatureKind::numeric) return encoded;
  const std::size_t m = categories.size();
  if (m == 1) return 0.0;
  const double scaled = std::clamp(encoded, 0.0, 1.0) * static_cast<double>(m - 1);
  return std::round(scaled) / static_cast<double>(m - 1);
}

nlohmann::json FeatureSchema::raw_json(double encoded) const {
  if (kind == FeatureKind::categorical) return decode_category(encoded);
  return decode(encoded);
}

double FeatureSchema::encode_cell(const std::string& cell) const {
  if (kind == FeatureKind::categorical) return encode_category(trim(cell));
  double raw = 0.0;
  if (!parse_double(cell, raw)) {
    throw ValidationError("feature '" + name + "': cannot parse '" + cell + "' as a number");
  }
  if (raw < lower || raw > upper) {
    throw ValidationError("feature '" + name + "': value " + trim(cell) +
                          " outside declared bounds");
  }
  return encode(raw);
}

void Dataset::validate() const {
  if (rows.rows() != labels.size()) throw ValidationError("row count != label count");
  if (rows.rows() > 0 && rows.cols() != schema.size()) {
    throw ValidationError("column count != schema length");
  }
  for (const auto& f : schema) f.validate();
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be binary");
    for (double v : rows.row(i)) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("encoded value outside [0,1]");
    }
  }
}

std::string Dataset::hash() const {
  nlohmann::json j;
  j["schema"] = schema_to_json(schema);
  j["rows"] = rows.data();
  j["labels"] = labels;
  return hex64(fnv1a(j.dump()));
}

Schema schema_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("schema must be a JSON array");
  Schema schema;
  for (const auto& f : j) {
    FeatureSchema fs;
    try {
      fs.name = f.at("name").get<std::string>();
      const auto kind = f.value("kind", std::string("numeric"));
      if (kind == "numeric") {
        fs.kind = FeatureKind::numeric;
        fs.lower = f.at("lower").get<double>();
        fs.upper = f.at("upper").get<double>();
      } else if (kind == "categorical") {
        fs.kind = FeatureKind::categorical;
        fs.categories = f.at("categories").get<std::vector<std::string>>();
        fs.lower = 0.0;
        fs.upper = 1.0;
      } else {
        throw ValidationError("feature '" + fs.name + "': unknown kind '" + kind + "'");
      }
      fs.actionable = f.value("actionable", true);
      if (f.contains("code_order")) {
        fs.code_order = f.at("code_order").get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed schema entry: ") + e.what());
    }
    fs.validate();
    schema.push_back(std::move(fs));
  }
  std::set<std::string> names;
  for (const auto& f : schema) {
    if (!names.insert(f.name).second) throw ValidationError("duplicate feature name '" + f.name + "'");
  }
  return schema;
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : schema) {
    nlohmann::json j;
    j["name"] = f.name;
    j["kind"] = f.kind == FeatureKind::numeric ? "numeric" : "categorical";
    j["lower"] = f.lower;
    j["upper"] = f.upper;
    j["categories"] = f.categories;
    j["actionable"] = f.actionable;
    if (!f.code_order.empty()) j["code_order"] = f.code_order;
    out.push_back(std::move(j));
  }
  return out;
}

std::string schema_hash(const Schema& schema) {
  return hex64(fnv1a(schema_to_json(schema).dump()));
}

Schema load_schema(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("schema " + path.string() + ": " + e.what());
  }
  return schema_from_json(j);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

Dataset parse_csv(const std::string& text, Schema schema, const std::string& label_column,
                  std::string name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col_of;
  for (std::size_t c = 0; c < header.size(); ++c) col_of[trim(header[c])] = c;

  std::vector<std::size_t> feature_cols;
  for (const auto& f : schema) {
    const auto it = col_of.find(f.name);
    if (it == col_of.end()) throw ValidationError("CSV is missing column '" + f.name + "'");
    feature_cols.push_back(it->second);
  }
  const auto label_it = col_of.find(label_column);
  if (label_it == col_of.end()) {
    throw ValidationError("CSV is missing label column '" + label_column + "'");
  }

  std::vector<std::vector<std::string>> cells;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto parts = split_csv_line(line);
    if (parts.size() != header.size()) {
      throw ValidationError("row " + std::to_string(row_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(parts.size()));
    }
    parts.push_back(std::to_string(row_no));
    cells.push_back(std::move(parts));
  }

  // Frequency-rank code order for categoricals (most frequent first).
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto& f = schema[j];
    if (f.kind != FeatureKind::categorical) continue;
    std::map<std::string, std::size_t> freq;
    for (const auto& r : cells) ++freq[trim(r[feature_cols[j]])];
    std::vector<std::size_t> order(f.categories.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return freq[f.categories[a]] > freq[f.categories[b]];
    });
    f.code_order.clear();
    for (std::size_t i : order) f.code_order.push_back(f.categories[i]);
  }

  Dataset d;
  d.name = std::move(name);
  d.schema = schema;
  d.rows = Matrix(0, schema.size());
  std::vector<double> buf(schema.size());
  for (const auto& r : cells) {
    const std::string& rn = r.back();
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string& cell = r[feature_cols[j]];
      if (trim(cell).empty()) {
        throw ValidationError("row " + rn + ", column '" + schema[j].name + "': missing value");
      }
      try {
        buf[j] = schema[j].encode_cell(cell);
      } catch (const ValidationError& e) {
        throw ValidationError("row " + rn + ", column '" + schema[j].name + "': " + e.what());
      }
    }
    const std::string lab = trim(r[label_it->second]);
    if (lab != "0" && lab != "1") {
      throw ValidationError("row " + rn + ", column '" + label_column + "': label must be 0 or 1");
    }
    d.rows.push_row(buf);
    d.labels.push_back(lab == "1" ? 1 : 0);
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                 const std::string& label_column) {
  Schema schema = load_schema(schema_path);
  return parse_csv(read_file(csv_path), std::move(schema), label_column,
                   csv_path.stem().string());
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.schema = d.schema;
  out.name = d.name;
  out.rows = Matrix(0, d.dim());
  for (std::size_t i : indices) {
    out.rows.push_row(d.rows.row(i));
    out.labels.push_back(d.labels[i]);
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ValidationError("split: test_fraction must lie in (0, 1)");
  }
  if (d.size() < 2) throw ValidationError("split: need at least 2 rows");
  Rng rng(spec.seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw ValidationError("split: class " + std::to_string(cls) + " has fewer than 2 members");
    }
    // Fisher-Yates with the portable integer draw.
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.below(i + 1)]);
    }
    auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(members.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<long>(n_test));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<long>(n_test), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset(d, train_idx), subset(d, test_idx)};
}

Schema loan_schema() {
  FeatureSchema loan{.name = "loan_amount", .kind = FeatureKind::numeric, .lower = 0.0,
                     .upper = 100.0, .categories = {}, .actionable = true, .code_order = {}};
  FeatureSchema credit{.name = "credit_score", .kind = FeatureKind::numeric, .lower = 300.0,
                       .upper = 850.0, .categories = {}, .actionable = true, .code_order = {}};
  return {loan, credit};
}

int loan_label(double loan_k, double credit_score) {
  return loan_k <= kLoanIntercept + kLoanSlope * credit_score ? 1 : 0;
}

Dataset gen_loan_scenario(std::uint64_t seed, std::size_t n) {
  if (n < 50) throw ValidationError("gen_loan_scenario: n must be >= 50");
  Dataset d;
  d.name = "loan";
  d.schema = loan_schema();
  d.rows = Matrix(0, 2);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double loan = rng.uniform(0.0, 100.0);
    const double credit = rng.uniform(300.0, 850.0);
    const std::array<double, 2> row{d.schema[0].encode(loan), d.schema[1].encode(credit)};
    d.rows.push_row(row);
    d.labels.push_back(loan_label(loan, credit));
  }
  return d;
}

std::string dataset_to_csv(const Dataset& d, const std::string& label_column) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& f : d.schema) out << f.name << ',';
  out << label_column << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.dim(); ++j) {
      const auto& f = d.schema[j];
      if (f.kind == FeatureKind::categorical) {
        out << f.decode_category(d.rows(i, j));
      } else {
        out << f.decode(d.rows(i, j));
      }
      out << ',';
    }
    out << d.labels[i] << '\n';
  }
  return out.str();
}

}  // namespace semifax
