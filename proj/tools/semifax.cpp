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

// semifax command-line tool: train, explain, bench, audit, gen-loan.
// Exit codes: 0 success, 2 usage or validation error, 3 no explanation found.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "semifax/artifact.hpp"
#include "semifax/bench.hpp"
#include "semifax/isf.hpp"

using namespace semifax;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNoCandidate = 3;

struct NoCandidate {};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string raw_text(const FeatureSchema& f, double encoded) {
  return f.kind == FeatureKind::categorical ? f.decode_category(encoded) : short_num(f.decode(encoded));
}

json raw_object(const Schema& schema, std::span<const double> x) {
  json o = json::object();
  for (std::size_t j = 0; j < schema.size(); ++j) o[schema[j].name] = schema[j].raw_json(x[j]);
  return o;
}

std::optional<TrendBand> parse_band(const std::string& text) {
  if (text.empty()) return std::nullopt;
  // Split on the ':' that separates the bounds, not a sign.
  const auto pos = text.find(':');
  if (pos == std::string::npos) throw ValidationError("--trend-band expects LOW:HIGH, got '" + text + "'");
  TrendBand b;
  try {
    b.low = std::stod(text.substr(0, pos));
    b.high = std::stod(text.substr(pos + 1));
  } catch (const std::exception&) {
    throw ValidationError("--trend-band expects LOW:HIGH, got '" + text + "'");
  }
  return b;
}

std::string band_quality(const std::optional<TrendBand>& b) {
  if (!b) return "";
  if (b->low == -1.0 && b->high == -0.8) return "good";
  if (b->low == -0.6 && b->high == -0.3) return "bad";
  return "custom";
}

// Query given as a CSV row of raw values in schema order, or a JSON object
// keyed by feature name.
Vector parse_query(const std::string& text, const Schema& schema) {
  Vector q(schema.size());
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("query is not valid JSON: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (const auto& f : schema) known = known || f.name == it.key();
      if (!known) throw ValidationError("query names unknown feature '" + it.key() + "'");
    }
    for (std::size_t k = 0; k < schema.size(); ++k) {
      if (!j.contains(schema[k].name)) throw ValidationError("query is missing feature '" + schema[k].name + "'");
      const auto& v = j.at(schema[k].name);
      q[k] = schema[k].encode_cell(v.is_string() ? v.get<std::string>() : v.dump());
    }
    return q;
  }
  const auto cells = split_csv_line(text);
  if (cells.size() != schema.size()) {
    throw ValidationError("query has " + std::to_string(cells.size()) + " values, schema has " +
                          std::to_string(schema.size()) + " features");
  }
  for (std::size_t k = 0; k < schema.size(); ++k) q[k] = schema[k].encode_cell(cells[k]);
  return q;
}

std::size_t feature_index(const Schema& schema, const std::string& name) {
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].name == name) return j;
  }
  throw ValidationError("unknown feature '" + name + "'");
}

json moo_json(const MooConfig& m) {
  return {{"pop", m.pop_size},           {"gens", m.generations}, {"sbx_prob", m.sbx_prob},
          {"sbx_eta", m.sbx_eta},        {"mut_prob", m.mut_prob}, {"mut_eta", m.mut_eta},
          {"init", m.init == InitMode::mixed ? "mixed" : "uniform"}};
}

json isf_json(const IsfConfig& c) {
  json j{{"epsilon", c.epsilon},
         {"theta", c.theta},
         {"steps", c.steps},
         {"hidden_min_tau", c.hidden_min_tau},
         {"snap_tolerance", c.snap_tolerance},
         {"moo", moo_json(c.moo)}};
  j["trend_band"] = c.trend_band ? json::array({c.trend_band->low, c.trend_band->high}) : json(nullptr);
  return j;
}

json model_json(const ModelArtifact& a, const std::string& path) {
  return {{"artifact", std::filesystem::path(path).filename().string()},
          {"artifact_version", a.version},
          {"dataset", a.dataset_name},
          {"dataset_hash", a.dataset_hash},
          {"schema_hash", schema_hash(a.schema())},
          {"background_size", a.background.rows.rows()}};
}

json tool_json(const std::string& command) {
  return {{"name", "semifax"}, {"version", kVersion}, {"command", command}};
}

// ---- gen-loan ---------------------------------------------------------------

struct GenLoanArgs {
  std::uint64_t seed = 7;
  std::size_t n = 1000;
  std::string out;
  std::string schema_out;
};

int cmd_gen_loan(const GenLoanArgs& a) {
  const Dataset d = gen_loan_scenario(a.seed, a.n);
  write_file(a.out, dataset_to_csv(d));
  std::string schema_path = a.schema_out;
  if (schema_path.empty()) schema_path = std::filesystem::path(a.out).replace_extension(".schema.json").string();
  write_file(schema_path, schema_to_json(d.schema).dump(2) + "\n");
  std::cout << json{{"tool", tool_json("gen-loan")}, {"seed", a.seed}, {"n", a.n},
                    {"csv", a.out}, {"schema", schema_path}}.dump(2)
            << '\n';
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string schema;
  std::string out;
  std::uint64_t seed = 7;
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_leaf = 2;
  double test_fraction = 0.2;
  std::size_t background = 64;
};

int cmd_train(const TrainArgs& a) {
  if (!std::filesystem::exists(a.schema)) throw ValidationError("schema file not found: " + a.schema);
  if (!std::filesystem::exists(a.data)) throw ValidationError("dataset file not found: " + a.data);
  Dataset full = load_csv(a.data, a.schema);
  full.name = std::filesystem::path(a.data).stem().string();
  TrainOptions opts;
  opts.forest.n_trees = a.n_trees;
  opts.forest.max_depth = a.max_depth;
  opts.forest.min_samples_leaf = a.min_leaf;
  opts.forest.seed = a.seed;
  opts.forest.threads = threads_from_env();
  opts.split = SplitSpec{a.seed, a.test_fraction};
  opts.background_size = a.background;
  const auto [artifact, test] = train_artifact(full, opts);
  save_artifact(artifact, a.out);
  const json summary{{"tool", tool_json("train")},
                     {"seed", a.seed},
                     {"config",
                      {{"n_trees", a.n_trees},
                       {"max_depth", a.max_depth},
                       {"min_samples_leaf", a.min_leaf},
                       {"test_fraction", a.test_fraction},
                       {"background", a.background}}},
                     {"dataset", full.name},
                     {"dataset_hash", artifact.dataset_hash},
                     {"train_size", artifact.train.size()},
                     {"test_size", test.size()},
                     {"train_accuracy", artifact.train_accuracy},
                     {"test_accuracy", artifact.test_accuracy},
                     {"artifact", a.out}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---- explain ----------------------------------------------------------------

struct ExplainArgs {
  std::string model;
  std::string query;
  std::string key;
  std::string trend_band;
  std::string class_names;
  std::string out;
  IsfConfig isf{};
};

std::string class_name(int cls, const std::string& names) {
  if (!names.empty()) {
    const auto parts = split_csv_line(names);
    if (parts.size() != 2) throw ValidationError("--class-names expects two comma-separated names");
    return parts[static_cast<std::size_t>(cls)];
  }
  return "class " + std::to_string(cls);
}

int cmd_explain(ExplainArgs a) {
  const ModelArtifact art = load_artifact(a.model);
  const Schema& schema = art.schema();
  a.isf.trend_band = parse_band(a.trend_band);
  a.isf.threads = threads_from_env();
  a.isf.validate();
  const Vector q = parse_query(a.query, schema);
  ExplainContext ctx{art.forest, art.copula, art.background, art.train};
  const int cls = art.forest.predict(q);

  std::optional<InformativeSemifactual> e;
  std::vector<KeyDiagnostics> diags;
  std::optional<std::size_t> key;
  if (!a.key.empty()) {
    key = feature_index(schema, a.key);
    auto out = explain_for_key(q, *key, ctx, a.isf);
    e = std::move(out.best);
    diags.push_back(out.diagnostics);
  } else {
    auto out = explain(q, ctx, a.isf);
    e = std::move(out.explanation);
    diags = std::move(out.per_key);
  }

  json report;
  report["tool"] = tool_json("explain");
  report["seed"] = a.isf.seed;
  report["config"] = isf_json(a.isf);
  report["config"]["key"] = key ? json(schema[*key].name) : json(nullptr);
  report["model"] = model_json(art, a.model);
  report["query"] = {{"raw", raw_object(schema, q)}, {"encoded", q}, {"class", cls},
                     {"class_name", class_name(cls, a.class_names)}};
  json per_key = json::array();
  for (const auto& d : diags) {
    per_key.push_back({{"key", schema[d.key].name},
                       {"pareto_size", d.pareto_size},
                       {"valid", d.valid},
                       {"traced", d.traced},
                       {"passing", d.passing},
                       {"best_tau", d.best_tau ? json(*d.best_tau) : json(nullptr)}});
  }
  report["per_key"] = per_key;
  const std::string quality = band_quality(a.isf.trend_band);
  report["quality"] = quality.empty() ? json(nullptr) : json(quality);

  if (!e) {
    report["status"] = "no_candidate";
    report["explanation"] = nullptr;
    emit(a.out, report.dump(2) + "\n");
    throw NoCandidate{};
  }
  report["status"] = "found";
  json trends = json::object();
  for (std::size_t j = 0; j < schema.size(); ++j) trends[schema[j].name] = e->trace.trends[j].tau;
  json path = json::array();
  for (std::size_t i = 0; i < e->path.points.size(); ++i) {
    const auto effects = e->trace.effects.row(i);
    path.push_back({{"t", e->path.t[i]},
                    {"encoded", e->path.points[i]},
                    {"raw", raw_object(schema, e->path.points[i])},
                    {"effects", Vector(effects.begin(), effects.end())}});
  }
  const auto& kf = schema[e->key_feature];
  const auto& hf = schema[e->hidden_feature];
  const std::string sentence = "Even if " + kf.name + " were " + raw_text(kf, e->x_sf[e->key_feature]) +
                               ", the outcome would still be " + class_name(cls, a.class_names) +
                               ", because of your " + hf.name + ".";
  report["explanation"] = {{"x_sf", {{"raw", raw_object(schema, e->x_sf)}, {"encoded", e->x_sf}}},
                           {"key_feature", kf.name},
                           {"hidden_feature", hf.name},
                           {"tau_key", e->tau_key},
                           {"tau_hidden", e->tau_hidden},
                           {"hidden_strong", e->hidden_strong},
                           {"trends", trends},
                           {"o1", e->o1},
                           {"o2", e->o2},
                           {"path", path},
                           {"metrics", to_json(e->metrics)},
                           {"sentence", sentence}};
  emit(a.out, report.dump(2) + "\n");
  return 0;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string model;
  std::string data;
  std::string schema;
  std::string methods = "isf,mdn,kleor,local_region,dser";
  std::string out_csv;
  std::string out_json;
  BenchConfig cfg{};
};

int cmd_bench(BenchArgs a) {
  const ModelArtifact art = load_artifact(a.model);
  if (!std::filesystem::exists(a.schema)) throw ValidationError("schema file not found: " + a.schema);
  Dataset full = load_csv(a.data, a.schema);
  const Dataset test = held_out(art, full);
  a.cfg.methods = split_csv_line(a.methods);
  a.cfg.threads = threads_from_env();
  a.cfg.dser.moo = a.cfg.isf.moo;
  a.cfg.validate();
  ExplainContext ctx{art.forest, art.copula, art.background, art.train};
  const BenchReport report = run_benchmark(test, ctx, a.cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  json j = bench_json(report);
  j["tool"] = tool_json("bench");
  j["seed"] = a.cfg.seed;
  j["config"] = {{"methods", a.cfg.methods},
                 {"n_queries", a.cfg.n_queries},
                 {"isf", isf_json(a.cfg.isf)},
                 {"dser",
                  {{"reject_threshold", a.cfg.dser.reject_threshold},
                   {"c", a.cfg.dser.c_feasible},
                   {"mu", a.cfg.dser.mu},
                   {"n_outputs", a.cfg.dser.n_outputs}}},
                 {"kleor_k", a.cfg.kleor_k},
                 {"local_min_per_class", a.cfg.local_min_per_class},
                 {"robustness", a.cfg.robustness},
                 {"robustness_radius", a.cfg.robustness_radius},
                 {"robustness_samples", a.cfg.robustness_samples},
                 {"robustness_in_ensemble", a.cfg.robustness_in_ensemble}};
  j["model"] = model_json(art, a.model);
  const std::string csv = bench_csv(report, art.schema());
  if (!a.out_csv.empty()) write_file(a.out_csv, csv);
  if (!a.out_json.empty()) write_file(a.out_json, j.dump(2) + "\n");

  std::cout << "method,found,queries,seesaw_pct,distance,sparsity,plausibility,trustworthiness\n";
  for (const auto& g : report.aggregates) {
    std::cout << g.method << ',' << g.found << ',' << g.queries << ',' << fixed1(g.seesaw_pct) << ','
              << short_num(g.distance) << ',' << short_num(g.sparsity) << ',' << short_num(g.plausibility)
              << ',' << short_num(g.trustworthiness) << '\n';
  }
  return 0;
}

// ---- audit ------------------------------------------------------------------

struct AuditArgs {
  std::string model;
  std::string pairs;
  std::string out;
  std::size_t steps = 10;
  SeesawThresholds thresholds{};
};

int cmd_audit(const AuditArgs& a) {
  const ModelArtifact art = load_artifact(a.model);
  const Schema& schema = art.schema();
  std::istringstream in(read_file(a.pairs));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("pairs file is empty");
  const auto header = split_csv_line(line);
  std::vector<std::size_t> q_col(schema.size()), sf_col(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto find = [&](const std::string& name) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw ValidationError("pairs file is missing column '" + name + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    q_col[j] = find("q_" + schema[j].name);
    sf_col[j] = find("sf_" + schema[j].name);
  }
  ExplainContext ctx{art.forest, art.copula, art.background, art.train};

  std::ostringstream csv;
  csv << "pair,valid,has_seesaw,tau_key,tau_hidden,key,hidden,note\n";
  std::size_t n_pairs = 0, n_valid = 0, n_seesaw = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    const std::size_t pair = n_pairs++;
    if (cells.size() != header.size()) {
      throw ValidationError("pairs row " + std::to_string(pair + 1) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(header.size()));
    }
    Vector q(schema.size()), sf(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      q[j] = schema[j].encode_cell(cells[q_col[j]]);
      sf[j] = schema[j].encode_cell(cells[sf_col[j]]);
    }
    try {
      const auto v = audit_seesaw(q, sf, ctx, a.steps, a.thresholds);
      ++n_valid;
      if (v.has_seesaw) ++n_seesaw;
      csv << pair << ",1," << (v.has_seesaw ? 1 : 0) << ',' << v.tau_key << ',' << v.tau_best_hidden << ','
          << schema[v.key_index].name << ',' << schema[v.hidden_index].name << ",\n";
    } catch (const ValidationError& e) {
      std::string note = e.what();
      std::replace(note.begin(), note.end(), ',', ';');
      csv << pair << ",0,,,,,," << note << '\n';
    }
  }
  if (n_pairs == 0) throw ValidationError("pairs file has no rows");
  const double pct = n_valid == 0 ? 0.0 : 100.0 * static_cast<double>(n_seesaw) / static_cast<double>(n_valid);
  if (!a.out.empty()) write_file(a.out, csv.str());
  const json summary{{"tool", tool_json("audit")},
                     {"model", model_json(art, a.model)},
                     {"config",
                      {{"steps", a.steps},
                       {"weakening", a.thresholds.weakening},
                       {"strengthening", a.thresholds.strengthening}}},
                     {"pairs", n_pairs},
                     {"valid", n_valid},
                     {"invalid", n_pairs - n_valid},
                     {"seesaw", n_seesaw},
                     {"seesaw_pct", fixed1(pct)}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

void add_isf_options(CLI::App* cmd, IsfConfig& isf) {
  cmd->add_option("--epsilon", isf.epsilon, "Key-feature weakening threshold")->capture_default_str();
  cmd->add_option("--theta", isf.theta, "Plausibility band half-width in log-pdf std units")->capture_default_str();
  cmd->add_option("--steps", isf.steps, "Intermediate interpolation points")->capture_default_str();
  cmd->add_option("--pop", isf.moo.pop_size, "NSGA-II population size")->capture_default_str();
  cmd->add_option("--gens", isf.moo.generations, "NSGA-II generations")->capture_default_str();
  cmd->add_option("--hidden-min-tau", isf.hidden_min_tau, "Strong hidden-feature threshold")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semifax: informative semi-factual explanations for tabular classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenLoanArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-loan", "Write the synthetic loan dataset and its schema");
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Number of rows")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "CSV output path")->required();
  gen_cmd->add_option("--schema-out", gen.schema_out, "Schema output path (default: next to the CSV)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit forest and copula, write the model artifact");
  train_cmd->add_option("--data", train.data, "Dataset CSV")->required();
  train_cmd->add_option("--schema", train.schema, "Schema JSON")->required();
  train_cmd->add_option("--out", train.out, "Model artifact path")->required();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--n-trees", train.n_trees)->capture_default_str();
  train_cmd->add_option("--max-depth", train.max_depth)->capture_default_str();
  train_cmd->add_option("--min-leaf", train.min_leaf)->capture_default_str();
  train_cmd->add_option("--test-fraction", train.test_fraction)->capture_default_str();
  train_cmd->add_option("--background", train.background, "Attribution background rows")->capture_default_str();

  ExplainArgs ex;
  ex.isf.seed = 7;
  auto* ex_cmd = app.add_subcommand("explain", "Find the informative semi-factual for one query");
  ex_cmd->add_option("--model", ex.model, "Model artifact")->required();
  ex_cmd->add_option("--query", ex.query, "CSV row of raw values in schema order, or a JSON object")->required();
  ex_cmd->add_option("--key", ex.key, "Restrict to one key feature");
  ex_cmd->add_option("--trend-band", ex.trend_band, "Key tau band LOW:HIGH, e.g. -1:-0.8");
  ex_cmd->add_option("--class-names", ex.class_names, "Names for class 0 and 1, comma separated");
  ex_cmd->add_option("--seed", ex.isf.seed)->capture_default_str();
  ex_cmd->add_option("--out", ex.out, "Report path (default: stdout)");
  add_isf_options(ex_cmd, ex.isf);

  BenchArgs bench;
  bench.cfg.seed = 7;
  auto* bench_cmd = app.add_subcommand("bench", "Compare ISF with the baseline ensemble");
  bench_cmd->add_option("--model", bench.model, "Model artifact")->required();
  bench_cmd->add_option("--data", bench.data, "Dataset CSV the model was trained on")->required();
  bench_cmd->add_option("--schema", bench.schema, "Schema JSON")->required();
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated subset of isf,mdn,kleor,local_region,dser")
      ->capture_default_str();
  bench_cmd->add_option("--n-queries", bench.cfg.n_queries)->capture_default_str();
  bench_cmd->add_option("--seed", bench.cfg.seed)->capture_default_str();
  bench_cmd->add_option("--out-csv", bench.out_csv, "Per-query and aggregate table");
  bench_cmd->add_option("--out-json", bench.out_json, "Full report");
  bench_cmd->add_flag("--robustness", bench.cfg.robustness, "Also compute robustness (slow)");
  bench_cmd->add_flag("--robustness-in-ensemble", bench.cfg.robustness_in_ensemble,
                      "Include robustness in the ensemble aggregate");
  add_isf_options(bench_cmd, bench.cfg.isf);

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Seesaw verdicts for (query, semi-factual) pairs");
  audit_cmd->add_option("--model", audit.model, "Model artifact")->required();
  audit_cmd->add_option("--pairs", audit.pairs, "CSV with q_<feature> and sf_<feature> columns")->required();
  audit_cmd->add_option("--out", audit.out, "Per-pair CSV");
  audit_cmd->add_option("--steps", audit.steps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_loan(gen);
    if (train_cmd->parsed()) return cmd_train(train);
    if (ex_cmd->parsed()) return cmd_explain(ex);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    if (audit_cmd->parsed()) return cmd_audit(audit);
  } catch (const NoCandidate&) {
    std::cerr << "no informative semi-factual found\n";
    return kExitNoCandidate;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
