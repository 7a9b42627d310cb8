#include "creditbench/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "creditbench/errors.hpp"
#include "json.hpp"

namespace creditbench {

namespace {

using json = nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

DatasetSchema schema_from_json(const json& j) {
  check_keys(j, {"name", "columns", "default_label", "non_default_label", "missing_tokens"}, "schema");
  DatasetSchema s;
  s.name = get_or<std::string>(j, "name", "", "schema");
  s.default_label = get_or<std::string>(j, "default_label", "", "schema");
  s.non_default_label = get_or<std::string>(j, "non_default_label", "", "schema");
  const auto tokens = get_or<std::vector<std::string>>(j, "missing_tokens", {"NA", ""}, "schema");
  if (!j.contains("columns") || !j["columns"].is_array()) throw ConfigError("schema " + s.name + ": 'columns' array required");
  for (const auto& c : j["columns"]) {
    check_keys(c, {"name", "kind", "missing_tokens"}, "schema column");
    ColumnSchema col;
    col.name = get_or<std::string>(c, "name", "", "schema column");
    if (col.name.empty()) throw ConfigError("schema " + s.name + ": column without a name");
    try {
      col.kind = column_kind_from_string(get_or<std::string>(c, "kind", "numeric", "schema column"));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    col.missing_tokens = get_or<std::vector<std::string>>(c, "missing_tokens", tokens, "schema column");
    s.columns.push_back(std::move(col));
  }
  try {
    s.validate();
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

SamplerConfig sampler_from_json(const json& j) {
  SamplerConfig s;
  if (j.is_string()) {
    s.kind = sampler_from_string(j.get<std::string>());
    return s;
  }
  check_keys(j, {"kind", "smote_over_pct", "smote_under_pct", "smote_k", "bsmote_m", "rose_shrink", "down_cap",
                 "bsmote_target"},
             "sampler");
  s.kind = sampler_from_string(get_or<std::string>(j, "kind", "", "sampler"));
  s.smote_over_pct = get_or(j, "smote_over_pct", s.smote_over_pct, "sampler");
  s.smote_under_pct = get_or(j, "smote_under_pct", s.smote_under_pct, "sampler");
  s.smote_k = get_or(j, "smote_k", s.smote_k, "sampler");
  s.bsmote_m = get_or(j, "bsmote_m", s.bsmote_m, "sampler");
  s.rose_shrink = get_or(j, "rose_shrink", s.rose_shrink, "sampler");
  if (j.contains("down_cap")) s.down_cap = get_or<std::size_t>(j, "down_cap", 0, "sampler");
  if (j.contains("bsmote_target")) s.bsmote_target = get_or<std::size_t>(j, "bsmote_target", 0, "sampler");
  s.validate();
  return s;
}

double param_value(const json& v, const std::string& name) {
  if (v.is_number()) return v.get<double>();
  if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (name == "mtry" && s == "sqrt") return 0.0;
    if (name == "mtry" && s == "third") return 1.0 / 3.0;
    if (name == "mtry" && s == "half") return 0.5;
  }
  throw ConfigError("hyperparameter '" + name + "' must be a number");
}

}  // namespace

DatasetSchema parse_schema(const std::string& json_text) { return schema_from_json(parse_json(json_text, "schema")); }

DatasetSchema load_schema(const std::filesystem::path& path) { return parse_schema(read_text(path)); }

namespace {

RunConfig parse_config_impl(const std::string& json_text, const std::filesystem::path& base_dir) {
  const json j = parse_json(json_text, "config");
  check_keys(j, {"format_version", "seed", "output_dir", "parallelism", "skip_on_error", "write_models", "split_fraction",
                 "datasets", "samplers", "models", "metrics", "tuning", "preprocess"},
             "config");
  const int version = get_or(j, "format_version", 0, "config");
  if (version != kConfigFormatVersion) {
    throw ConfigError("config format_version must be " + std::to_string(kConfigFormatVersion) + ", got " +
                      std::to_string(version));
  }
  if (!j.contains("seed")) throw ConfigError("config: 'seed' is required (no wall-clock default)");
  RunConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "results", "config"));
  c.parallelism = get_or<std::size_t>(j, "parallelism", 1, "config");
  c.skip_on_error = get_or(j, "skip_on_error", false, "config");
  c.write_models = get_or(j, "write_models", false, "config");
  const double split = get_or(j, "split_fraction", 0.75, "config");

  if (!j.contains("datasets") || !j["datasets"].is_array()) throw ConfigError("config: 'datasets' array required");
  for (const auto& d : j["datasets"]) {
    check_keys(d, {"name", "path", "schema", "subset_fraction", "split_fraction", "seed"}, "dataset");
    DatasetEntry e;
    e.path = resolve(base_dir, get_or<std::string>(d, "path", "", "dataset"));
    if (!d.contains("schema")) throw ConfigError("dataset: 'schema' is required");
    if (d["schema"].is_string()) {
      e.schema = load_schema(resolve(base_dir, d["schema"].get<std::string>()));
    } else {
      e.schema = schema_from_json(d["schema"]);
    }
    e.name = get_or<std::string>(d, "name", e.schema.name, "dataset");
    e.subset_fraction = get_or(d, "subset_fraction", 1.0, "dataset");
    e.split_fraction = get_or(d, "split_fraction", split, "dataset");
    if (!d.contains("seed")) throw ConfigError("dataset " + e.name + ": 'seed' is required");
    e.seed = get_or<std::uint64_t>(d, "seed", 0, "dataset");
    c.datasets.push_back(std::move(e));
  }

  if (j.contains("samplers")) {
    for (const auto& s : j["samplers"]) c.samplers.push_back(sampler_from_json(s));
  } else {
    c.samplers.push_back({});
  }

  if (j.contains("tuning")) {
    const auto& t = j["tuning"];
    check_keys(t, {"folds", "selection"}, "tuning");
    c.fold_count = get_or<std::size_t>(t, "folds", 10, "tuning");
    const auto sel = get_or<std::string>(t, "selection", "accuracy", "tuning");
    if (sel == "accuracy") c.selection = SelectionMetric::accuracy;
    else if (sel == "kappa") c.selection = SelectionMetric::kappa;
    else throw ConfigError("tuning: selection must be accuracy or kappa");
  }

  if (j.contains("preprocess")) {
    const auto& p = j["preprocess"];
    check_keys(p, {"freq_ratio_cut", "unique_pct_cut", "correlation_threshold", "imputation_k"}, "preprocess");
    c.preprocess.freq_ratio_cut = get_or(p, "freq_ratio_cut", c.preprocess.freq_ratio_cut, "preprocess");
    c.preprocess.unique_pct_cut = get_or(p, "unique_pct_cut", c.preprocess.unique_pct_cut, "preprocess");
    c.preprocess.correlation_threshold = get_or(p, "correlation_threshold", c.preprocess.correlation_threshold, "preprocess");
    c.preprocess.imputation_k = get_or(p, "imputation_k", c.preprocess.imputation_k, "preprocess");
  }

  if (!j.contains("models") || !j["models"].is_array()) throw ConfigError("config: 'models' array required");
  for (const auto& m : j["models"]) {
    ModelEntry e;
    if (m.is_string()) {
      e.family = family_from_string(m.get<std::string>());
      e.grid.candidates = default_grid(e.family);
    } else {
      check_keys(m, {"family", "grid", "fixed"}, "model");
      e.family = family_from_string(get_or<std::string>(m, "family", "", "model"));
      if (m.contains("grid")) {
        if (is_heterogeneous(e.family)) throw ConfigError(std::string(to_string(e.family)) + " takes no grid");
        for (const auto& [name, values] : m["grid"].items()) {
          if (!values.is_array()) throw ConfigError("grid for '" + name + "' must be an array");
          for (const auto& v : values) e.grid.candidates[name].push_back(param_value(v, name));
        }
      } else {
        e.grid.candidates = default_grid(e.family);
      }
      if (m.contains("fixed")) {
        for (const auto& [name, v] : m["fixed"].items()) {
          e.grid.fixed[name] = param_value(v, name);
          if (!m.contains("grid")) e.grid.candidates.erase(name);
        }
      }
    }
    e.grid.family = e.family;
    e.grid.fold_count = c.fold_count;
    e.grid.selection = c.selection;
    c.models.push_back(std::move(e));
  }

  if (j.contains("metrics")) {
    for (const auto& m : j["metrics"]) c.metrics.push_back(metric_from_string(m.get<std::string>()));
  } else {
    c.metrics.assign(kAllMetrics.begin(), kAllMetrics.end());
  }
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  try {
    return parse_config_impl(json_text, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void RunConfig::validate() const {
  if (datasets.empty()) throw ConfigError("config lists no datasets");
  if (samplers.empty()) throw ConfigError("config lists no samplers");
  if (models.empty()) throw ConfigError("config lists no models");
  if (metrics.empty()) throw ConfigError("config lists no metrics");
  if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
    if (!std::filesystem::exists(d.path)) throw ConfigError("dataset " + d.name + ": file not found: " + d.path.string());
    if (!(d.subset_fraction > 0.0 && d.subset_fraction <= 1.0)) throw ConfigError("dataset " + d.name + ": subset_fraction must lie in (0, 1]");
    if (!(d.split_fraction > 0.0 && d.split_fraction < 1.0)) throw ConfigError("dataset " + d.name + ": split_fraction must lie in (0, 1)");
  }
  std::set<std::string> sampler_names;
  for (const auto& s : samplers) {
    s.validate();
    if (!sampler_names.insert(std::string(to_string(s.kind))).second) {
      throw ConfigError("duplicate sampler '" + std::string(to_string(s.kind)) + "'");
    }
  }
  std::set<Family> seen;
  bool any_base = false;
  for (const auto& m : models) {
    if (!seen.insert(m.family).second) throw ConfigError("duplicate model '" + std::string(to_string(m.family)) + "'");
    if (is_heterogeneous(m.family)) {
      ModelSpec probe;
      probe.family = m.family;
      probe.params = m.grid.fixed;
      probe.members.push_back({});
      probe.member_weights.push_back(1.0);
      probe.validate();
    } else {
      any_base = true;
      m.grid.validate();
    }
  }
  const bool any_ensemble = std::any_of(models.begin(), models.end(), [](const ModelEntry& m) { return is_heterogeneous(m.family); });
  if (any_ensemble && !any_base) throw ConfigError("heterogeneous ensembles need at least one base model");
  if (fold_count < 2) throw ConfigError("tuning folds must be at least 2");
  if (preprocess.imputation_k < 1) throw ConfigError("imputation_k must be at least 1");
}

}  // namespace creditbench
