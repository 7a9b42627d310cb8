#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "creditbench/dataset.hpp"
#include "creditbench/metrics.hpp"
#include "creditbench/preprocess.hpp"
#include "creditbench/resample.hpp"
#include "creditbench/tune.hpp"

namespace creditbench {

inline constexpr int kConfigFormatVersion = 1;

struct DatasetEntry {
  std::string name;
  std::filesystem::path path;
  DatasetSchema schema;
  double subset_fraction = 1.0;
  double split_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct ModelEntry {
  Family family = Family::logreg;
  TuningGrid grid;  // unused for heterogeneous ensembles, except `fixed`
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::size_t parallelism = 1;
  bool skip_on_error = false;
  bool write_models = false;
  std::vector<DatasetEntry> datasets;
  std::vector<SamplerConfig> samplers;  // seeds are derived per cell
  std::vector<ModelEntry> models;
  std::vector<Metric> metrics;
  PreprocessOptions preprocess;
  std::size_t fold_count = 10;
  SelectionMetric selection = SelectionMetric::accuracy;

  // Throws ConfigError on an inconsistent configuration or missing files.
  void validate() const;
};

// JSON documents. Relative paths resolve against `base_dir`.
DatasetSchema parse_schema(const std::string& json_text);
DatasetSchema load_schema(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace creditbench
