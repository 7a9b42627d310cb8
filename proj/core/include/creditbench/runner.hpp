#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "creditbench/report.hpp"
#include "creditbench/run_config.hpp"

namespace creditbench {

struct DatasetSummary {
  std::string name;
  std::size_t rows = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double default_rate = 0.0;
  std::string preprocessing;  // PreprocessPlan::report()
  std::vector<std::string> warnings;
  // Per sampler: "name good/bad" row counts after resampling.
  std::vector<std::string> samplers;
};

struct RunResult {
  std::vector<EvaluationRecord> records;  // dataset, sampler, model order of the config
  ReportBundle bundle;
  std::vector<DatasetSummary> datasets;
};

// Runs every (dataset, sampler, model) cell. Progress lines go to `log` when
// given. A failing cell aborts the run with its error unless the config sets
// skip_on_error, in which case the cell is recorded as failed.
RunResult run_benchmark(const RunConfig& config, std::ostream* log = nullptr);

std::string provenance_text(const RunConfig& config, const RunResult& result);

// records.csv, timings.csv, reports and provenance.txt in config.output_dir.
std::vector<std::filesystem::path> write_outputs(const RunConfig& config, const RunResult& result);

}  // namespace creditbench
