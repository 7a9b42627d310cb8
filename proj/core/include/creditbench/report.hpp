#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "creditbench/compare.hpp"
#include "creditbench/metrics.hpp"

namespace creditbench {

/// One (dataset, sampler, model) cell of a benchmark run.
struct EvaluationRecord {
  std::string dataset;
  std::string sampler;
  std::string model;
  std::string params;  // chosen hyperparameters, "name=value;..."
  MetricSet metrics;
  double threshold = 0.0;
  double wall_seconds = 0.0;  // not part of records.csv
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

// Metric columns are written only for `metrics`; failed cells carry NA.
void write_records_csv(std::ostream& out, const std::vector<EvaluationRecord>& records, const std::vector<Metric>& metrics);
void write_timings_csv(std::ostream& out, const std::vector<EvaluationRecord>& records);

struct RecordsFile {
  std::vector<EvaluationRecord> records;
  std::vector<Metric> metrics;  // metric columns present in the file
};

RecordsFile read_records_csv(std::istream& in);

// One table per sampler, in first-appearance order. Missing or failed cells
// become NaN; a duplicated cell is an error.
std::vector<ScenarioTable> tables_from_records(const std::vector<EvaluationRecord>& records,
                                               const std::vector<Metric>& metrics);

struct ReportBundle {
  std::vector<ScenarioTable> tables;
  std::vector<ComparisonReport> reports;
  std::optional<SamplerComparison> samplers;  // needs at least two scenarios
};

ReportBundle build_reports(const std::vector<EvaluationRecord>& records, const std::vector<Metric>& metrics,
                           MissingPolicy policy = MissingPolicy::reject);

std::string render_markdown(const ComparisonReport& report);
void write_report_csv(std::ostream& out, const ComparisonReport& report);
void write_sampler_comparison_csv(std::ostream& out, const SamplerComparison& comparison);
std::string render_sampler_comparison_markdown(const SamplerComparison& comparison);

// report_<scenario>.md, report_<scenario>.csv and sampler_comparison.csv;
// returns the paths written.
std::vector<std::filesystem::path> write_report_files(const ReportBundle& bundle, const std::filesystem::path& dir);

}  // namespace creditbench
