#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "creditbench/metrics.hpp"

namespace creditbench {

enum class Orientation { higher_better, lower_better };

inline Orientation orientation_of(Metric m) {
  return higher_is_better(m) ? Orientation::higher_better : Orientation::lower_better;
}

// Rank 1 = best; tied values share the average of the ranks they cover.
std::vector<double> rank_within_dataset(std::span<const double> values, Orientation orientation);

// k x N values (classifiers x datasets) to k x N ranks, column by column.
Eigen::MatrixXd rank_columns(const Eigen::MatrixXd& values, Orientation orientation);

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t classifiers = 0;
  std::size_t datasets = 0;

  bool rejected(double alpha = 0.05) const { return p_value < alpha; }
};

// Tie-corrected Friedman chi-square on a k x N rank matrix, k - 1 degrees of
// freedom.
FriedmanResult friedman_test(const Eigen::MatrixXd& ranks);

// Upper 5% critical value of the studentized range at infinite degrees of
// freedom, divided by sqrt(2); tabulated for k = 2..30.
double nemenyi_q05(std::size_t k);
double critical_difference(std::size_t k, std::size_t n_datasets);

struct NemenyiResult {
  double critical_difference = 0.0;
  std::size_t best = 0;
  std::vector<bool> worse_than_best;
};

NemenyiResult nemenyi_test(std::span<const double> average_ranks, std::size_t n_datasets);

/// Values for one scenario: per metric a classifiers x datasets matrix. NaN
/// marks a missing cell.
struct ScenarioTable {
  std::string scenario;
  std::vector<std::string> classifiers;
  std::vector<std::string> datasets;
  std::vector<Metric> metrics;
  std::map<Metric, Eigen::MatrixXd> values;

  double value(Metric m, std::size_t classifier, std::size_t dataset) const;
};

enum class MissingPolicy { reject, rank_worst };

struct MetricSummary {
  Metric metric = Metric::pcc;
  Eigen::MatrixXd ranks;
  std::vector<double> average_rank;
  std::size_t best = 0;
  std::optional<FriedmanResult> friedman;
  std::optional<NemenyiResult> nemenyi;
};

struct ComparisonReport {
  std::string scenario;
  std::vector<std::string> classifiers;
  std::vector<std::string> datasets;
  std::vector<MetricSummary> metrics;
  std::vector<double> avg_r;
  std::vector<std::size_t> overall_rank;  // 1 = best
  std::vector<std::string> notes;
};

// Friedman and Nemenyi are skipped (with a note) for fewer than two
// classifiers or datasets.
ComparisonReport aggregate_report(const ScenarioTable& table, MissingPolicy policy = MissingPolicy::reject,
                                  double alpha = 0.05);

/// Cross-scenario comparison: for each classifier, the scenarios are ranked
/// within every (dataset, metric) block and the ranks averaged over blocks;
/// the per-scenario score is the mean of those averages over classifiers.
/// Blocks with a missing value in any scenario are skipped; a classifier
/// left with no block is dropped (NaN row) and excluded from the means.
struct SamplerComparison {
  std::vector<std::string> scenarios;
  std::vector<std::string> classifiers;
  Eigen::MatrixXd average_rank;  // classifiers x scenarios
  std::vector<double> mean_rank;
  std::vector<double> overall_rank;
  std::size_t skipped_blocks = 0;
  std::vector<std::string> dropped_classifiers;
};

SamplerComparison compare_samplers(std::span<const ScenarioTable> tables);

}  // namespace creditbench
