#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "creditbench/dataset.hpp"
#include "creditbench/matrix.hpp"

namespace creditbench {

enum class RemovalReason { near_zero_variance, high_correlation };
std::string_view to_string(RemovalReason reason);

struct RemovedColumn {
  std::string name;
  RemovalReason reason;
  bool operator==(const RemovedColumn&) const = default;
};

// One categorical column expanded to levels.size() indicator columns; the
// base level gets all zeros.
struct DummyEncoding {
  std::string column;
  std::string base_level;
  std::vector<std::string> levels;
  bool operator==(const DummyEncoding&) const = default;
};

struct ScalingBounds {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ScalingBounds&) const = default;
};

struct FilterResult {
  TabularDataset data;
  std::vector<RemovedColumn> removed;
};

// Base level is the lexicographically smallest observed level. Throws
// DataError on a categorical column with fewer than two observed levels.
std::vector<DummyEncoding> learn_dummy_encodings(const TabularDataset& data);
TabularDataset apply_dummy_encodings(const TabularDataset& data, const std::vector<DummyEncoding>& encodings);
TabularDataset encode_dummies(const TabularDataset& data);

bool is_near_zero_variance(std::span<const double> values, double freq_ratio_cut, double unique_pct_cut);
FilterResult filter_near_zero_variance(const TabularDataset& data, double freq_ratio_cut = 19.0,
                                       double unique_pct_cut = 10.0);

// Indices of columns to drop, in removal order, given a correlation matrix.
std::vector<std::size_t> correlated_removals(const Eigen::MatrixXd& correlation, double threshold);
// Pearson correlation over complete cases. Throws DataError on a column with
// zero variance.
Eigen::MatrixXd complete_case_correlation(const Matrix& data);
FilterResult filter_correlated(const TabularDataset& data, double threshold = 0.9);

std::vector<ScalingBounds> fit_scaling(const Matrix& train);
// (x - min) / (max - min), unclipped; a constant training column maps to 0.
Matrix apply_scaling(std::span<const ScalingBounds> bounds, const Matrix& data);

// Fills NaN cells of `rows` with the mean of the k nearest donors that observe
// that column. Distances use mutually observed columns, rescaled by
// columns / used columns. When `rows_are_donors`, row i never donates to
// itself. Ties go to the lower donor index.
Matrix impute_knn(const Matrix& rows, const Matrix& donors, int k, bool rows_are_donors,
                  std::vector<std::string>* warnings = nullptr);
Matrix impute_knn(const Matrix& data, int k = 5, std::vector<std::string>* warnings = nullptr);

struct PreprocessOptions {
  double freq_ratio_cut = 19.0;
  double unique_pct_cut = 10.0;
  double correlation_threshold = 0.9;
  int imputation_k = 5;
};

/// Everything learned from the training rows. Applying it to other rows
/// never reads those rows' labels or touches the fitted state.
struct PreprocessPlan {
  std::vector<DummyEncoding> encodings;
  std::vector<RemovedColumn> removed_columns;
  std::vector<std::string> kept_columns;
  std::vector<ScalingBounds> scaling_bounds;
  int imputation_k = 5;
  Matrix imputation_donors;  // scaled training rows, NaN where missing

  std::string report() const;
};

struct PreparedData {
  PreprocessPlan plan;
  TrainingSet train;
  TrainingSet test;
  std::vector<std::string> warnings;
};

PreprocessPlan fit_preprocess(const TabularDataset& data, std::span<const std::size_t> train_rows,
                              const PreprocessOptions& options = {});
// Encodes, filters and scales `rows` with the plan, then imputes from the
// training donors.
Matrix transform(const PreprocessPlan& plan, const TabularDataset& data, std::span<const std::size_t> rows,
                 std::vector<std::string>* warnings = nullptr);
PreparedData prepare(const TabularDataset& data, const SplitIndices& split, const PreprocessOptions& options = {});

}  // namespace creditbench
