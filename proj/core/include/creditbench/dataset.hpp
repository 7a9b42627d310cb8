#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "creditbench/matrix.hpp"

namespace creditbench {

enum class ColumnKind { numeric, categorical, target, ignored };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> missing_tokens{"NA", ""};

  bool is_missing_token(std::string_view cell) const;
};

// A dataset declaration: one entry per file column plus the two target
// labels. The default label maps to 1, the non-default label to 0.
struct DatasetSchema {
  std::string name;
  std::vector<ColumnSchema> columns;
  std::string default_label;
  std::string non_default_label;

  // Throws DataError unless exactly one target column exists and names are
  // unique.
  void validate() const;
  const ColumnSchema& target() const;
};

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> numeric;           // NaN when missing (numeric columns)
  std::vector<std::string> categorical;  // empty string when missing (categorical columns)
  std::vector<std::uint8_t> missing;

  std::size_t size() const noexcept { return missing.size(); }
  bool is_missing(std::size_t row) const noexcept { return missing[row] != 0; }
};

/// Predictor columns plus the binary default indicator. Immutable after
/// construction; row selection produces new datasets.
class TabularDataset {
 public:
  TabularDataset() = default;
  TabularDataset(std::string name, std::vector<Column> predictors, Labels target, bool allow_degenerate = false);

  const std::string& name() const noexcept { return name_; }
  std::size_t rows() const noexcept { return target_.size(); }
  std::size_t columns() const noexcept { return predictors_.size(); }
  const std::vector<Column>& predictors() const noexcept { return predictors_; }
  const Column& predictor(std::size_t i) const { return predictors_.at(i); }
  const Labels& target() const noexcept { return target_; }

  std::size_t class_count(int label) const { return count_label(target_, label); }
  double default_rate() const;
  std::size_t missing_cells() const;
  bool all_numeric() const;

  // Rows in the given order (duplicates allowed).
  TabularDataset subset(std::span<const std::size_t> rows) const;

  // Dense copy of the (numeric) predictors; missing cells are NaN.
  Matrix to_matrix() const;
  Matrix to_matrix(std::span<const std::size_t> rows) const;

 private:
  std::string name_;
  std::vector<Column> predictors_;
  Labels target_;
};

TabularDataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema);
TabularDataset parse_csv(std::istream& in, const DatasetSchema& schema);

// Writes the dataset in the column order of its predictors followed by the
// target column, using the schema's target name and labels.
void write_csv(std::ostream& out, const TabularDataset& data, const DatasetSchema& schema);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Per class, ceil(fraction * class size) rows are drawn without replacement.
TabularDataset stratified_subset(const TabularDataset& data, double fraction, std::uint64_t seed);
SplitIndices stratified_split(const TabularDataset& data, double train_fraction, std::uint64_t seed);

// Per-class draw count used by both stratified operations.
std::size_t stratified_count(std::size_t class_size, double fraction);

}  // namespace creditbench
