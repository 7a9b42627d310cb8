#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "creditbench/models.hpp"

namespace creditbench {

enum class SelectionMetric { accuracy, kappa };

struct TuningGrid {
  Family family = Family::logreg;
  std::map<std::string, std::vector<double>> candidates;  // tuned names
  Hyperparameters fixed;                                  // applied to every candidate
  std::size_t fold_count = 10;
  SelectionMetric selection = SelectionMetric::accuracy;

  // Cartesian product; names vary in map order with the last name fastest.
  std::vector<ModelSpec> expand() const;
  void validate() const;
};

// Grid used when a config names a family without a grid; empty for families
// with nothing to tune.
std::map<std::string, std::vector<double>> default_grid(Family family);

// k stratified folds of row indices (each sorted). Per class, fold sizes
// differ by at most one. Throws DataError if a fold would miss a class.
std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed);

struct CandidateResult {
  ModelSpec spec;
  std::vector<double> fold_metric;
  double mean = 0.0;
};

struct TuningResult {
  ModelSpec best;
  std::size_t best_index = 0;
  std::vector<CandidateResult> table;
  std::vector<std::vector<std::size_t>> folds;
};

// Fold metric: accuracy or kappa of labels predicted good at score >= 0.5.
TuningResult cv_grid_search(const TuningGrid& grid, const TrainingSet& train, std::uint64_t seed);

void write_tuning_csv(std::ostream& out, const TuningResult& result);

}  // namespace creditbench
