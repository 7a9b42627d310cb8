#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace creditbench {

// Row-major so that a row is a contiguous feature vector.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Label convention throughout: 1 = default (bad), 0 = non-default (good).
// Scores are always p(good | x).
using Labels = std::vector<int>;

inline bool is_good(int label) noexcept { return label == 0; }

struct TrainingSet {
  Matrix features;
  Labels labels;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);
Labels select_labels(const Labels& y, std::span<const std::size_t> rows);
TrainingSet select(const TrainingSet& data, std::span<const std::size_t> rows);

std::size_t count_label(const Labels& y, int label);

}  // namespace creditbench

namespace creditbench {

inline constexpr std::size_t kNoRow = static_cast<std::size_t>(-1);

// The k rows among `candidates` nearest to `query` in Euclidean distance,
// nearest first; equal distances go to the lower row index. `exclude` is
// skipped (pass kNoRow to keep every candidate).
std::vector<std::size_t> nearest_rows(const Matrix& pool, std::span<const std::size_t> candidates,
                                      const Eigen::Ref<const Eigen::RowVectorXd>& query, std::size_t k,
                                      std::size_t exclude = kNoRow);

}  // namespace creditbench
