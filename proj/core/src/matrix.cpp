#include "creditbench/matrix.hpp"

#include <algorithm>

namespace creditbench {

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Labels select_labels(const Labels& y, std::span<const std::size_t> rows) {
  Labels out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(y[r]);
  return out;
}

TrainingSet select(const TrainingSet& data, std::span<const std::size_t> rows) {
  return {select_rows(data.features, rows), select_labels(data.labels, rows)};
}

std::size_t count_label(const Labels& y, int label) {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

std::vector<std::size_t> nearest_rows(const Matrix& pool, std::span<const std::size_t> candidates,
                                      const Eigen::Ref<const Eigen::RowVectorXd>& query, std::size_t k,
                                      std::size_t exclude) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  for (auto c : candidates) {
    if (c == exclude) continue;
    dist.emplace_back((pool.row(static_cast<Eigen::Index>(c)) - query).squaredNorm(), c);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace creditbench
