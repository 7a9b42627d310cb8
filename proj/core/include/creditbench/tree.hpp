#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "creditbench/matrix.hpp"

namespace creditbench {

class Rng;

struct TreeParams {
  int max_depth = std::numeric_limits<int>::max();
  double min_split = 2.0;  // total row weight needed to try a split
  double min_leaf = 1.0;   // total row weight required in each child
  std::size_t mtry = 0;    // candidate features per split; 0 = all
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;   // weighted mean target (or an overriding leaf value)
  double weight = 0.0;  // total training weight
  double sse = 0.0;     // weighted sum of squared deviations

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree grown on weighted squared error. On 0/1 targets the
/// split criterion orders splits exactly like Gini impurity, so the same
/// builder serves classification trees and gradient boosting. A row goes
/// left iff x[feature] <= threshold; thresholds are midpoints between
/// consecutive distinct training values. Weights are row multiplicities; a
/// zero weight leaves the row out.
class RegressionTree {
 public:
  RegressionTree() = default;

  // `rng` is required only when params.mtry selects a strict subset.
  static RegressionTree fit(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                            const TreeParams& params, Rng* rng = nullptr);

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Vector predict(const Matrix& x) const;

  // Weakest-link pruning on misclassification risk of 0/1 targets: subtrees
  // whose risk reduction per extra leaf, relative to the root risk, is at most
  // cp collapse into leaves.
  void prune_cost_complexity(double cp);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() noexcept { return nodes_; }
  std::size_t leaf_count() const;
  int depth() const;
  std::size_t feature_count() const noexcept { return n_features_; }

  void save(std::ostream& out) const;
  static RegressionTree load(std::istream& in);

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

// Bootstrap row multiplicities for n rows.
std::vector<double> bootstrap_weights(std::size_t n, Rng& rng);

}  // namespace creditbench
