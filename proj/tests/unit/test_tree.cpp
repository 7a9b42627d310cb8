#include <gtest/gtest.h>

#include <sstream>

#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"
#include "creditbench/tree.hpp"
#include "test_util.hpp"

using namespace creditbench;

TEST(Tree, SingleSplitAtMidpoint) {
  Matrix x(6, 1);
  x << 1, 2, 3, 10, 11, 12;
  const std::vector<double> y{0, 0, 0, 1, 1, 1}, w(6, 1.0);
  const auto t = RegressionTree::fit(x, y, w, {});
  ASSERT_EQ(t.leaf_count(), 2u);
  EXPECT_EQ(t.nodes()[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, 6.5);
  Matrix q(3, 1);
  q << 6.5, 6.6, -100;
  const Vector p = t.predict(q);
  EXPECT_EQ(p(0), 0.0);
  EXPECT_EQ(p(1), 1.0);
  EXPECT_EQ(p(2), 0.0);
}

TEST(Tree, WeightsActAsMultiplicities) {
  Rng rng(4);
  Matrix x(30, 2);
  std::vector<double> y(30), w(30);
  for (int i = 0; i < 30; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
    y[static_cast<std::size_t>(i)] = x(i, 0) + 0.3 * rng.normal() > 0.5 ? 1.0 : 0.0;
    w[static_cast<std::size_t>(i)] = static_cast<double>(rng.index(3));
  }
  // Expand rows by their weights and fit unweighted.
  std::vector<int> rows;
  for (int i = 0; i < 30; ++i) {
    for (int c = 0; c < static_cast<int>(w[static_cast<std::size_t>(i)]); ++c) rows.push_back(i);
  }
  Matrix xe(static_cast<Eigen::Index>(rows.size()), 2);
  std::vector<double> ye;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    xe.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    ye.push_back(y[static_cast<std::size_t>(rows[r])]);
  }
  TreeParams p;
  p.min_leaf = 2;
  p.min_split = 5;
  const auto a = RegressionTree::fit(x, y, w, p);
  const auto b = RegressionTree::fit(xe, ye, std::vector<double>(ye.size(), 1.0), p);
  Matrix grid(50, 2);
  for (int i = 0; i < 50; ++i) grid.row(i) << rng.uniform(), rng.uniform();
  EXPECT_TRUE(a.predict(grid).isApprox(b.predict(grid), 1e-12));
}

TEST(Tree, DepthLimitAndMinLeaf) {
  const auto data = cbtest::blobs(100, 100, 3, 1.0, 2);
  std::vector<double> y;
  for (int l : data.labels) y.push_back(l);
  TreeParams p;
  p.max_depth = 2;
  const auto t = RegressionTree::fit(data.features, y, std::vector<double>(200, 1.0), p);
  EXPECT_LE(t.depth(), 2);
  p = {};
  p.min_leaf = 15;
  const auto u = RegressionTree::fit(data.features, y, std::vector<double>(200, 1.0), p);
  for (const auto& n : u.nodes()) {
    if (n.is_leaf()) EXPECT_GE(n.weight, 15.0);
  }
}

TEST(Tree, PruningLargeCpGivesStump) {
  const auto data = cbtest::blobs(60, 60, 2, 1.0, 3);
  std::vector<double> y;
  for (int l : data.labels) y.push_back(l);
  auto t = RegressionTree::fit(data.features, y, std::vector<double>(120, 1.0), {});
  const auto leaves = t.leaf_count();
  EXPECT_GT(leaves, 2u);
  auto pruned = t;
  pruned.prune_cost_complexity(0.0);
  EXPECT_LE(pruned.leaf_count(), leaves);
  auto small = t;
  small.prune_cost_complexity(0.02);
  EXPECT_LE(small.leaf_count(), pruned.leaf_count());
  t.prune_cost_complexity(1.0);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_NEAR(t.nodes()[0].value, 0.5, 1e-12);
}

TEST(Tree, SaveLoadRoundTrip) {
  const auto data = cbtest::blobs(40, 30, 3, 1.0, 5);
  std::vector<double> y;
  for (int l : data.labels) y.push_back(l);
  Rng rng(1);
  TreeParams p;
  p.mtry = 2;
  const auto t = RegressionTree::fit(data.features, y, std::vector<double>(70, 1.0), p, &rng);
  std::stringstream s;
  t.save(s);
  const auto back = RegressionTree::load(s);
  EXPECT_EQ(back, t);
}

TEST(Tree, BootstrapWeightsSumToRows) {
  Rng rng(3);
  const auto w = bootstrap_weights(100, rng);
  double total = 0;
  for (double v : w) total += v;
  EXPECT_EQ(total, 100.0);
}
