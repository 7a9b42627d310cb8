#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "creditbench/compare.hpp"
#include "creditbench/errors.hpp"
#include "test_util.hpp"

using namespace creditbench;

TEST(Ranks, Examples) {
  EXPECT_EQ(rank_within_dataset(std::vector<double>{0.9, 0.8, 0.7}, Orientation::higher_better), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(rank_within_dataset(std::vector<double>{0.9, 0.9, 0.7}, Orientation::higher_better), (std::vector<double>{1.5, 1.5, 3}));
  EXPECT_EQ(rank_within_dataset(std::vector<double>{0.1, 0.3, 0.2}, Orientation::lower_better), (std::vector<double>{1, 3, 2}));
}

TEST(Ranks, BrierOrientationMatchesNegatedValues) {
  const auto original = cbtest::appendix_tables().front();
  const Eigen::MatrixXd b = original.values.at(Metric::brier);
  EXPECT_EQ(rank_columns(b, Orientation::lower_better), rank_columns(-b, Orientation::higher_better));
}

TEST(RankProperty, ColumnSumsAndMonotoneInvariance) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index k = 2 + trial % 20;
    Eigen::MatrixXd v(k, 4);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = level(gen) / 6.0;
    const Eigen::MatrixXd r = rank_columns(v, Orientation::higher_better);
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_NEAR(r.col(j).sum(), static_cast<double>(k * (k + 1)) / 2.0, 1e-12);
    }
    const Eigen::MatrixXd t = v.array().exp() * 3.0 - 1.0;
    EXPECT_EQ(rank_columns(t, Orientation::higher_better), r);
  }
}

TEST(Friedman, IdenticalRankingsK3N4) {
  Eigen::MatrixXd r(3, 4);
  r << 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3;
  const auto f = friedman_test(r);
  EXPECT_NEAR(f.statistic, 8.0, 1e-12);
  EXPECT_LT(f.p_value, 0.05);
  EXPECT_TRUE(f.rejected());
}

TEST(Friedman, RandomRankingsAreNotSignificant) {
  std::mt19937_64 gen(2024);
  std::vector<double> ps;
  std::vector<double> base{1, 2, 3, 4, 5, 6};
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::MatrixXd r(6, 10);
    for (Eigen::Index j = 0; j < 10; ++j) {
      std::shuffle(base.begin(), base.end(), gen);
      for (Eigen::Index i = 0; i < 6; ++i) r(i, j) = base[static_cast<std::size_t>(i)];
    }
    ps.push_back(friedman_test(r).p_value);
  }
  std::nth_element(ps.begin(), ps.begin() + 500, ps.end());
  EXPECT_GT(ps[500], 0.3);
}

TEST(FriedmanProperty, RelabelAndPermuteInvariant) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd v(7, 5);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::round(u(gen) * 4) / 4;
    const double s = friedman_test(rank_columns(v, Orientation::higher_better)).statistic;
    Eigen::PermutationMatrix<Eigen::Dynamic> rows(7), cols(5);
    rows.setIdentity();
    cols.setIdentity();
    std::shuffle(rows.indices().data(), rows.indices().data() + 7, gen);
    std::shuffle(cols.indices().data(), cols.indices().data() + 5, gen);
    const Eigen::MatrixXd p = rows * v * cols;
    EXPECT_NEAR(friedman_test(rank_columns(p, Orientation::higher_better)).statistic, s, 1e-10);
  }
}

TEST(Friedman, TooSmall) {
  EXPECT_THROW(friedman_test(Eigen::MatrixXd::Ones(1, 4)), DataError);
  EXPECT_THROW(friedman_test(Eigen::MatrixXd::Ones(3, 1)), DataError);
}

TEST(Nemenyi, CriticalDifference) {
  EXPECT_NEAR(nemenyi_q05(2), 1.959964, 1e-6);
  EXPECT_NEAR(nemenyi_q05(10), 3.163684, 1e-6);
  EXPECT_NEAR(nemenyi_q05(23), 3.615646, 1e-6);
  EXPECT_NEAR(critical_difference(23, 4), 3.615646 * std::sqrt(23.0), 1e-5);
  EXPECT_THROW(nemenyi_q05(31), DataError);
  // A 21.8 vs 3.0 gap exceeds the critical difference.
  EXPECT_GT(21.8 - 3.0, critical_difference(23, 4));
}

TEST(Nemenyi, EqualRanksNotFlagged) {
  const auto n = nemenyi_test(std::vector<double>{2.0, 2.0}, 10);
  EXPECT_FALSE(n.worse_than_best[0]);
  EXPECT_FALSE(n.worse_than_best[1]);
}

TEST(Aggregate, LdaPccRankFromAppendix) {
  const auto tables = cbtest::appendix_tables();
  ASSERT_EQ(tables.front().scenario, "original");
  const auto report = aggregate_report(tables.front());
  ASSERT_EQ(report.classifiers.front(), "LDA");
  EXPECT_NEAR(report.metrics.front().average_rank.front(), 14.1, 0.2);
}

TEST(Aggregate, SingleDatasetAndIdentity) {
  ScenarioTable t;
  t.scenario = "s";
  t.classifiers = {"a", "b", "c"};
  t.datasets = {"d"};
  t.metrics = {Metric::auc, Metric::brier};
  t.values[Metric::auc] = Eigen::MatrixXd(3, 1);
  t.values[Metric::auc] << 0.7, 0.9, 0.8;
  t.values[Metric::brier] = Eigen::MatrixXd(3, 1);
  t.values[Metric::brier] << 0.2, 0.1, 0.3;
  const auto r = aggregate_report(t);
  EXPECT_EQ(r.metrics[0].average_rank, (std::vector<double>{3, 1, 2}));
  EXPECT_EQ(r.metrics[1].average_rank, (std::vector<double>{2, 1, 3}));
  EXPECT_FALSE(r.metrics[0].friedman.has_value());
  EXPECT_EQ(r.avg_r, (std::vector<double>{2.5, 1, 2.5}));
  EXPECT_EQ(r.overall_rank, (std::vector<std::size_t>{2, 1, 3}));
  EXPECT_FALSE(r.notes.empty());

  ScenarioTable same = t;
  same.datasets = {"d1", "d2", "d3"};
  for (Metric m : t.metrics) same.values[m] = Eigen::MatrixXd::Constant(3, 3, 0.5);
  const auto id = aggregate_report(same);
  for (double a : id.avg_r) EXPECT_DOUBLE_EQ(a, 2.0);
}

TEST(Aggregate, MissingPolicy) {
  ScenarioTable t;
  t.scenario = "s";
  t.classifiers = {"a", "b"};
  t.datasets = {"d1", "d2"};
  t.metrics = {Metric::auc};
  t.values[Metric::auc] = Eigen::MatrixXd(2, 2);
  t.values[Metric::auc] << 0.9, std::nan(""), 0.8, 0.7;
  EXPECT_THROW(aggregate_report(t), DataError);
  const auto r = aggregate_report(t, MissingPolicy::rank_worst);
  EXPECT_EQ(r.metrics[0].average_rank, (std::vector<double>{1.5, 1.5}));
  EXPECT_EQ(r.notes.size(), 1u);
}

TEST(SamplerComparison, Table9Ordering) {
  const auto tables = cbtest::appendix_tables();
  ASSERT_EQ(tables.size(), 6u);
  const auto c = compare_samplers(tables);
  ASSERT_EQ(c.scenarios, (std::vector<std::string>{"original", "down", "up", "smote", "rose", "bsmote"}));
  EXPECT_EQ(c.overall_rank, (std::vector<double>{5, 2, 1, 6, 4, 3}));
  EXPECT_EQ(c.skipped_blocks, 0u);
}

TEST(SamplerComparison, Errors) {
  const auto tables = cbtest::appendix_tables();
  EXPECT_THROW(compare_samplers(std::span(tables.data(), 1)), DataError);
  auto changed = tables;
  changed[1].classifiers.pop_back();
  EXPECT_THROW(compare_samplers(changed), DataError);
}
