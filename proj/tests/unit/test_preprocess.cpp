#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "creditbench/errors.hpp"
#include "creditbench/preprocess.hpp"
#include "creditbench/random.hpp"
#include "creditbench/run_config.hpp"
#include "test_util.hpp"

using namespace creditbench;

namespace {

constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

Column numeric(const std::string& name, std::vector<double> v) {
  Column c;
  c.name = name;
  c.kind = ColumnKind::numeric;
  for (double x : v) c.missing.push_back(std::isnan(x) ? 1 : 0);
  c.numeric = std::move(v);
  return c;
}

Column categorical(const std::string& name, std::vector<std::string> v) {
  Column c;
  c.name = name;
  c.kind = ColumnKind::categorical;
  for (const auto& x : v) c.missing.push_back(x.empty() ? 1 : 0);
  c.categorical = std::move(v);
  return c;
}

Labels alternating(std::size_t n) {
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
  return y;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

}  // namespace

TEST(EncodeDummies, ThreeLevels) {
  TabularDataset d("t", {categorical("c", {"B", "A", "C", "A"})}, alternating(4));
  const auto e = encode_dummies(d);
  ASSERT_EQ(e.columns(), 2u);
  EXPECT_EQ(e.predictor(0).name, "c=B");
  EXPECT_EQ(e.predictor(1).name, "c=C");
  EXPECT_EQ(e.predictor(0).numeric, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(e.predictor(1).numeric, (std::vector<double>{0, 0, 1, 0}));
  const auto enc = learn_dummy_encodings(d);
  EXPECT_EQ(enc[0].base_level, "A");
}

TEST(EncodeDummies, UnseenLevelAndMissing) {
  TabularDataset train("t", {categorical("c", {"A", "B", "A", "B"})}, alternating(4));
  TabularDataset other("t", {categorical("c", {"Z", "", "B", "A"})}, alternating(4));
  const auto e = apply_dummy_encodings(other, learn_dummy_encodings(train));
  ASSERT_EQ(e.columns(), 1u);
  EXPECT_EQ(e.predictor(0).numeric[0], 0.0);
  EXPECT_TRUE(std::isnan(e.predictor(0).numeric[1]));
  EXPECT_EQ(e.predictor(0).numeric[2], 1.0);
}

TEST(EncodeDummies, SingleLevelIsAnError) {
  TabularDataset d("t", {categorical("c", {"A", "A", "A", "A"})}, alternating(4));
  EXPECT_THROW(encode_dummies(d), DataError);
}

TEST(EncodeDummies, GermanCreditColumnArithmetic) {
  const auto schema = load_schema(cbtest::data_file("schemas/german_credit.json"));
  const auto d = load_csv(cbtest::data_file("german_credit.csv"), schema);
  std::size_t expect = 0;
  for (const auto& c : d.predictors()) {
    if (c.kind == ColumnKind::numeric) {
      ++expect;
    } else {
      expect += std::set<std::string>(c.categorical.begin(), c.categorical.end()).size() - 1;
    }
  }
  const auto e = encode_dummies(d);
  EXPECT_EQ(e.columns(), expect);
  EXPECT_TRUE(e.all_numeric());
}

TEST(NearZeroVariance, Definitions) {
  std::vector<double> constant(50, 3.0);
  EXPECT_TRUE(is_near_zero_variance(constant, 19, 10));
  std::vector<double> binary(100);
  for (std::size_t i = 0; i < binary.size(); ++i) binary[i] = static_cast<double>(i % 2);
  EXPECT_FALSE(is_near_zero_variance(binary, 19, 10));
  std::vector<double> rare(1000, 0.0);
  rare[17] = 1.0;
  EXPECT_TRUE(is_near_zero_variance(rare, 19, 10));
  // Many distinct values: never near-zero even with a dominant value.
  std::vector<double> spread(100, 0.0);
  for (std::size_t i = 0; i < 20; ++i) spread[i] = static_cast<double>(i + 1);
  EXPECT_FALSE(is_near_zero_variance(spread, 19, 10));
}

TEST(NearZeroVariance, FilterReportsReason) {
  std::vector<double> rare(40, 0.0);
  rare[3] = 1.0;
  std::vector<double> ok(40);
  for (std::size_t i = 0; i < ok.size(); ++i) ok[i] = static_cast<double>(i);
  TabularDataset d("t", {numeric("rare", rare), numeric("ok", ok)}, alternating(40));
  const auto r = filter_near_zero_variance(d);
  ASSERT_EQ(r.data.columns(), 1u);
  EXPECT_EQ(r.data.predictor(0).name, "ok");
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0], (RemovedColumn{"rare", RemovalReason::near_zero_variance}));
}

TEST(Correlation, HandExample) {
  Eigen::MatrixXd c(3, 3);
  c << 1, 0.95, 0.92, 0.95, 1, 0.1, 0.92, 0.1, 1;
  const auto removed = correlated_removals(c, 0.9);
  ASSERT_EQ(removed.size(), 1u);
  EXPECT_EQ(removed[0], 0u);
}

TEST(Correlation, DuplicateAndNoise) {
  Rng rng(3);
  std::vector<double> a(200), b(200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
  }
  TabularDataset dup("t", {numeric("a", a), numeric("b", b), numeric("a2", a)}, alternating(200));
  const auto r = filter_correlated(dup, 0.9);
  EXPECT_EQ(r.data.columns(), 2u);
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_TRUE(r.removed[0].name == "a" || r.removed[0].name == "a2");
  EXPECT_EQ(r.removed[0].reason, RemovalReason::high_correlation);

  TabularDataset noise("t", {numeric("a", a), numeric("b", b)}, alternating(200));
  const Matrix m = noise.to_matrix();
  EXPECT_LT(std::abs(complete_case_correlation(m)(0, 1)), 0.9);
  EXPECT_TRUE(filter_correlated(noise, 0.9).removed.empty());
}

TEST(Correlation, ZeroVarianceIsAnError) {
  TabularDataset d("t", {numeric("a", {1, 2, 3, 4}), numeric("k", {5, 5, 5, 5})}, alternating(4));
  EXPECT_THROW(filter_correlated(d, 0.9), DataError);
}

TEST(Correlation, ResultHasNoPairAboveThreshold) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 60, p = 8;
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = rng.normal();
      for (std::size_t j = 0; j < p; ++j) cols[j][i] = z * (0.2 + 0.3 * static_cast<double>(j % 4)) + 0.3 * rng.normal();
    }
    std::vector<Column> cs;
    for (std::size_t j = 0; j < p; ++j) cs.push_back(numeric("c" + std::to_string(j), cols[j]));
    TabularDataset d("t", cs, alternating(n));
    const auto r = filter_correlated(d, 0.9);
    EXPECT_EQ(r.data.columns() + r.removed.size(), p);
    const auto c = complete_case_correlation(r.data.to_matrix());
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < c.cols(); ++j) EXPECT_LE(std::abs(c(i, j)), 0.9) << "seed " << seed;
    }
  }
}

TEST(Scaling, AffineAndUnclipped) {
  Matrix train(3, 2);
  train << 2, 7, 4, 7, 6, 7;
  const auto b = fit_scaling(train);
  const Matrix s = apply_scaling(b, train);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(s(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(s(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(1, 1), 0.0);
  Matrix test(1, 2);
  test << 8, 9;
  const Matrix t = apply_scaling(b, test);
  EXPECT_DOUBLE_EQ(t(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(t(0, 1), 0.0);
}

TEST(ImputeKnn, UnanimousNeighbours) {
  Matrix m(6, 2);
  m << 0.1, 0.4, 0.1, 0.4, 0.1, 0.4, 0.1, 0.4, 0.1, 0.4, 0.1, NaN;
  const Matrix out = impute_knn(m, 5);
  EXPECT_DOUBLE_EQ(out(5, 1), 0.4);
}

TEST(ImputeKnn, MeanOfNeighbours) {
  Matrix m(7, 2);
  m << 0.0, 0.2, 0.01, 0.4, 0.02, 0.6, 0.03, 0.8, 0.04, 1.0, 0.9, 5.0, 0.0, NaN;
  const Matrix out = impute_knn(m, 5);
  EXPECT_NEAR(out(6, 1), 0.6, 1e-15);
}

TEST(ImputeKnn, BruteForceOracle) {
  Rng rng(11);
  const Eigen::Index n = 10, p = 4;
  Matrix m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.uniform();
  }
  m(1, 2) = NaN;
  m(4, 0) = NaN;
  m(4, 3) = NaN;
  m(7, 1) = NaN;
  const int k = 3;
  const Matrix out = impute_knn(m, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isnan(m(r, j))) {
        EXPECT_EQ(out(r, j), m(r, j));
        continue;
      }
      // All pairwise distances, then the k closest rows observing column j.
      std::vector<std::pair<double, Eigen::Index>> all;
      for (Eigen::Index d = 0; d < n; ++d) {
        if (d == r || std::isnan(m(d, j))) continue;
        double s = 0;
        int used = 0;
        for (Eigen::Index q = 0; q < p; ++q) {
          if (std::isnan(m(r, q)) || std::isnan(m(d, q))) continue;
          s += (m(r, q) - m(d, q)) * (m(r, q) - m(d, q));
          ++used;
        }
        all.emplace_back(s * static_cast<double>(p) / used, d);
      }
      std::sort(all.begin(), all.end());
      double mean = 0;
      for (int i = 0; i < k; ++i) mean += m(all[static_cast<std::size_t>(i)].second, j);
      EXPECT_NEAR(out(r, j), mean / k, 1e-14) << r << "," << j;
    }
  }
}

TEST(ImputeKnn, TooFewDonorsWarns) {
  Matrix m(3, 2);
  m << 0.1, 0.2, 0.3, 0.4, 0.5, NaN;
  std::vector<std::string> warnings;
  const Matrix out = impute_knn(m, 5, &warnings);
  EXPECT_NEAR(out(2, 1), 0.3, 1e-15);
  EXPECT_FALSE(warnings.empty());
}

namespace {

TabularDataset mixed(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> a(n), b(n), r(n, 0.0);
  std::vector<std::string> c(n);
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 3 == 0 ? 1 : 0;
    a[i] = rng.normal() + y[i];
    b[i] = rng.uniform() < 0.1 ? NaN : rng.uniform() * 10;
    c[i] = std::string(1, static_cast<char>('A' + rng.index(3)));
    if (i % 7 == 0) c[i] = "";
  }
  r[5] = 1.0;
  return TabularDataset("m", {numeric("a", a), numeric("b", b), categorical("c", c), numeric("rare", r),
                              numeric("a_copy", a)},
                        y);
}

}  // namespace

TEST(Pipeline, OutputCompleteAndNumeric) {
  const auto d = mixed(120, 1);
  const auto split = stratified_split(d, 0.75, 3);
  const auto p = prepare(d, split);
  EXPECT_FALSE(p.train.features.array().isNaN().any());
  EXPECT_FALSE(p.test.features.array().isNaN().any());
  EXPECT_EQ(p.train.cols(), p.plan.kept_columns.size());
  EXPECT_EQ(p.train.rows(), split.train.size());
  EXPECT_EQ(p.test.rows(), split.test.size());
  const auto names = p.plan.kept_columns;
  EXPECT_EQ(std::count(names.begin(), names.end(), "rare"), 0);
  // Train columns land in [0, 1].
  EXPECT_GE(p.train.features.minCoeff(), 0.0);
  EXPECT_LE(p.train.features.maxCoeff(), 1.0);
  EXPECT_NE(p.plan.report().find("rare (near_zero_variance)"), std::string::npos);
}

TEST(Pipeline, TestTransformIsRepeatable) {
  const auto d = mixed(120, 2);
  const auto split = stratified_split(d, 0.75, 3);
  const auto plan = fit_preprocess(d, split.train);
  const Matrix a = transform(plan, d, split.test);
  const Matrix b = transform(plan, d, split.test);
  EXPECT_EQ(a.rows(), static_cast<Eigen::Index>(split.test.size()));
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(Pipeline, TestRowsDoNotTaintPlan) {
  const auto d = mixed(150, 3);
  const auto split = stratified_split(d, 0.75, 9);
  const auto plan = fit_preprocess(d, split.train);

  // Perturb every test row heavily, including categorical levels and labels.
  std::vector<Column> cols = d.predictors();
  Labels y = d.target();
  for (auto t : split.test) {
    for (auto& c : cols) {
      if (c.kind == ColumnKind::numeric) {
        c.numeric[t] = 1e6;
        c.missing[t] = 0;
      } else {
        c.categorical[t] = "NEW";
        c.missing[t] = 0;
      }
    }
    y[t] = 1 - y[t];
  }
  TabularDataset perturbed("m", cols, y);
  const auto plan2 = fit_preprocess(perturbed, split.train);
  EXPECT_EQ(plan.encodings, plan2.encodings);
  EXPECT_EQ(plan.removed_columns, plan2.removed_columns);
  EXPECT_EQ(plan.kept_columns, plan2.kept_columns);
  EXPECT_EQ(plan.scaling_bounds, plan2.scaling_bounds);
  EXPECT_TRUE((plan.imputation_donors.array().isNaN() == plan2.imputation_donors.array().isNaN()).all());
  EXPECT_EQ(plan.report(), plan2.report());
  const Matrix t1 = transform(plan, d, split.train);
  const Matrix t2 = transform(plan2, perturbed, split.train);
  EXPECT_TRUE((t1.array() == t2.array()).all());
}
