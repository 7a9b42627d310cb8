#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "creditbench/errors.hpp"
#include "creditbench/tune.hpp"
#include "test_util.hpp"

using namespace creditbench;

namespace {

double cv_accuracy(const ModelSpec& spec, const TrainingSet& t, const TuningResult& r, std::uint64_t seed, std::size_t f) {
  std::vector<std::size_t> rows;
  for (std::size_t g = 0; g < r.folds.size(); ++g) {
    if (g != f) rows.insert(rows.end(), r.folds[g].begin(), r.folds[g].end());
  }
  std::sort(rows.begin(), rows.end());
  const auto model = fit(spec, select(t, rows), derive_seed(seed, f + 1));
  const Vector s = model->score(select_rows(t.features, r.folds[f]));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < r.folds[f].size(); ++i) {
    ok += (s(static_cast<Eigen::Index>(i)) >= 0.5 ? 0 : 1) == t.labels[r.folds[f][i]];
  }
  return static_cast<double>(ok) / static_cast<double>(r.folds[f].size());
}

}  // namespace

TEST(Folds, StratifiedPartition) {
  const auto t = cbtest::counts(73, 27, 1, 5);
  const auto folds = stratified_folds(t.labels, 10, 99);
  ASSERT_EQ(folds.size(), 10u);
  std::set<std::size_t> seen;
  std::size_t gmin = 1000, gmax = 0, bmin = 1000, bmax = 0;
  for (const auto& f : folds) {
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    const auto y = select_labels(t.labels, f);
    const auto g = count_label(y, 0), b = count_label(y, 1);
    gmin = std::min(gmin, g), gmax = std::max(gmax, g), bmin = std::min(bmin, b), bmax = std::max(bmax, b);
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_LE(gmax - gmin, 1u);
  EXPECT_LE(bmax - bmin, 1u);
  EXPECT_EQ(stratified_folds(t.labels, 10, 99), folds);
  EXPECT_NE(stratified_folds(t.labels, 10, 100), folds);
}

TEST(Folds, TooFewMinorityRows) {
  const auto t = cbtest::counts(50, 4, 1, 5);
  EXPECT_THROW(stratified_folds(t.labels, 10, 1), DataError);
}

TEST(Tune, SingletonGrid) {
  const auto t = cbtest::blobs(60, 40, 2, 1.0, 1);
  TuningGrid g;
  g.family = Family::cart;
  g.candidates = {{"cp", {0.01}}};
  const auto r = cv_grid_search(g, t, 3);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_DOUBLE_EQ(r.best.get("cp"), 0.01);
  EXPECT_EQ(r.table[0].fold_metric.size(), 10u);
}

TEST(Tune, EmptyGridMeansDefaults) {
  const auto t = cbtest::blobs(60, 40, 2, 1.0, 1);
  TuningGrid g;
  g.family = Family::lda;
  const auto r = cv_grid_search(g, t, 3);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_TRUE(r.best.params.empty());
}

TEST(Tune, DuplicateCandidatesMatch) {
  const auto t = cbtest::blobs(60, 40, 2, 1.0, 2);
  TuningGrid g;
  g.family = Family::random_forest;
  g.fixed = {{"n_trees", 15}};
  g.candidates = {{"mtry", {1, 1}}};
  const auto r = cv_grid_search(g, t, 3);
  ASSERT_EQ(r.table.size(), 2u);
  EXPECT_EQ(r.table[0].fold_metric, r.table[1].fold_metric);
  EXPECT_EQ(r.best_index, 0u);
}

TEST(Tune, KnnExtremeGridMatchesRefitOracle) {
  // Heavily overlapping blobs, 20% defaults: 1-NN stays well below the
  // 0.8 that the all-good prior scores.
  const auto t = cbtest::blobs(160, 40, 1, 0.5, 4);
  TuningGrid g;
  g.family = Family::knn;
  g.candidates = {{"k", {1, 201}}};
  const std::uint64_t seed = 6;
  const auto r = cv_grid_search(g, t, seed);
  for (std::size_t c = 0; c < 2; ++c) {
    double sum = 0.0;
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      const double a = cv_accuracy(r.table[c].spec, t, r, seed, f);
      EXPECT_DOUBLE_EQ(r.table[c].fold_metric[f], a);
      sum += a;
    }
    EXPECT_DOUBLE_EQ(r.table[c].mean, sum / static_cast<double>(r.folds.size()));
  }
  const std::size_t oracle = r.table[1].mean > r.table[0].mean ? 1 : 0;
  EXPECT_EQ(r.best_index, oracle);
  EXPECT_DOUBLE_EQ(r.best.get("k"), 201) << r.table[0].mean << " vs " << r.table[1].mean;
}

TEST(Tune, StagedSharingMatchesDirectFits) {
  const auto t = cbtest::blobs(60, 40, 2, 1.0, 8);
  TuningGrid g;
  g.family = Family::sgb;
  g.candidates = {{"n_trees", {5, 20}}, {"interaction_depth", {1, 2}}};
  const std::uint64_t seed = 10;
  const auto r = cv_grid_search(g, t, seed);
  ASSERT_EQ(r.table.size(), 4u);
  for (const auto& row : r.table) {
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      EXPECT_DOUBLE_EQ(row.fold_metric[f], cv_accuracy(row.spec, t, r, seed, f)) << row.spec.describe();
    }
  }
}

TEST(Tune, ExpandOrderAndValidation) {
  TuningGrid g;
  g.family = Family::adaboost;
  g.candidates = {{"max_depth", {1, 3}}, {"n_iter", {50, 100}}};
  const auto specs = g.expand();
  ASSERT_EQ(specs.size(), 4u);
  EXPECT_EQ(specs[0].param_string(), "max_depth=1;n_iter=50");
  EXPECT_EQ(specs[1].param_string(), "max_depth=1;n_iter=100");
  EXPECT_EQ(specs[3].param_string(), "max_depth=3;n_iter=100");

  TuningGrid bad;
  bad.family = Family::knn;
  bad.candidates = {{"depth", {1}}};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad.candidates = {{"k", {}}};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Tune, DefaultGrids) {
  EXPECT_EQ(default_grid(Family::knn).at("k"), (std::vector<double>{5, 11, 21, 41}));
  EXPECT_EQ(default_grid(Family::cart).at("cp").size(), 4u);
  EXPECT_EQ(default_grid(Family::sgb).size(), 3u);
  EXPECT_TRUE(default_grid(Family::lda).empty());
  for (Family f : base_families()) {
    TuningGrid g;
    g.family = f;
    g.candidates = default_grid(f);
    EXPECT_NO_THROW(g.validate()) << to_string(f);
  }
}

TEST(Tune, TuningCsv) {
  const auto t = cbtest::blobs(30, 20, 2, 1.0, 1);
  TuningGrid g;
  g.family = Family::knn;
  g.candidates = {{"k", {3, 5}}};
  std::ostringstream out;
  write_tuning_csv(out, cv_grid_search(g, t, 1));
  const auto text = out.str();
  EXPECT_EQ(text.rfind("candidate,family,params,mean", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
