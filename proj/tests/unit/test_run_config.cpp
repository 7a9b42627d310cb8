#include <gtest/gtest.h>

#include <filesystem>

#include "creditbench/errors.hpp"
#include "creditbench/run_config.hpp"
#include "test_util.hpp"

using namespace creditbench;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(CREDITBENCH_DATA_DIR);

std::string config(const std::string& models, const std::string& extra = "") {
  return R"({"format_version": 1, "seed": 3, "output_dir": "out",
    "datasets": [{"name": "GC", "path": "german_credit.csv", "schema": "schemas/german_credit.json", "seed": 5}],
    "samplers": ["original", {"kind": "smote", "smote_over_pct": 100}],
    "models": )" + models + extra + "}";
}

}  // namespace

TEST(RunConfig, ParsesAndResolvesPaths) {
  const auto c = parse_config(config(R"(["logreg", "knn", {"family": "cart", "grid": {"cp": [0.01, 0.02]}}, "avg_simple"])"), kData);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.output_dir, kData / "out");
  ASSERT_EQ(c.datasets.size(), 1u);
  EXPECT_EQ(c.datasets[0].path, kData / "german_credit.csv");
  EXPECT_EQ(c.datasets[0].schema.name, "GC");
  EXPECT_DOUBLE_EQ(c.datasets[0].split_fraction, 0.75);
  ASSERT_EQ(c.samplers.size(), 2u);
  EXPECT_EQ(c.samplers[1].kind, SamplerKind::smote);
  EXPECT_EQ(c.samplers[1].smote_over_pct, 100);
  EXPECT_EQ(c.samplers[1].smote_under_pct, 200);
  ASSERT_EQ(c.models.size(), 4u);
  EXPECT_EQ(c.models[1].grid.candidates.at("k"), (std::vector<double>{5, 11, 21, 41}));
  EXPECT_EQ(c.models[2].grid.candidates.at("cp"), (std::vector<double>{0.01, 0.02}));
  EXPECT_EQ(c.metrics.size(), 6u);
  EXPECT_EQ(c.fold_count, 10u);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, FixedRemovesDefaultCandidate) {
  const auto c = parse_config(config(R"([{"family": "random_forest", "fixed": {"n_trees": 50}}, {"family": "sgb", "fixed": {"n_trees": 100}}])"), kData);
  EXPECT_EQ(c.models[0].grid.fixed.at("n_trees"), 50);
  EXPECT_TRUE(c.models[0].grid.candidates.count("mtry"));
  EXPECT_FALSE(c.models[1].grid.candidates.count("n_trees"));
  EXPECT_EQ(c.models[1].grid.expand().size(), 6u);
}

TEST(RunConfig, NamedMtry) {
  const auto c = parse_config(config(R"([{"family": "random_forest", "grid": {"mtry": ["sqrt", "half"]}}])"), kData);
  EXPECT_EQ(c.models[0].grid.candidates.at("mtry"), (std::vector<double>{0.0, 0.5}));
}

TEST(RunConfig, MetricsAndTuning) {
  const auto c = parse_config(config(R"(["lda"])", R"(, "metrics": ["auc", "ks"], "tuning": {"folds": 5, "selection": "kappa"})"), kData);
  EXPECT_EQ(c.metrics, (std::vector<Metric>{Metric::auc, Metric::ks}));
  EXPECT_EQ(c.models[0].grid.fold_count, 5u);
  EXPECT_EQ(c.models[0].grid.selection, SelectionMetric::kappa);
}

TEST(RunConfig, Errors) {
  EXPECT_THROW(parse_config("{not json", kData), ConfigError);
  EXPECT_THROW(parse_config(config(R"(["svm"])"), kData), ConfigError);
  EXPECT_THROW(parse_config(config(R"(["lda"])", R"(, "colour": 1)"), kData), ConfigError);
  EXPECT_THROW(parse_config(config(R"(["lda"])", R"(, "metrics": ["f1"])"), kData), ConfigError);
  EXPECT_THROW(parse_config(config(R"([{"family": "stacking", "grid": {"x": [1]}}])"), kData), ConfigError);
  EXPECT_THROW(parse_config(R"({"format_version": 2, "models": ["lda"]})", kData), ConfigError);
  EXPECT_THROW(parse_config(config(R"(["lda", "lda"])"), kData).validate(), ConfigError);
  EXPECT_THROW(parse_config(config(R"(["avg_simple"])"), kData).validate(), ConfigError);
  EXPECT_THROW(parse_config(config(R"([{"family": "knn", "grid": {"depth": [1]}}])"), kData).validate(), ConfigError);
  auto missing = parse_config(config(R"(["lda"])"), kData);
  missing.datasets[0].path = kData / "nope.csv";
  EXPECT_THROW(missing.validate(), ConfigError);
}

TEST(RunConfig, ShippedConfigsValidate) {
  for (const char* name : {"smoke.json", "german_desk.json", "full.json"}) {
    const auto c = load_config(fs::path(CREDITBENCH_DATA_DIR) / ".." / "configs" / name);
    EXPECT_NO_THROW(c.validate()) << name;
  }
}

TEST(Schema, ParsesInline) {
  const auto s = parse_schema(R"({"name": "toy", "default_label": "bad", "non_default_label": "good",
    "columns": [{"name": "y", "kind": "target"}, {"name": "x", "kind": "numeric"}, {"name": "c", "kind": "categorical"}]})");
  EXPECT_EQ(s.columns.size(), 3u);
  EXPECT_EQ(s.target().name, "y");
  EXPECT_THROW(parse_schema(R"({"name": "toy", "columns": [{"name": "y", "kind": "weird"}]})"), Error);
}
