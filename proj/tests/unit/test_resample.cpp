#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/resample.hpp"
#include "test_util.hpp"

using namespace creditbench;

namespace {

std::pair<std::size_t, std::size_t> good_bad(const ResampledSet& s) {
  return {count_label(s.data.labels, 0), count_label(s.data.labels, 1)};
}

std::pair<std::size_t, std::size_t> counts_of(std::size_t good, std::size_t bad) { return {good, bad}; }

SamplerConfig with_seed(SamplerKind kind, std::uint64_t seed) {
  SamplerConfig c;
  c.kind = kind;
  c.seed = seed;
  return c;
}

void expect_originals_are_copies(const ResampledSet& s, const TrainingSet& in) {
  ASSERT_EQ(s.provenance.size(), s.rows());
  ASSERT_EQ(s.parent.size(), s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.provenance[i] == Provenance::synthetic) continue;
    const auto p = s.parent[i];
    ASSERT_LT(p, in.rows());
    EXPECT_TRUE((s.data.features.row(static_cast<Eigen::Index>(i)).array() ==
                 in.features.row(static_cast<Eigen::Index>(p)).array()).all());
    EXPECT_EQ(s.data.labels[i], in.labels[p]);
  }
}

}  // namespace

TEST(Downsample, TableCounts) {
  const auto gc = cbtest::counts(525, 225, 3, 1);
  EXPECT_EQ(good_bad(downsample(gc, 1)), counts_of(225, 225));
  const auto gmsc = cbtest::counts(5250, 377, 3, 2);
  EXPECT_EQ(good_bad(downsample(gmsc, 1)), counts_of(377, 377));
  EXPECT_EQ(good_bad(downsample(gmsc, 1, 144)), counts_of(144, 144));
}

TEST(Downsample, KeepsAllMinorityWithoutReplacement) {
  const auto t = cbtest::counts(50, 20, 2, 3);
  const auto s = downsample(t, 9);
  std::vector<std::size_t> parents = s.parent;
  std::sort(parents.begin(), parents.end());
  EXPECT_EQ(std::adjacent_find(parents.begin(), parents.end()), parents.end());
  std::size_t minority_kept = 0;
  for (auto p : parents) minority_kept += t.labels[p] == 1;
  EXPECT_EQ(minority_kept, 20u);
  expect_originals_are_copies(s, t);
}

TEST(Downsample, BalancedIsNoOp) {
  const auto t = cbtest::counts(30, 30, 2, 4);
  const auto s = downsample(t, 1);
  EXPECT_EQ(good_bad(s), counts_of(30, 30));
  for (auto p : s.provenance) EXPECT_EQ(p, Provenance::original);
}

TEST(Upsample, TableCounts) {
  EXPECT_EQ(good_bad(upsample(cbtest::counts(525, 225, 2, 1), 3)), counts_of(525, 525));
  EXPECT_EQ(good_bad(upsample(cbtest::counts(5250, 377, 2, 1), 3)), counts_of(5250, 5250));
  const auto b = cbtest::counts(20, 20, 2, 1);
  const auto s = upsample(b, 3);
  EXPECT_EQ(s.rows(), 40u);
  EXPECT_TRUE((s.data.features.array() == b.features.array()).all());
}

TEST(Upsample, MinorityIsDefaultOrGood) {
  // AC has more defaults than non-defaults; the good class is the minority.
  const auto ac = cbtest::counts(231, 288, 2, 5);
  EXPECT_EQ(good_bad(upsample(ac, 1)), counts_of(288, 288));
  expect_originals_are_copies(upsample(ac, 1), ac);
}

TEST(Smote, TableCounts) {
  const std::tuple<std::size_t, std::size_t, std::size_t, std::size_t> rows[] = {
      {525, 225, 900, 675}, {231, 288, 693, 924}, {1753, 498, 1992, 1494}, {5250, 377, 1508, 1131}};
  for (const auto& [g, b, eg, eb] : rows) {
    const auto s = smote(cbtest::counts(g, b, 2, g), with_seed(SamplerKind::smote, 1));
    EXPECT_EQ(good_bad(s), std::make_pair(eg, eb)) << g << "/" << b;
  }
}

TEST(Smote, SyntheticRowsLieOnNeighbourSegments) {
  const auto t = cbtest::counts(200, 60, 3, 8);
  const auto s = smote(t, with_seed(SamplerKind::smote, 4));
  const std::size_t k = 5;
  std::vector<std::size_t> minor;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t.labels[i] == 1) minor.push_back(i);
  }
  std::size_t checked = 0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.provenance[i] != Provenance::synthetic) continue;
    const auto p = s.parent[i];
    const Eigen::RowVectorXd xp = t.features.row(static_cast<Eigen::Index>(p));
    std::vector<std::pair<double, std::size_t>> d;
    for (auto m : minor) {
      if (m != p) d.emplace_back((t.features.row(static_cast<Eigen::Index>(m)) - xp).squaredNorm(), m);
    }
    std::sort(d.begin(), d.end());
    const Eigen::RowVectorXd x = s.data.features.row(static_cast<Eigen::Index>(i));
    bool on_segment = false;
    for (std::size_t n = 0; n < k && !on_segment; ++n) {
      const Eigen::RowVectorXd diff = t.features.row(static_cast<Eigen::Index>(d[n].second)) - xp;
      const Eigen::Index j = 0;
      const double u = (x(j) - xp(j)) / diff(j);
      if (!(u >= -1e-9 && u <= 1 + 1e-9)) continue;
      on_segment = ((xp + u * diff) - x).cwiseAbs().maxCoeff() <= 1e-9;
    }
    EXPECT_TRUE(on_segment) << "row " << i;
    EXPECT_EQ(s.data.labels[i], 1);
    ++checked;
  }
  EXPECT_EQ(checked, 120u);
  expect_originals_are_copies(s, t);
}

TEST(Smote, TooFewMinorityRows) {
  EXPECT_THROW(smote(cbtest::counts(20, 5, 2, 1), with_seed(SamplerKind::smote, 1)), DataError);
}

TEST(Smote, OverBelowHundredUsesSubset) {
  auto c = with_seed(SamplerKind::smote, 2);
  c.smote_over_pct = 50;
  const auto s = smote(cbtest::counts(100, 40, 2, 6), c);
  std::size_t synth = 0;
  for (auto p : s.provenance) synth += p == Provenance::synthetic;
  EXPECT_EQ(synth, 20u);
  EXPECT_EQ(count_label(s.data.labels, 0), 40u);
}

TEST(Samplers, Deterministic) {
  const auto t = cbtest::counts(80, 30, 3, 12);
  for (auto kind : {SamplerKind::down, SamplerKind::up, SamplerKind::smote, SamplerKind::bsmote, SamplerKind::rose}) {
    const auto a = resample(t, with_seed(kind, 77));
    const auto b = resample(t, with_seed(kind, 77));
    EXPECT_TRUE((a.data.features.array() == b.data.features.array()).all()) << to_string(kind);
    EXPECT_EQ(a.data.labels, b.data.labels);
    EXPECT_EQ(a.parent, b.parent);
    EXPECT_EQ(a.data.features.cols(), t.features.cols());
  }
}

TEST(Samplers, NamesRoundTrip) {
  for (auto kind : {SamplerKind::none, SamplerKind::down, SamplerKind::up, SamplerKind::smote, SamplerKind::bsmote,
                    SamplerKind::rose}) {
    EXPECT_EQ(sampler_from_string(to_string(kind)), kind);
  }
  EXPECT_EQ(sampler_from_string("none"), SamplerKind::none);
  EXPECT_THROW(sampler_from_string("tomek"), ConfigError);
}

TEST(Samplers, ConfigValidation) {
  SamplerConfig c;
  c.smote_k = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.bsmote_m = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.smote_over_pct = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

namespace {

// 1-D layout: defaults (minority) at 0..4, good rows at 10..29, plus one
// default deep inside the good cluster and one at the edge.
TrainingSet borderline_toy() {
  TrainingSet t;
  std::vector<double> x;
  for (int i = 0; i < 5; ++i) {
    x.push_back(i);
    t.labels.push_back(1);
  }
  for (int i = 0; i < 20; ++i) {
    x.push_back(10 + i);
    t.labels.push_back(0);
  }
  x.push_back(20.5);  // surrounded by majority: noise
  t.labels.push_back(1);
  x.push_back(8.0);  // edge: neighbours split between the clusters
  t.labels.push_back(1);
  t.features = Eigen::Map<Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
  return t;
}

}  // namespace

TEST(BorderlineSmote, DangerSetMatchesEnumeration) {
  const auto t = borderline_toy();
  const int m = 4;
  std::vector<std::size_t> expect;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t.labels[i] != 1) continue;
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < t.rows(); ++j) {
      if (j != i) d.emplace_back(std::abs(t.features(static_cast<Eigen::Index>(j), 0) - t.features(static_cast<Eigen::Index>(i), 0)), j);
    }
    std::sort(d.begin(), d.end());
    int maj = 0;
    for (int n = 0; n < m; ++n) maj += t.labels[d[static_cast<std::size_t>(n)].second] == 0;
    if (2 * maj >= m && maj < m) expect.push_back(i);
  }
  EXPECT_EQ(danger_set(t, m), expect);
  // The noise point (index 25) and the safe cluster are excluded.
  EXPECT_EQ(std::count(expect.begin(), expect.end(), 25u), 0);
  EXPECT_EQ(std::count(expect.begin(), expect.end(), 0u), 0);
  EXPECT_EQ(expect, (std::vector<std::size_t>{26}));
}

TEST(BorderlineSmote, BalancesFromDangerRowsOnly) {
  const auto t = borderline_toy();
  auto c = with_seed(SamplerKind::bsmote, 3);
  c.smote_k = 2;
  c.bsmote_m = 4;
  const auto s = borderline_smote(t, c);
  EXPECT_EQ(count_label(s.data.labels, 1), count_label(s.data.labels, 0));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.provenance[i] == Provenance::synthetic) EXPECT_EQ(s.parent[i], 26u);
  }
  expect_originals_are_copies(s, t);
}

TEST(BorderlineSmote, EmptyDangerSetWarnsAndReturnsInput) {
  const auto t = cbtest::blobs(60, 20, 2, 40.0, 1);
  auto c = with_seed(SamplerKind::bsmote, 3);
  const auto s = borderline_smote(t, c);
  EXPECT_EQ(s.rows(), t.rows());
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Rose, RowCountAndClassShare) {
  const auto t = cbtest::counts(525, 225, 4, 2);
  const auto s = rose(t, with_seed(SamplerKind::rose, 5));
  ASSERT_EQ(s.rows(), 750u);
  const double share = static_cast<double>(count_label(s.data.labels, 1)) / 750.0;
  EXPECT_NEAR(share, 0.5, 4 * std::sqrt(0.25 / 750));
}

TEST(Rose, ZeroShrinkIsBootstrap) {
  const auto t = cbtest::counts(50, 20, 3, 2);
  auto c = with_seed(SamplerKind::rose, 5);
  c.rose_shrink = 0;
  const auto s = rose(t, c);
  for (auto p : s.provenance) EXPECT_EQ(p, Provenance::duplicate);
  expect_originals_are_copies(s, t);
}

TEST(Rose, SingleMemberClassWarns) {
  auto t = cbtest::counts(30, 1, 2, 2);
  const auto s = rose(t, with_seed(SamplerKind::rose, 1));
  EXPECT_FALSE(s.warnings.empty());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.data.labels[i] == 1) EXPECT_EQ(s.provenance[i], Provenance::duplicate);
  }
}

TEST(ResampledCsv, ProvenanceColumn) {
  const auto t = cbtest::counts(10, 6, 2, 1);
  auto c = with_seed(SamplerKind::smote, 1);
  c.smote_k = 3;
  const auto s = smote(t, c);
  std::ostringstream out;
  write_resampled_csv(out, s);
  std::istringstream in(out.str());
  const auto table = read_csv(in);
  EXPECT_EQ(table.rows.size(), s.rows());
  EXPECT_GE(table.column("provenance"), 0);
  EXPECT_EQ(table.rows[s.rows() - 1][static_cast<std::size_t>(table.column("provenance"))],
            std::string(to_string(s.provenance.back())));
}
