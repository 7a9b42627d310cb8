#include <benchmark/benchmark.h>

#include <vector>

#include "creditbench/metrics.hpp"
#include "creditbench/models.hpp"
#include "creditbench/random.hpp"
#include "creditbench/resample.hpp"
#include "creditbench/tree.hpp"

using namespace creditbench;

namespace {

TrainingSet toy(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  TrainingSet t;
  t.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.uniform() < 0.3 ? 1 : 0;
    t.labels.push_back(y);
    for (std::size_t j = 0; j < d; ++j) {
      t.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal() + (y ? -0.4 : 0.2);
    }
  }
  return t;
}

void BM_TreeFit(benchmark::State& state) {
  const auto t = toy(static_cast<std::size_t>(state.range(0)), 20, 1);
  std::vector<double> y;
  for (int l : t.labels) y.push_back(l == 0 ? 1.0 : 0.0);
  const std::vector<double> w(t.rows(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(RegressionTree::fit(t.features, y, w, {}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeFit)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_ForestFit(benchmark::State& state) {
  const auto t = toy(2000, 20, 2);
  ModelSpec s;
  s.family = Family::random_forest;
  s.params = {{"n_trees", static_cast<double>(state.range(0))}};
  for (auto _ : state) benchmark::DoNotOptimize(fit(s, t, 3));
}
BENCHMARK(BM_ForestFit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_KnnScore(benchmark::State& state) {
  const auto t = toy(static_cast<std::size_t>(state.range(0)), 10, 4);
  const auto q = toy(500, 10, 5).features;
  ModelSpec s;
  s.family = Family::knn;
  s.params = {{"k", 11}};
  const auto m = fit(s, t, 1);
  for (auto _ : state) benchmark::DoNotOptimize(m->score(q));
}
BENCHMARK(BM_KnnScore)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_Smote(benchmark::State& state) {
  const auto t = toy(static_cast<std::size_t>(state.range(0)), 10, 6);
  SamplerConfig c;
  c.kind = SamplerKind::smote;
  c.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(smote(t, c));
}
BENCHMARK(BM_Smote)->Arg(1000)->Arg(6000)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform() < 0.3 ? 1 : 0;
    s[i] = rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_cell(s, y, 0.7));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Metrics)->RangeMultiplier(8)->Range(512, 262144)->Complexity();

}  // namespace
BENCHMARK_MAIN();
