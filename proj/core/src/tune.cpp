#include "creditbench/tune.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/metrics.hpp"
#include "creditbench/random.hpp"

namespace creditbench {

namespace {

double fold_metric(const Vector& scores, const Labels& truth, SelectionMetric metric) {
  Labels predicted(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) predicted[i] = scores(static_cast<Eigen::Index>(i)) >= 0.5 ? 0 : 1;
  const auto cm = confusion(truth, predicted);
  return metric == SelectionMetric::accuracy ? accuracy(cm) : cohen_kappa(cm);
}

// The name of a boosting family's round count, which staged scoring can
// evaluate from a single fit.
const char* stage_parameter(Family f) {
  if (f == Family::sgb) return "n_trees";
  if (f == Family::adaboost) return "n_iter";
  return nullptr;
}

}  // namespace

std::map<std::string, std::vector<double>> default_grid(Family family) {
  switch (family) {
    case Family::gaussian_nb: return {{"usekernel", {0, 1}}, {"fL", {0, 1}}};
    case Family::knn: return {{"k", {5, 11, 21, 41}}};
    case Family::cart: return {{"cp", {0.001, 0.005, 0.01, 0.05}}};
    case Family::random_forest: return {{"mtry", {0.0, 1.0 / 3.0, 0.5}}};
    case Family::adaboost: return {{"n_iter", {50, 100}}, {"max_depth", {1, 3}}};
    case Family::sgb: return {{"shrinkage", {0.01, 0.1}}, {"interaction_depth", {1, 3, 5}}, {"n_trees", {100, 500}}};
    default: return {};
  }
}

std::vector<ModelSpec> TuningGrid::expand() const {
  std::vector<ModelSpec> out(1);
  out[0].family = family;
  out[0].params = fixed;
  for (const auto& [name, values] : candidates) {
    std::vector<ModelSpec> next;
    for (const auto& base : out) {
      for (double v : values) {
        ModelSpec s = base;
        s.params[name] = v;
        next.push_back(std::move(s));
      }
    }
    out = std::move(next);
  }
  return out;
}

void TuningGrid::validate() const {
  if (fold_count < 2) throw ConfigError("fold_count must be at least 2");
  if (is_heterogeneous(family)) throw ConfigError("heterogeneous ensembles are not tuned by grid search");
  for (const auto& [name, values] : candidates) {
    if (values.empty()) throw ConfigError("grid for '" + name + "' is empty");
    if (fixed.contains(name)) throw ConfigError("'" + name + "' is both fixed and tuned");
  }
  for (const auto& spec : expand()) spec.validate();
}

std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError("need at least 2 folds");
  std::vector<std::vector<std::size_t>> folds(k);
  Rng rng(seed, hash_name("stratified_folds"));
  std::size_t offset = 0;
  for (int label : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == label) idx.push_back(i);
    }
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) folds[(offset + i) % k].push_back(idx[i]);
    offset = (offset + idx.size()) % k;
  }
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(folds[f].begin(), folds[f].end());
    std::size_t good = 0;
    for (auto i : folds[f]) good += is_good(y[i]) ? 1 : 0;
    if (good == 0 || good == folds[f].size()) {
      throw DataError("fold " + std::to_string(f + 1) + " of " + std::to_string(k) +
                      " lacks a class; each class needs at least " + std::to_string(k) + " rows");
    }
  }
  return folds;
}

TuningResult cv_grid_search(const TuningGrid& grid, const TrainingSet& train, std::uint64_t seed) {
  grid.validate();
  TuningResult result;
  try {
    result.folds = stratified_folds(train.labels, grid.fold_count, derive_seed(seed, hash_name("cv_folds")));
  } catch (const DataError&) {
    result.folds = stratified_folds(train.labels, grid.fold_count, derive_seed(seed, hash_name("cv_folds_retry")));
  }
  const auto specs = grid.expand();
  for (const auto& s : specs) result.table.push_back({s, {}, 0.0});

  const char* stage = stage_parameter(grid.family);
  for (std::size_t f = 0; f < result.folds.size(); ++f) {
    std::vector<std::size_t> fit_rows;
    for (std::size_t g = 0; g < result.folds.size(); ++g) {
      if (g != f) fit_rows.insert(fit_rows.end(), result.folds[g].begin(), result.folds[g].end());
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    const TrainingSet part = select(train, fit_rows);
    const Matrix held = select_rows(train.features, result.folds[f]);
    const Labels truth = select_labels(train.labels, result.folds[f]);
    const std::uint64_t fold_seed = derive_seed(seed, f + 1);
    std::vector<double> metric(specs.size());

    if (grid.family == Family::knn) {
      std::size_t k_max = 0;
      for (const auto& s : specs) k_max = std::max(k_max, static_cast<std::size_t>(s.get("k")));
      std::vector<std::size_t> all(part.rows());
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::vector<std::vector<std::size_t>> nn(static_cast<std::size_t>(held.rows()));
      for (Eigen::Index i = 0; i < held.rows(); ++i) {
        nn[static_cast<std::size_t>(i)] = nearest_rows(part.features, all, held.row(i), k_max);
      }
      for (std::size_t c = 0; c < specs.size(); ++c) {
        const auto k = static_cast<std::size_t>(specs[c].get("k"));
        Vector s(held.rows());
        for (Eigen::Index i = 0; i < held.rows(); ++i) {
          const auto& list = nn[static_cast<std::size_t>(i)];
          const std::size_t used = std::min(k, list.size());
          std::size_t good = 0;
          for (std::size_t j = 0; j < used; ++j) good += is_good(part.labels[list[j]]) ? 1 : 0;
          s(i) = static_cast<double>(good) / static_cast<double>(used);
        }
        metric[c] = fold_metric(s, truth, grid.selection);
      }
    } else if (stage != nullptr) {
      // Candidates that differ only in the round count share one fit.
      std::map<Hyperparameters, std::vector<std::size_t>> groups;
      for (std::size_t c = 0; c < specs.size(); ++c) {
        Hyperparameters key = specs[c].params;
        key.erase(stage);
        groups[key].push_back(c);
      }
      for (const auto& [key, members] : groups) {
        std::size_t rounds = 0;
        for (auto c : members) rounds = std::max(rounds, static_cast<std::size_t>(specs[c].get(stage)));
        ModelSpec big = specs[members.front()];
        big.params[stage] = static_cast<double>(rounds);
        const auto model = fit(big, part, fold_seed);
        for (auto c : members) {
          const auto s = staged_scores(*model, held, static_cast<std::size_t>(specs[c].get(stage)));
          metric[c] = fold_metric(s, truth, grid.selection);
        }
      }
    } else {
      for (std::size_t c = 0; c < specs.size(); ++c) {
        metric[c] = fold_metric(fit(specs[c], part, fold_seed)->score(held), truth, grid.selection);
      }
    }
    for (std::size_t c = 0; c < specs.size(); ++c) result.table[c].fold_metric.push_back(metric[c]);
  }

  for (auto& row : result.table) {
    row.mean = std::accumulate(row.fold_metric.begin(), row.fold_metric.end(), 0.0) /
               static_cast<double>(row.fold_metric.size());
  }
  for (std::size_t c = 1; c < result.table.size(); ++c) {
    if (result.table[c].mean > result.table[result.best_index].mean) result.best_index = c;
  }
  result.best = result.table[result.best_index].spec;
  return result;
}

void write_tuning_csv(std::ostream& out, const TuningResult& result) {
  std::vector<std::string> header{"candidate", "family", "params", "mean"};
  const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_metric.size();
  for (std::size_t f = 0; f < k; ++f) header.push_back("fold_" + std::to_string(f + 1));
  header.push_back("selected");
  write_csv_row(out, header);
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const auto& row = result.table[c];
    std::vector<std::string> fields{std::to_string(c), std::string(to_string(row.spec.family)), row.spec.param_string(),
                                    format_double(row.mean)};
    for (double m : row.fold_metric) fields.push_back(format_double(m));
    fields.push_back(c == result.best_index ? "1" : "0");
    write_csv_row(out, fields);
  }
}

}  // namespace creditbench
