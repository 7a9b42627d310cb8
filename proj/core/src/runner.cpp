#include "creditbench/runner.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"
#include "creditbench/version.hpp"

namespace creditbench {

namespace {

struct Scenario {
  std::string dataset;
  std::string sampler;
  TrainingSet train;  // resampled
  const TrainingSet* test = nullptr;
  double train_good_rate = 0.0;  // before resampling
};

struct Cell {
  std::size_t scenario = 0;
  std::size_t model = 0;  // index into config.models
  EvaluationRecord record;
  ModelPtr fitted;
  ModelSpec best;
  double cv_mean = 0.0;
  std::string tuning_csv;
  std::exception_ptr error;
};

std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset, const std::string& sampler,
                        const std::string& model) {
  return derive_seed(master, hash_name(dataset + "|" + sampler + "|" + model));
}

// Runs jobs 0..n-1 on up to `workers` threads. Jobs write only to their own slot.
void run_pool(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::string member_list(const std::vector<ModelSpec>& members) {
  std::string s;
  for (const auto& m : members) s += (s.empty() ? "" : "+") + std::string(to_string(m.family));
  return s;
}

void finish(Cell& cell, const Scenario& sc, const ModelPtr& model) {
  const Vector scores = model->score(sc.test->features);
  const auto eval = evaluate_cell(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                  sc.test->labels, sc.train_good_rate);
  cell.record.metrics = eval.metrics;
  cell.record.threshold = eval.threshold.tau;
  cell.fitted = model;
}

}  // namespace

RunResult run_benchmark(const RunConfig& config, std::ostream* log) {
  config.validate();
  RunResult result;
  std::mutex log_mutex;
  auto say = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    *log << line << std::endl;
  };

  // Test sets live here so scenarios can point at them.
  std::vector<TrainingSet> tests;
  tests.reserve(config.datasets.size());
  std::vector<Scenario> scenarios;
  for (const auto& entry : config.datasets) {
    TabularDataset data = load_csv(entry.path, entry.schema);
    if (entry.subset_fraction < 1.0) data = stratified_subset(data, entry.subset_fraction, entry.seed);
    const SplitIndices split = stratified_split(data, entry.split_fraction, entry.seed);
    PreparedData prepared = prepare(data, split, config.preprocess);

    DatasetSummary summary;
    summary.name = entry.name;
    summary.rows = data.rows();
    summary.train_rows = split.train.size();
    summary.test_rows = split.test.size();
    summary.default_rate = data.default_rate();
    summary.preprocessing = prepared.plan.report();
    summary.warnings = prepared.warnings;
    say(entry.name + ": " + std::to_string(summary.rows) + " rows, " + std::to_string(prepared.train.cols()) +
        " features after preprocessing");

    tests.push_back(std::move(prepared.test));
    const double good_rate = 1.0 - static_cast<double>(count_label(prepared.train.labels, 1)) /
                                       static_cast<double>(prepared.train.rows());
    for (SamplerConfig sc : config.samplers) {
      const std::string sampler = std::string(to_string(sc.kind));
      sc.seed = derive_seed(config.seed, hash_name(entry.name + "|" + sampler));
      ResampledSet rs = resample(prepared.train, sc);
      for (const auto& w : rs.warnings) summary.warnings.push_back(sampler + ": " + w);
      summary.samplers.push_back(sampler + " " + std::to_string(count_label(rs.data.labels, 0)) + "/" +
                                 std::to_string(count_label(rs.data.labels, 1)));
      scenarios.push_back({entry.name, sampler, std::move(rs.data), nullptr, good_rate});
    }
    result.datasets.push_back(std::move(summary));
  }
  for (std::size_t s = 0; s < scenarios.size(); ++s) scenarios[s].test = &tests[s / config.samplers.size()];

  std::vector<Cell> cells;
  std::vector<std::size_t> base_cells, ensemble_cells;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (std::size_t m = 0; m < config.models.size(); ++m) {
      Cell c;
      c.scenario = s;
      c.model = m;
      c.record.dataset = scenarios[s].dataset;
      c.record.sampler = scenarios[s].sampler;
      c.record.model = std::string(to_string(config.models[m].family));
      (is_heterogeneous(config.models[m].family) ? ensemble_cells : base_cells).push_back(cells.size());
      cells.push_back(std::move(c));
    }
  }

  const std::size_t total = cells.size();
  std::atomic<std::size_t> done{0};
  auto run_cell = [&](std::size_t index, const std::function<void(Cell&, const Scenario&, std::uint64_t)>& body) {
    Cell& cell = cells[index];
    const Scenario& sc = scenarios[cell.scenario];
    const auto start = std::chrono::steady_clock::now();
    try {
      body(cell, sc, cell_seed(config.seed, cell.record.dataset, cell.record.sampler, cell.record.model));
    } catch (const std::exception& e) {
      cell.error = std::current_exception();
      cell.record.status = std::string("failed: ") + e.what();
      cell.fitted.reset();
    }
    cell.record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << '[' << ++done << '/' << total << "] " << cell.record.dataset << ' ' << cell.record.sampler << ' '
         << cell.record.model << ' ' << format_fixed(cell.record.wall_seconds, 2) << "s";
    if (!cell.record.ok()) line << ' ' << cell.record.status;
    say(line.str());
  };

  auto rethrow_first = [&](const std::vector<std::size_t>& which) {
    if (config.skip_on_error) return;
    for (auto i : which) {
      if (cells[i].error) std::rethrow_exception(cells[i].error);
    }
  };

  run_pool(base_cells.size(), config.parallelism, [&](std::size_t j) {
    run_cell(base_cells[j], [&](Cell& cell, const Scenario& sc, std::uint64_t seed) {
      TuningGrid grid = config.models[cell.model].grid;
      grid.fold_count = config.fold_count;
      grid.selection = config.selection;
      const TuningResult tuned = cv_grid_search(grid, sc.train, seed);
      cell.best = tuned.best;
      cell.cv_mean = tuned.table[tuned.best_index].mean;
      cell.record.params = tuned.best.param_string();
      if (config.write_models) {
        std::ostringstream t;
        write_tuning_csv(t, tuned);
        cell.tuning_csv = t.str();
      }
      finish(cell, sc, fit(tuned.best, sc.train, seed));
    });
  });
  rethrow_first(base_cells);

  const std::size_t per_scenario = config.models.size();
  run_pool(ensemble_cells.size(), config.parallelism, [&](std::size_t j) {
    run_cell(ensemble_cells[j], [&](Cell& cell, const Scenario& sc, std::uint64_t seed) {
      std::vector<const Cell*> members;
      for (std::size_t m = 0; m < per_scenario; ++m) {
        const Cell& other = cells[cell.scenario * per_scenario + m];
        if (is_heterogeneous(config.models[m].family)) continue;
        if (!other.record.ok()) throw ModelError("member " + other.record.model + " failed");
        members.push_back(&other);
      }
      if (members.empty()) throw ConfigError("heterogeneous ensemble without base models");
      const Family family = config.models[cell.model].family;
      ModelSpec spec;
      spec.family = family;
      spec.params = config.models[cell.model].grid.fixed;
      for (const Cell* m : members) spec.members.push_back(m->best);
      cell.best = spec;
      cell.record.params = spec.param_string();
      if (!cell.record.params.empty()) cell.record.params += ";";
      cell.record.params += "members=" + member_list(spec.members);
      if (family == Family::stacking) {
        finish(cell, sc, fit_stacking(spec, sc.train, seed));
        return;
      }
      std::vector<ModelPtr> fitted;
      std::vector<double> weights;
      for (const Cell* m : members) {
        fitted.push_back(m->fitted);
        weights.push_back(family == Family::avg_weighted ? m->cv_mean : 1.0);
      }
      finish(cell, sc, make_average(std::move(fitted), std::move(weights)));
    });
  });
  rethrow_first(ensemble_cells);

  if (config.write_models) {
    const auto dir = config.output_dir / "models";
    std::filesystem::create_directories(dir);
    for (const auto& c : cells) {
      const std::string stem = c.record.dataset + "_" + c.record.sampler + "_" + c.record.model;
      if (c.fitted) {
        std::ofstream out(dir / (stem + ".model"), std::ios::binary);
        save_model(out, *c.fitted);
      }
      if (!c.tuning_csv.empty()) std::ofstream(dir / (stem + "_tuning.csv"), std::ios::binary) << c.tuning_csv;
    }
  }

  for (auto& c : cells) result.records.push_back(std::move(c.record));
  result.bundle = build_reports(result.records, config.metrics,
                                config.skip_on_error ? MissingPolicy::rank_worst : MissingPolicy::reject);
  return result;
}

std::string provenance_text(const RunConfig& config, const RunResult& result) {
  std::ostringstream out;
  out << "creditbench " << kVersion << '\n';
  out << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
  out << "boost " << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100 << '\n';
  out << "seed " << config.seed << '\n';
  out << "tuning folds " << config.fold_count << ", selection "
      << (config.selection == SelectionMetric::accuracy ? "accuracy" : "kappa") << '\n';
  out << "metrics";
  for (Metric m : config.metrics) out << ' ' << to_string(m);
  out << "\npreprocess freq_ratio_cut=" << format_double(config.preprocess.freq_ratio_cut)
      << " unique_pct_cut=" << format_double(config.preprocess.unique_pct_cut)
      << " correlation_threshold=" << format_double(config.preprocess.correlation_threshold)
      << " imputation_k=" << config.preprocess.imputation_k << "\n\n";
  for (std::size_t d = 0; d < result.datasets.size(); ++d) {
    const auto& s = result.datasets[d];
    const auto& e = config.datasets[d];
    out << "dataset " << s.name << '\n';
    out << "  path " << e.path.filename().string() << '\n';
    out << "  seed " << e.seed << ", subset " << format_double(e.subset_fraction) << ", split "
        << format_double(e.split_fraction) << '\n';
    out << "  rows " << s.rows << " (train " << s.train_rows << ", test " << s.test_rows << "), default rate "
        << format_fixed(s.default_rate, 4) << '\n';
    std::istringstream plan(s.preprocessing);
    for (std::string line; std::getline(plan, line);) out << "  " << line << '\n';
    for (const auto& smp : s.samplers) out << "  sampler " << smp << " (good/bad)\n";
    for (const auto& w : s.warnings) out << "  warning: " << w << '\n';
    out << '\n';
  }
  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.ok() ? 0 : 1;
  out << "cells " << result.records.size() << ", failed " << failed << '\n';
  for (const auto& r : result.records) {
    if (!r.ok()) out << "  " << r.dataset << ' ' << r.sampler << ' ' << r.model << ": " << r.status << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_outputs(const RunConfig& config, const RunResult& result) {
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& name) {
    written.push_back(dir / name);
    std::ofstream out(written.back(), std::ios::binary);
    if (!out) throw Error("cannot write " + written.back().string());
    return out;
  };
  {
    auto out = open("records.csv");
    write_records_csv(out, result.records, config.metrics);
  }
  {
    auto out = open("timings.csv");
    write_timings_csv(out, result.records);
  }
  open("provenance.txt") << provenance_text(config, result);
  const auto reports = write_report_files(result.bundle, dir);
  written.insert(written.end(), reports.begin(), reports.end());
  return written;
}

}  // namespace creditbench
