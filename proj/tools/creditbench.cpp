// creditbench command line: run, report, metrics, validate.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/csv.hpp"
#include "creditbench/metrics.hpp"
#include "creditbench/report.hpp"
#include "creditbench/run_config.hpp"
#include "creditbench/runner.hpp"

namespace cb = creditbench;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int cmd_validate(const std::string& path) {
  const auto config = cb::load_config(path);
  config.validate();
  std::size_t base = 0;
  for (const auto& m : config.models) base += cb::is_heterogeneous(m.family) ? 0 : 1;
  std::cout << "ok: " << config.datasets.size() << " datasets, " << config.samplers.size() << " samplers, "
            << config.models.size() << " models (" << base << " base), "
            << config.datasets.size() * config.samplers.size() * config.models.size() << " cells\n";
  for (const auto& m : config.models) {
    if (cb::is_heterogeneous(m.family)) continue;
    std::cout << "  " << cb::to_string(m.family) << ": " << m.grid.expand().size() << " candidates\n";
  }
  return kOk;
}

int cmd_run(const std::string& path, const std::string& output_dir, std::size_t parallelism, bool quiet) {
  auto config = cb::load_config(path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (parallelism > 0) config.parallelism = parallelism;
  config.validate();
  const auto result = cb::run_benchmark(config, quiet ? nullptr : &std::cerr);
  for (const auto& p : cb::write_outputs(config, result)) std::cout << p.string() << '\n';
  return kOk;
}

int cmd_report(const std::string& path, const std::string& output_dir, const std::string& missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cb::DataError("cannot open " + path);
  const auto file = cb::read_records_csv(in);
  const auto policy = missing == "rank_worst" ? cb::MissingPolicy::rank_worst : cb::MissingPolicy::reject;
  const auto bundle = cb::build_reports(file.records, file.metrics, policy);
  const std::filesystem::path dir = output_dir.empty() ? std::filesystem::path(path).parent_path() : std::filesystem::path(output_dir);
  for (const auto& p : cb::write_report_files(bundle, dir.empty() ? "." : dir)) std::cout << p.string() << '\n';
  return kOk;
}

int cmd_metrics(const std::string& path, double train_good_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cb::DataError("cannot open " + path);
  const auto pred = cb::read_predictions(in);
  const double rate = train_good_rate >= 0 ? train_good_rate : pred.good_rate();
  const auto eval = cb::evaluate_cell(pred.scores, pred.labels, rate);
  cb::write_csv_row(std::cout, {"metric", "value"});
  for (cb::Metric m : cb::kAllMetrics) {
    cb::write_csv_row(std::cout, {std::string(cb::to_string(m)), cb::format_double(eval.metrics.get(m))});
  }
  cb::write_csv_row(std::cout, {"threshold", cb::format_double(eval.threshold.tau)});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Credit scoring benchmark: resampling, classifiers, metrics and rank tests"};
  app.require_subcommand(1);

  std::string config_path, records_path, predictions_path, output_dir, missing = "reject";
  std::size_t parallelism = 0;
  bool quiet = false;
  double good_rate = -1.0;

  auto* run = app.add_subcommand("run", "run the benchmark grid of a config");
  run->add_option("config", config_path, "run configuration (JSON)")->required();
  run->add_option("-o,--output-dir", output_dir, "override output_dir");
  run->add_option("-j,--parallelism", parallelism, "override the worker count");
  run->add_flag("-q,--quiet", quiet, "no progress lines");

  auto* report = app.add_subcommand("report", "rebuild reports from records.csv");
  report->add_option("records", records_path, "records.csv")->required();
  report->add_option("-o,--output-dir", output_dir, "where to write (default: next to records)");
  report->add_option("--missing", missing, "missing cells: reject or rank_worst")
      ->check(CLI::IsMember({"reject", "rank_worst"}));

  auto* metrics = app.add_subcommand("metrics", "evaluate a predictions file (id,score,label)");
  metrics->add_option("predictions", predictions_path, "predictions CSV")->required();
  metrics->add_option("--train-good-rate", good_rate, "good rate used to calibrate the cutoff (default: file's own)")
      ->check(CLI::Range(0.0, 1.0));

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "run configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, output_dir, parallelism, quiet);
    if (*report) return cmd_report(records_path, output_dir, missing);
    if (*metrics) return cmd_metrics(predictions_path, good_rate);
    if (*validate) return cmd_validate(config_path);
  } catch (const cb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
