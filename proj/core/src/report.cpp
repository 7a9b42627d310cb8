#include "creditbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"

namespace creditbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t index_of(std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  names.push_back(name);
  return names.size() - 1;
}

std::string rank_text(double r) { return format_fixed(r, 1); }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<EvaluationRecord>& records, const std::vector<Metric>& metrics) {
  std::vector<std::string> header{"dataset", "sampler", "model", "params"};
  for (Metric m : metrics) header.emplace_back(to_string(m));
  header.insert(header.end(), {"threshold", "status"});
  write_csv_row(out, header);
  for (const auto& r : records) {
    std::vector<std::string> row{r.dataset, r.sampler, r.model, r.params};
    for (Metric m : metrics) row.push_back(r.ok() ? format_double(r.metrics.get(m)) : "NA");
    row.push_back(r.ok() ? format_double(r.threshold) : "NA");
    row.push_back(r.status);
    write_csv_row(out, row);
  }
}

void write_timings_csv(std::ostream& out, const std::vector<EvaluationRecord>& records) {
  write_csv_row(out, {"dataset", "sampler", "model", "wall_seconds"});
  for (const auto& r : records) write_csv_row(out, {r.dataset, r.sampler, r.model, format_fixed(r.wall_seconds, 3)});
}

RecordsFile read_records_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const long d = table.column("dataset"), s = table.column("sampler"), m = table.column("model");
  if (d < 0 || s < 0 || m < 0) throw DataError("records file needs dataset, sampler and model columns");
  const long params = table.column("params"), thr = table.column("threshold"), status = table.column("status");
  RecordsFile out;
  std::vector<long> metric_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    for (Metric metric : kAllMetrics) {
      if (table.header[c] != to_string(metric)) continue;
      out.metrics.push_back(metric);
      metric_cols.push_back(static_cast<long>(c));
    }
  }
  if (out.metrics.empty()) throw DataError("records file has no metric columns");
  auto number = [&](const std::string& cell, std::size_t row) {
    if (cell == "NA" || cell.empty()) return kNaN;
    double v = 0.0;
    if (!parse_double(cell, v)) throw DataError("records row " + std::to_string(row + 2) + ": '" + cell + "' is not a number");
    return v;
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    EvaluationRecord e;
    e.dataset = row[static_cast<std::size_t>(d)];
    e.sampler = row[static_cast<std::size_t>(s)];
    e.model = row[static_cast<std::size_t>(m)];
    if (params >= 0) e.params = row[static_cast<std::size_t>(params)];
    for (std::size_t k = 0; k < out.metrics.size(); ++k) {
      e.metrics.set(out.metrics[k], number(row[static_cast<std::size_t>(metric_cols[k])], r));
    }
    e.threshold = thr >= 0 ? number(row[static_cast<std::size_t>(thr)], r) : kNaN;
    if (status >= 0) e.status = row[static_cast<std::size_t>(status)];
    out.records.push_back(std::move(e));
  }
  return out;
}

std::vector<ScenarioTable> tables_from_records(const std::vector<EvaluationRecord>& records,
                                               const std::vector<Metric>& metrics) {
  std::vector<std::string> scenarios, classifiers, datasets;
  for (const auto& r : records) {
    index_of(scenarios, r.sampler);
    index_of(classifiers, r.model);
    index_of(datasets, r.dataset);
  }
  std::vector<ScenarioTable> tables;
  for (const auto& name : scenarios) {
    ScenarioTable t;
    t.scenario = name;
    t.classifiers = classifiers;
    t.datasets = datasets;
    t.metrics = metrics;
    for (Metric m : metrics) {
      t.values[m] = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(classifiers.size()),
                                              static_cast<Eigen::Index>(datasets.size()), kNaN);
    }
    tables.push_back(std::move(t));
  }
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, bool> seen;
  for (const auto& r : records) {
    const std::size_t s = index_of(scenarios, r.sampler);
    const std::size_t c = index_of(classifiers, r.model);
    const std::size_t d = index_of(datasets, r.dataset);
    if (seen[{s, c, d}]) {
      throw DataError("duplicate record for dataset " + r.dataset + ", sampler " + r.sampler + ", model " + r.model);
    }
    seen[{s, c, d}] = true;
    if (!r.ok()) continue;
    for (Metric m : metrics) {
      tables[s].values[m](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) = r.metrics.get(m);
    }
  }
  return tables;
}

ReportBundle build_reports(const std::vector<EvaluationRecord>& records, const std::vector<Metric>& metrics,
                           MissingPolicy policy) {
  if (records.empty()) throw DataError("no records to report");
  ReportBundle b;
  b.tables = tables_from_records(records, metrics);
  for (const auto& t : b.tables) b.reports.push_back(aggregate_report(t, policy));
  if (b.tables.size() >= 2) b.samplers = compare_samplers(b.tables);
  return b;
}

std::string render_markdown(const ComparisonReport& report) {
  std::ostringstream out;
  out << "# Results: " << report.scenario << "\n\n";
  out << "Datasets: ";
  for (std::size_t i = 0; i < report.datasets.size(); ++i) out << (i ? ", " : "") << report.datasets[i];
  out << " (N=" << report.datasets.size() << "). Metrics: ";
  for (std::size_t i = 0; i < report.metrics.size(); ++i) out << (i ? ", " : "") << display_name(report.metrics[i].metric);
  out << ". AvgR is the mean of the " << report.metrics.size() << " per-metric average ranks";
  if (report.metrics.size() < kAllMetrics.size()) {
    out << " (disabled:";
    for (Metric m : kAllMetrics) {
      const bool used = std::any_of(report.metrics.begin(), report.metrics.end(), [&](const MetricSummary& s) { return s.metric == m; });
      if (!used) out << ' ' << display_name(m);
    }
    out << ')';
  }
  out << ".\nBold: best average rank per metric. Underlined: significantly worse than the best (Nemenyi, alpha 0.05).\n\n";

  out << "| Classifier |";
  for (const auto& s : report.metrics) out << ' ' << display_name(s.metric) << " |";
  out << " AvgR | Rank |\n|---|";
  for (std::size_t i = 0; i < report.metrics.size(); ++i) out << "---:|";
  out << "---:|---:|\n";
  for (std::size_t c = 0; c < report.classifiers.size(); ++c) {
    out << "| " << report.classifiers[c] << " |";
    for (const auto& s : report.metrics) {
      std::string cell = rank_text(s.average_rank[c]);
      if (s.nemenyi && s.nemenyi->worse_than_best[c]) cell = "<u>" + cell + "</u>";
      if (s.average_rank[c] == s.average_rank[s.best]) cell = "**" + cell + "**";
      out << ' ' << cell << " |";
    }
    out << ' ' << format_fixed(report.avg_r[c], 1) << " | " << report.overall_rank[c] << " |\n";
  }
  const bool any_friedman = std::any_of(report.metrics.begin(), report.metrics.end(), [](const MetricSummary& s) { return s.friedman.has_value(); });
  if (any_friedman) {
    out << "| Friedman chi2 (p) |";
    for (const auto& s : report.metrics) {
      if (s.friedman) out << ' ' << format_fixed(s.friedman->statistic, 3) << " (" << format_fixed(s.friedman->p_value, 3) << ") |";
      else out << " - |";
    }
    out << " | |\n";
  }
  out << '\n';
  for (const auto& s : report.metrics) {
    if (s.nemenyi) {
      out << "- " << display_name(s.metric) << ": Nemenyi critical difference " << format_fixed(s.nemenyi->critical_difference, 3) << '\n';
    }
  }
  for (const auto& n : report.notes) out << "- " << n << '\n';
  return out.str();
}

void write_report_csv(std::ostream& out, const ComparisonReport& report) {
  std::vector<std::string> header{"classifier"};
  for (const auto& s : report.metrics) header.push_back(std::string(to_string(s.metric)) + "_avg_rank");
  for (const auto& s : report.metrics) header.push_back(std::string(to_string(s.metric)) + "_flag");
  header.insert(header.end(), {"avg_r", "rank"});
  write_csv_row(out, header);
  for (std::size_t c = 0; c < report.classifiers.size(); ++c) {
    std::vector<std::string> row{report.classifiers[c]};
    for (const auto& s : report.metrics) row.push_back(format_double(s.average_rank[c]));
    for (const auto& s : report.metrics) {
      std::string flag;
      if (s.average_rank[c] == s.average_rank[s.best]) flag = "best";
      else if (s.nemenyi && s.nemenyi->worse_than_best[c]) flag = "worse";
      row.push_back(flag);
    }
    row.push_back(format_double(report.avg_r[c]));
    row.push_back(std::to_string(report.overall_rank[c]));
    write_csv_row(out, row);
  }
  for (const char* what : {"friedman_statistic", "friedman_p_value"}) {
    std::vector<std::string> row{what};
    for (const auto& s : report.metrics) {
      if (!s.friedman) row.emplace_back("NA");
      else row.push_back(format_double(std::string(what) == "friedman_statistic" ? s.friedman->statistic : s.friedman->p_value));
    }
    row.resize(header.size());
    write_csv_row(out, row);
  }
}

void write_sampler_comparison_csv(std::ostream& out, const SamplerComparison& comparison) {
  std::vector<std::string> header{"classifier"};
  header.insert(header.end(), comparison.scenarios.begin(), comparison.scenarios.end());
  write_csv_row(out, header);
  for (std::size_t c = 0; c < comparison.classifiers.size(); ++c) {
    std::vector<std::string> row{comparison.classifiers[c]};
    for (std::size_t s = 0; s < comparison.scenarios.size(); ++s) {
      row.push_back(format_double(comparison.average_rank(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s))));
    }
    write_csv_row(out, row);
  }
  std::vector<std::string> mean{"mean_rank"}, rank{"rank"};
  for (std::size_t s = 0; s < comparison.scenarios.size(); ++s) {
    mean.push_back(format_double(comparison.mean_rank[s]));
    rank.push_back(format_double(comparison.overall_rank[s]));
  }
  write_csv_row(out, mean);
  write_csv_row(out, rank);
}

std::string render_sampler_comparison_markdown(const SamplerComparison& comparison) {
  std::ostringstream out;
  out << "# Sampler comparison\n\n| Classifier |";
  for (const auto& s : comparison.scenarios) out << ' ' << s << " |";
  out << "\n|---|";
  for (std::size_t s = 0; s < comparison.scenarios.size(); ++s) out << "---:|";
  out << '\n';
  for (std::size_t c = 0; c < comparison.classifiers.size(); ++c) {
    out << "| " << comparison.classifiers[c] << " |";
    for (std::size_t s = 0; s < comparison.scenarios.size(); ++s) {
      out << ' ' << format_fixed(comparison.average_rank(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)), 2) << " |";
    }
    out << '\n';
  }
  out << "| Mean |";
  for (double m : comparison.mean_rank) out << ' ' << format_fixed(m, 2) << " |";
  out << "\n| Rank |";
  for (double r : comparison.overall_rank) out << ' ' << format_fixed(r, 2) << " |";
  out << '\n';
  if (comparison.skipped_blocks > 0) {
    out << "\n- " << comparison.skipped_blocks << " (classifier, dataset, metric) blocks with a missing value were skipped\n";
  }
  for (const auto& c : comparison.dropped_classifiers) out << "- " << c << " has no complete block and is left out of the means\n";
  return out.str();
}

std::vector<std::filesystem::path> write_report_files(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& r : bundle.reports) {
    const auto md = dir / ("report_" + r.scenario + ".md");
    open_output(md) << render_markdown(r);
    written.push_back(md);
    const auto csv = dir / ("report_" + r.scenario + ".csv");
    auto out = open_output(csv);
    write_report_csv(out, r);
    written.push_back(csv);
  }
  const auto cmp = dir / "sampler_comparison.csv";
  auto out = open_output(cmp);
  if (bundle.samplers) {
    write_sampler_comparison_csv(out, *bundle.samplers);
    const auto md = dir / "sampler_comparison.md";
    open_output(md) << render_sampler_comparison_markdown(*bundle.samplers);
    written.push_back(md);
  } else {
    write_csv_row(out, {"note"});
    write_csv_row(out, {"sampler comparison needs at least two scenarios"});
  }
  written.push_back(cmp);
  return written;
}

}  // namespace creditbench
