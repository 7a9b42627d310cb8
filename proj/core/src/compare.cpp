#include "creditbench/compare.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "creditbench/errors.hpp"

namespace creditbench {

namespace {

constexpr std::array<double, 29> kQ05{
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799, 3.569040,
    3.592946, 3.615646, 3.637252, 3.657861, 3.677556, 3.696413, 3.714498, 3.731869, 3.748578};

}  // namespace

std::vector<double> rank_within_dataset(std::span<const double> values, Orientation orientation) {
  const std::size_t k = values.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    return orientation == Orientation::higher_better ? values[a] > values[b] : values[a] < values[b];
  };
  std::stable_sort(order.begin(), order.end(), better);
  std::vector<double> ranks(k);
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j < k && values[order[j]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

Eigen::MatrixXd rank_columns(const Eigen::MatrixXd& values, Orientation orientation) {
  Eigen::MatrixXd ranks(values.rows(), values.cols());
  std::vector<double> col(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) col[static_cast<std::size_t>(i)] = values(i, j);
    const auto r = rank_within_dataset(col, orientation);
    for (Eigen::Index i = 0; i < values.rows(); ++i) ranks(i, j) = r[static_cast<std::size_t>(i)];
  }
  return ranks;
}

FriedmanResult friedman_test(const Eigen::MatrixXd& ranks) {
  const auto k = static_cast<std::size_t>(ranks.rows());
  const auto n = static_cast<std::size_t>(ranks.cols());
  if (k < 2 || n < 2) throw DataError("Friedman test needs at least 2 classifiers and 2 datasets");
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);

  double ties = 0.0;
  for (Eigen::Index j = 0; j < ranks.cols(); ++j) {
    std::vector<double> col(ranks.col(j).data(), ranks.col(j).data() + ranks.rows());
    std::sort(col.begin(), col.end());
    for (std::size_t i = 0; i < col.size();) {
      std::size_t t = i;
      while (t < col.size() && col[t] == col[i]) ++t;
      const double size = static_cast<double>(t - i);
      ties += size * size * size - size;
      i = t;
    }
  }
  double ss = 0.0;
  for (Eigen::Index i = 0; i < ranks.rows(); ++i) {
    const double d = ranks.row(i).sum() - nd * (kd + 1.0) / 2.0;
    ss += d * d;
  }
  FriedmanResult out;
  out.classifiers = k;
  out.datasets = n;
  const double denom = nd * kd * (kd + 1.0) - ties / (kd - 1.0);
  if (denom <= 0.0 || ss == 0.0) return out;
  out.statistic = 12.0 * ss / denom;
  boost::math::chi_squared dist(kd - 1.0);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

double nemenyi_q05(std::size_t k) {
  if (k < 2 || k > kQ05.size() + 1) {
    throw DataError("Nemenyi critical values are tabulated for 2..30 classifiers, got " + std::to_string(k));
  }
  return kQ05[k - 2];
}

double critical_difference(std::size_t k, std::size_t n_datasets) {
  if (n_datasets == 0) throw DataError("critical difference needs at least one dataset");
  const double kd = static_cast<double>(k);
  return nemenyi_q05(k) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n_datasets)));
}

NemenyiResult nemenyi_test(std::span<const double> average_ranks, std::size_t n_datasets) {
  NemenyiResult out;
  out.critical_difference = critical_difference(average_ranks.size(), n_datasets);
  out.best = static_cast<std::size_t>(std::min_element(average_ranks.begin(), average_ranks.end()) - average_ranks.begin());
  out.worse_than_best.resize(average_ranks.size());
  for (std::size_t i = 0; i < average_ranks.size(); ++i) {
    out.worse_than_best[i] = average_ranks[i] - average_ranks[out.best] > out.critical_difference;
  }
  return out;
}

double ScenarioTable::value(Metric m, std::size_t classifier, std::size_t dataset) const {
  const auto it = values.find(m);
  if (it == values.end()) throw DataError("scenario " + scenario + " has no values for " + std::string(to_string(m)));
  return it->second(static_cast<Eigen::Index>(classifier), static_cast<Eigen::Index>(dataset));
}

ComparisonReport aggregate_report(const ScenarioTable& table, MissingPolicy policy, double alpha) {
  ComparisonReport report;
  report.scenario = table.scenario;
  report.classifiers = table.classifiers;
  report.datasets = table.datasets;
  const std::size_t k = table.classifiers.size();
  const std::size_t n = table.datasets.size();
  if (k == 0 || n == 0) throw DataError("scenario " + table.scenario + " has no classifiers or datasets");
  if (table.metrics.empty()) throw DataError("scenario " + table.scenario + " has no metrics");

  for (Metric m : table.metrics) {
    const auto it = table.values.find(m);
    if (it == table.values.end()) throw DataError("scenario " + table.scenario + " lacks metric " + std::string(to_string(m)));
    Eigen::MatrixXd v = it->second;
    if (static_cast<std::size_t>(v.rows()) != k || static_cast<std::size_t>(v.cols()) != n) {
      throw DataError("metric table shape mismatch for " + std::string(to_string(m)));
    }
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        if (std::isfinite(v(i, j))) continue;
        if (policy == MissingPolicy::reject) {
          throw DataError("missing value: scenario " + table.scenario + ", metric " + std::string(to_string(m)) +
                          ", classifier " + table.classifiers[static_cast<std::size_t>(i)] + ", dataset " +
                          table.datasets[static_cast<std::size_t>(j)]);
        }
        v(i, j) = higher_is_better(m) ? -std::numeric_limits<double>::max() : std::numeric_limits<double>::max();
        report.notes.push_back("missing " + std::string(to_string(m)) + " for " +
                               table.classifiers[static_cast<std::size_t>(i)] + " on " +
                               table.datasets[static_cast<std::size_t>(j)] + " ranked worst");
      }
    }
    MetricSummary s;
    s.metric = m;
    s.ranks = rank_columns(v, orientation_of(m));
    for (std::size_t i = 0; i < k; ++i) s.average_rank.push_back(s.ranks.row(static_cast<Eigen::Index>(i)).mean());
    s.best = static_cast<std::size_t>(std::min_element(s.average_rank.begin(), s.average_rank.end()) - s.average_rank.begin());
    if (k >= 2 && n >= 2) {
      s.friedman = friedman_test(s.ranks);
      if (s.friedman->rejected(alpha) && k <= 30) s.nemenyi = nemenyi_test(s.average_rank, n);
    }
    report.metrics.push_back(std::move(s));
  }
  if (k < 2 || n < 2) report.notes.push_back("Friedman test skipped: needs at least 2 classifiers and 2 datasets");

  report.avg_r.assign(k, 0.0);
  for (const auto& s : report.metrics) {
    for (std::size_t i = 0; i < k; ++i) report.avg_r[i] += s.average_rank[i];
  }
  for (double& a : report.avg_r) a /= static_cast<double>(report.metrics.size());

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (report.avg_r[a] != report.avg_r[b]) return report.avg_r[a] < report.avg_r[b];
    return table.classifiers[a] < table.classifiers[b];
  });
  report.overall_rank.resize(k);
  for (std::size_t pos = 0; pos < k; ++pos) report.overall_rank[order[pos]] = pos + 1;
  return report;
}

SamplerComparison compare_samplers(std::span<const ScenarioTable> tables) {
  if (tables.size() < 2) throw DataError("sampler comparison needs at least two scenarios");
  SamplerComparison out;
  const auto& first = tables.front();
  out.classifiers = first.classifiers;
  for (const auto& t : tables) {
    out.scenarios.push_back(t.scenario);
    if (t.classifiers != first.classifiers || t.datasets != first.datasets || t.metrics != first.metrics) {
      throw DataError("scenario " + t.scenario + " does not share the classifiers, datasets and metrics of " +
                      first.scenario);
    }
  }
  const std::size_t s_count = tables.size();
  const std::size_t k = first.classifiers.size();
  out.average_rank = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s_count));
  std::vector<double> block(s_count);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t used = 0;
    for (Metric m : first.metrics) {
      for (std::size_t d = 0; d < first.datasets.size(); ++d) {
        bool complete = true;
        for (std::size_t s = 0; s < s_count; ++s) {
          block[s] = tables[s].value(m, c, d);
          complete = complete && std::isfinite(block[s]);
        }
        if (!complete) {
          ++out.skipped_blocks;
          continue;
        }
        const auto r = rank_within_dataset(block, orientation_of(m));
        for (std::size_t s = 0; s < s_count; ++s) out.average_rank(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) += r[s];
        ++used;
      }
    }
    if (used == 0) {
      out.average_rank.row(static_cast<Eigen::Index>(c)).setConstant(std::numeric_limits<double>::quiet_NaN());
      out.dropped_classifiers.push_back(first.classifiers[c]);
      continue;
    }
    out.average_rank.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(used);
  }
  if (out.dropped_classifiers.size() == k) throw DataError("no classifier has a complete block across scenarios");
  for (std::size_t s = 0; s < s_count; ++s) {
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double v = out.average_rank(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s));
      if (std::isfinite(v)) sum += v;
    }
    out.mean_rank.push_back(sum / static_cast<double>(k - out.dropped_classifiers.size()));
  }
  out.overall_rank = rank_within_dataset(out.mean_rank, Orientation::lower_better);
  return out;
}

}  // namespace creditbench
