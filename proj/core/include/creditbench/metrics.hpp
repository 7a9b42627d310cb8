#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "creditbench/matrix.hpp"
#include "creditbench/threshold.hpp"

namespace creditbench {

// Positive class = non-default (good).
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

double accuracy(const ConfusionMatrix& cm);
// Defined as 0 when the chance agreement is 1.
double cohen_kappa(const ConfusionMatrix& cm);
double brier(std::span<const double> scores, std::span<const int> labels);
double auc(std::span<const double> scores, std::span<const int> labels);
double ks_statistic(std::span<const double> scores, std::span<const int> labels);
double h_measure(std::span<const double> scores, std::span<const int> labels, double beta_a = 2.0,
                 double beta_b = 2.0);

enum class Metric { pcc, kappa, brier, auc, h_measure, ks };
inline constexpr std::array<Metric, 6> kAllMetrics{Metric::pcc, Metric::kappa, Metric::brier,
                                                   Metric::auc, Metric::h_measure, Metric::ks};

std::string_view to_string(Metric m);
Metric metric_from_string(std::string_view text);
std::string_view display_name(Metric m);
bool higher_is_better(Metric m);

struct MetricSet {
  double pcc = 0.0;
  double kappa = 0.0;
  double brier = 0.0;
  double auc = 0.0;
  double h_measure = 0.0;
  double ks = 0.0;

  double get(Metric m) const;
  void set(Metric m, double value);
  bool operator==(const MetricSet&) const = default;
};

struct CellEvaluation {
  MetricSet metrics;
  Threshold threshold;
  ConfusionMatrix confusion;
};

// Calibrates one threshold for pcc and kappa; the other four metrics use the
// scores directly.
CellEvaluation evaluate_cell(std::span<const double> scores, std::span<const int> labels, double train_good_rate);

// CSV with columns id, score, label. Labels may be 0/1 (1 = default) or the
// words good/bad.
struct PredictionFile {
  std::vector<std::string> ids;
  std::vector<double> scores;
  Labels labels;

  double good_rate() const;
};

PredictionFile read_predictions(std::istream& in);

}  // namespace creditbench
