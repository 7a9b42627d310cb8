#include "creditbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"

namespace creditbench {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  if (scores.empty()) throw DataError("metric input is empty");
}

struct ClassCounts {
  std::size_t good = 0;
  std::size_t bad = 0;
};

ClassCounts require_both_classes(std::span<const int> labels) {
  ClassCounts c;
  for (int y : labels) (is_good(y) ? c.good : c.bad)++;
  if (c.good == 0 || c.bad == 0) throw DataError("metric needs both classes in the labels");
  return c;
}

// Cumulative (FPR, TPR) after each distinct score, walking from the highest
// score down. Starts at (0, 0) and ends at (1, 1).
struct RocPoint {
  double fpr;
  double tpr;
};

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts counts = require_both_classes(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (is_good(labels[order[j]]) ? tp : fp)++;
      ++j;
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(counts.bad),
                   static_cast<double>(tp) / static_cast<double>(counts.good)});
    i = j;
  }
  return pts;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DataError("truth and predictions differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = is_good(truth[i]);
    const bool p = is_good(predicted[i]);
    if (t && p) ++cm.tp;
    else if (t) ++cm.fn;
    else if (p) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double cohen_kappa(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("kappa of an empty confusion matrix");
  const double n = static_cast<double>(cm.total());
  const double pa = static_cast<double>(cm.tp + cm.tn) / n;
  const double pe = (static_cast<double>(cm.tp + cm.fn) * static_cast<double>(cm.tp + cm.fp) +
                     static_cast<double>(cm.fp + cm.tn) * static_cast<double>(cm.fn + cm.tn)) /
                    (n * n);
  if (pe >= 1.0) return 0.0;
  return (pa - pe) / (1.0 - pe);
}

double brier(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double e = scores[i] - (is_good(labels[i]) ? 1.0 : 0.0);
    s += e * e;
  }
  return s / static_cast<double>(scores.size());
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const ClassCounts counts = require_both_classes(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Ranks doubled so tied averages stay integral.
  long double rank_sum2 = 0.0L;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t good_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (is_good(labels[order[j]])) ++good_in_group;
      ++j;
    }
    const long double avg2 = static_cast<long double>(i + 1 + j);
    rank_sum2 += avg2 * static_cast<long double>(good_in_group);
    i = j;
  }
  const long double g = static_cast<long double>(counts.good);
  const long double u = rank_sum2 / 2.0L - g * (g + 1.0L) / 2.0L;
  return static_cast<double>(u / (g * static_cast<long double>(counts.bad)));
}

double ks_statistic(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  double best = 0.0;
  for (const auto& p : roc_points(scores, labels)) best = std::max(best, std::abs(p.tpr - p.fpr));
  return best;
}

double h_measure(std::span<const double> scores, std::span<const int> labels, double beta_a, double beta_b) {
  check_inputs(scores, labels);
  if (!(beta_a > 0.0 && beta_b > 0.0)) throw DataError("H-measure beta parameters must be positive");
  const ClassCounts counts = require_both_classes(labels);
  const double n = static_cast<double>(labels.size());
  const double pi0 = static_cast<double>(counts.bad) / n;
  const double pi1 = static_cast<double>(counts.good) / n;
  const auto pts = roc_points(scores, labels);

  // Loss at cost c for ROC point i: c*pi0*fpr + (1-c)*pi1*(1-tpr) = b + m*c.
  std::vector<double> b(pts.size()), m(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    b[i] = pi1 * (1.0 - pts[i].tpr);
    m[i] = pi0 * pts[i].fpr - b[i];
  }

  const double mean_c = beta_a / (beta_a + beta_b);
  auto cdf = [](double a, double bb, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(a, bb, x);
  };
  // Integral of (b + m c) Beta(c; a, b) over [c0, c1].
  auto segment = [&](double bi, double mi, double c0, double c1) {
    return bi * (cdf(beta_a, beta_b, c1) - cdf(beta_a, beta_b, c0)) +
           mi * mean_c * (cdf(beta_a + 1.0, beta_b, c1) - cdf(beta_a + 1.0, beta_b, c0));
  };

  // Lower envelope of the lines over [0, 1].
  std::size_t cur = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (b[i] < b[cur] || (b[i] == b[cur] && m[i] < m[cur])) cur = i;
  }
  double c_cur = 0.0;
  double loss = 0.0;
  while (true) {
    std::size_t next = pts.size();
    double c_next = 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!(m[i] < m[cur])) continue;
      const double cx = std::max(c_cur, (b[i] - b[cur]) / (m[cur] - m[i]));
      if (cx < c_next || (cx == c_next && next < pts.size() && m[i] < m[next])) {
        c_next = cx;
        next = i;
      }
    }
    if (next == pts.size() || c_next >= 1.0) {
      loss += segment(b[cur], m[cur], c_cur, 1.0);
      break;
    }
    loss += segment(b[cur], m[cur], c_cur, c_next);
    cur = next;
    c_cur = c_next;
  }

  // Reference loss: min(c*pi0, (1-c)*pi1), switching at c = pi1.
  const double l_max = segment(0.0, pi0, 0.0, pi1) + segment(pi1, -pi1, pi1, 1.0);
  return 1.0 - loss / l_max;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::pcc: return "pcc";
    case Metric::kappa: return "kappa";
    case Metric::brier: return "brier";
    case Metric::auc: return "auc";
    case Metric::h_measure: return "h_measure";
    case Metric::ks: return "ks";
  }
  return "?";
}

std::string_view display_name(Metric m) {
  switch (m) {
    case Metric::pcc: return "PCC";
    case Metric::kappa: return "Kappa";
    case Metric::brier: return "BS";
    case Metric::auc: return "AUC";
    case Metric::h_measure: return "H";
    case Metric::ks: return "KS";
  }
  return "?";
}

Metric metric_from_string(std::string_view text) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown metric '" + std::string(text) + "'");
}

bool higher_is_better(Metric m) { return m != Metric::brier; }

double MetricSet::get(Metric m) const {
  switch (m) {
    case Metric::pcc: return pcc;
    case Metric::kappa: return kappa;
    case Metric::brier: return brier;
    case Metric::auc: return auc;
    case Metric::h_measure: return h_measure;
    case Metric::ks: return ks;
  }
  return 0.0;
}

void MetricSet::set(Metric m, double value) {
  switch (m) {
    case Metric::pcc: pcc = value; break;
    case Metric::kappa: kappa = value; break;
    case Metric::brier: brier = value; break;
    case Metric::auc: auc = value; break;
    case Metric::h_measure: h_measure = value; break;
    case Metric::ks: ks = value; break;
  }
}

CellEvaluation evaluate_cell(std::span<const double> scores, std::span<const int> labels, double train_good_rate) {
  check_inputs(scores, labels);
  CellEvaluation out;
  out.threshold = calibrate_threshold(scores, train_good_rate);
  const Labels predicted = predict_labels(scores, out.threshold);
  out.confusion = confusion(labels, predicted);
  out.metrics.pcc = accuracy(out.confusion);
  out.metrics.kappa = cohen_kappa(out.confusion);
  out.metrics.brier = brier(scores, labels);
  out.metrics.auc = auc(scores, labels);
  out.metrics.h_measure = h_measure(scores, labels);
  out.metrics.ks = ks_statistic(scores, labels);
  return out;
}

double PredictionFile::good_rate() const {
  if (labels.empty()) return 0.0;
  return static_cast<double>(count_label(labels, 0)) / static_cast<double>(labels.size());
}

PredictionFile read_predictions(std::istream& in) {
  const CsvTable table = read_csv(in);
  const long id = table.column("id");
  const long score = table.column("score");
  const long label = table.column("label");
  if (score < 0 || label < 0) throw DataError("prediction file needs 'score' and 'label' columns");
  PredictionFile out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "prediction row " + std::to_string(r + 2);
    double s = 0.0;
    if (!parse_double(row[static_cast<std::size_t>(score)], s) || !(s >= 0.0 && s <= 1.0)) {
      throw DataError(where + ": score '" + row[static_cast<std::size_t>(score)] + "' is not a number in [0, 1]");
    }
    const std::string& l = row[static_cast<std::size_t>(label)];
    int y = 0;
    if (l == "0" || l == "good") y = 0;
    else if (l == "1" || l == "bad") y = 1;
    else throw DataError(where + ": label '" + l + "' is not one of 0, 1, good, bad");
    out.ids.push_back(id >= 0 ? row[static_cast<std::size_t>(id)] : std::to_string(r + 1));
    out.scores.push_back(s);
    out.labels.push_back(y);
  }
  if (out.labels.empty()) throw DataError("prediction file has no rows");
  return out;
}

}  // namespace creditbench
