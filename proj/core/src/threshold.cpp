#include "creditbench/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "creditbench/errors.hpp"

namespace creditbench {

Threshold calibrate_threshold(std::span<const double> scores, double train_good_rate) {
  if (scores.empty()) throw ModelError("cannot calibrate a threshold on an empty score vector");
  if (!(train_good_rate > 0.0 && train_good_rate < 1.0)) throw ModelError("train good rate must lie in (0, 1)");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double n = static_cast<double>(sorted.size());
  double best_tau = sorted.front();
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    // j scores are >= sorted[i]
    const double gap = std::abs(static_cast<double>(j) / n - train_good_rate);
    if (gap <= best_gap) {  // later candidates are smaller scores
      best_gap = gap;
      best_tau = sorted[i];
    }
    i = j;
  }
  return {best_tau};
}

Labels predict_labels(std::span<const double> scores, Threshold threshold) {
  Labels out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold.tau ? 0 : 1;
  return out;
}

}  // namespace creditbench
