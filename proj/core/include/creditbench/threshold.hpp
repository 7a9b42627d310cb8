#pragma once

#include <span>

#include "creditbench/matrix.hpp"

namespace creditbench {

struct Threshold {
  double tau = 0.5;
};

// Picks tau among the observed scores so that the share of scores >= tau is
// closest to `train_good_rate`; ties go to the smaller score.
Threshold calibrate_threshold(std::span<const double> scores, double train_good_rate);

// 0 (good) iff score >= tau, else 1 (default).
Labels predict_labels(std::span<const double> scores, Threshold threshold);

}  // namespace creditbench
