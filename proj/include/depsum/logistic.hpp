#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "depsum/metrics.hpp"
#include "depsum/train.hpp"

namespace depsum::model {

struct LogisticConfig {
  double l2 = 1e-2;
  double tolerance = 1e-8;  // stop once |loss change| falls below this
  int max_iterations = 20000;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  int iterations = 0;
  double loss = 0.0;

  double probability(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return probability(x) >= 0.5 ? 1 : 0; }
};

// Full-batch gradient descent on mean log loss + (l2/2)|w|^2; the bias is
// not penalized. Throws DegenerateSplit.
LogisticModel fit_logistic(const Dataset& train_set, const LogisticConfig& config = {});
EvalReport evaluate(const LogisticModel& model, const Dataset& data);
EvalReport logistic_baseline(const Dataset& train_set, const Dataset& dev_set, double l2_strength);

}  // namespace depsum::model
