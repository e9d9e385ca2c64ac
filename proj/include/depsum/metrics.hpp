#pragma once

#include <cstddef>
#include <span>

namespace depsum::model {

// Positive class = Depressed (label 1).
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  static ConfusionMatrix from_predictions(std::span<const int> truth, std::span<const int> predicted);
  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix confusion;
};

// Undefined precision or recall is reported as 0, and F1 is 0 when either is 0.
EvalReport report_from_confusion(const ConfusionMatrix& cm);
EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted);

}  // namespace depsum::model
