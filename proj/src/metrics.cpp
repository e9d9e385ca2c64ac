#include "depsum/metrics.hpp"

#include "depsum/error.hpp"

namespace depsum::model {

ConfusionMatrix ConfusionMatrix::from_predictions(std::span<const int> truth,
                                                  std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::DimMismatch, "truth and prediction lengths differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == 1;
    const bool guess = predicted[i] == 1;
    if (actual && guess) ++cm.tp;
    else if (!actual && guess) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

EvalReport report_from_confusion(const ConfusionMatrix& cm) {
  EvalReport r;
  r.confusion = cm;
  r.precision = (cm.tp + cm.fp) ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp) : 0.0;
  r.recall = (cm.tp + cm.fn) ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) : 0.0;
  r.f1 = (r.precision > 0.0 && r.recall > 0.0)
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted) {
  return report_from_confusion(ConfusionMatrix::from_predictions(truth, predicted));
}

}  // namespace depsum::model
