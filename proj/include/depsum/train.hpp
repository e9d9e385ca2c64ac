#pragma once

// Mini-batch training with AdamW, per-epoch dev evaluation and best-dev-F1
// checkpoint selection.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "depsum/matrix.hpp"
#include "depsum/metrics.hpp"
#include "depsum/nn.hpp"

namespace depsum::model {

// One row of features per session with its binary label.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<int> ids;

  std::size_t size() const { return labels.size(); }
  bool has_both_classes() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_f1 = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  ModelParams params;  // checkpoint with the best dev F1 (latest on ties)
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0 when no epoch ran
};

// Adam with decoupled weight decay: theta <- theta (1 - lr wd) - lr m^/(sqrt(v^) + eps).
// Running statistics are left alone.
class AdamW {
 public:
  AdamW(const ModelParams& like, const TrainConfig& config);
  void step(ModelParams& params, const ModelParams& grads);
  long steps() const { return t_; }

 private:
  TrainConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

// Throws DegenerateSplit for an empty split, a single-class train split or
// mismatched feature widths; ArgumentError on an invalid config.
TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  const FeatureExtractorConfig& net, const TrainConfig& config);
TrainResult train(ModelParams initial, const Dataset& train_set, const Dataset& dev_set,
                  const TrainConfig& config);

// Eval-mode argmax of the logits; ties go to NotDepressed.
std::vector<int> predict(const ModelParams& params, const Matrix& features);
EvalReport evaluate(const ModelParams& params, const Dataset& data);

// epoch,train_loss,dev_f1
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

}  // namespace depsum::model
