#include "depsum/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "depsum/error.hpp"
#include "format_util.hpp"

namespace depsum::model {

bool Dataset::has_both_classes() const {
  bool pos = false, neg = false;
  for (int l : labels) (l == 1 ? pos : neg) = true;
  return pos && neg;
}

AdamW::AdamW(const ModelParams& like, const TrainConfig& config) : config_(config) {
  for (const auto& t : like.tensors()) {
    m_.emplace_back(t.trainable ? t.values.size() : 0, 0.0);
    v_.emplace_back(t.trainable ? t.values.size() : 0, 0.0);
  }
}

void AdamW::step(ModelParams& params, const ModelParams& grads) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double decay = 1.0 - lr * config_.weight_decay;
  auto theta = params.tensors();
  const auto g = grads.tensors();
  if (theta.size() != m_.size() || g.size() != m_.size())
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match the model");
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!theta[k].trainable) continue;
    auto& m = m_[k];
    auto& v = v_[k];
    auto p = theta[k].values;
    const auto d = g[k].values;
#pragma omp parallel for simd schedule(static)
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * d[i];
      v[i] = b2 * v[i] + (1.0 - b2) * d[i] * d[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] = p[i] * decay - lr * mhat / (std::sqrt(vhat) + config_.adam_eps);
    }
  }
}

namespace {

void check_split(const Dataset& d, const char* name, std::size_t dim) {
  if (d.size() == 0) throw Error(ErrorCode::DegenerateSplit, std::string(name) + " split is empty");
  if (d.features.rows != d.size())
    throw Error(ErrorCode::DegenerateSplit, std::string(name) + " split has mismatched rows/labels");
  if (d.features.cols != dim)
    throw Error(ErrorCode::DegenerateSplit,
                std::string(name) + " features have width " + std::to_string(d.features.cols) +
                    ", model expects " + std::to_string(dim));
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), src.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto in = src.row(rows[r]);
    std::copy(in.begin(), in.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

TrainResult train(const Dataset& train_set, const Dataset& dev_set, const FeatureExtractorConfig& net,
                  const TrainConfig& config) {
  Rng init_rng(derive_seed(config.seed, "model-init"));
  return train(ModelParams::init(net, init_rng), train_set, dev_set, config);
}

TrainResult train(ModelParams initial, const Dataset& train_set, const Dataset& dev_set,
                  const TrainConfig& config) {
  config.validate();
  initial.config.validate();
  check_split(train_set, "train", initial.config.input_dim);
  check_split(dev_set, "dev", initial.config.input_dim);
  if (!train_set.has_both_classes())
    throw Error(ErrorCode::DegenerateSplit, "train split must contain both classes");

  Rng order_rng(derive_seed(config.seed, "batch-order"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  AdamW optimizer(initial, config);

  TrainResult result;
  result.params = initial;
  ModelParams& params = initial;
  double best_f1 = -1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix x = gather_rows(train_set.features, idx);
      std::vector<int> y(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) y[i] = train_set.labels[idx[i]];
      const DropoutMasks masks = draw_dropout_masks(params.config, idx.size(), dropout_rng);
      auto lg = loss_and_gradients(params, x, y, config, &masks);
      loss_sum += lg.loss * static_cast<double>(idx.size());
      update_running_stats(params, lg.cache, config.bn_momentum);
      optimizer.step(params, lg.gradients);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.dev_f1 = evaluate(params, dev_set).f1;
    result.history.push_back(rec);
    if (rec.dev_f1 >= best_f1) {
      best_f1 = rec.dev_f1;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  if (config.epochs == 0) result.params = params;
  return result;
}

std::vector<int> predict(const ModelParams& params, const Matrix& features) {
  if (features.rows == 0) return {};
  const Matrix logits = forward_batch(params, features, Mode::Eval);
  std::vector<int> out(features.rows);
  for (std::size_t b = 0; b < features.rows; ++b) out[b] = logits(b, 1) > logits(b, 0) ? 1 : 0;
  return out;
}

EvalReport evaluate(const ModelParams& params, const Dataset& data) {
  return evaluate_predictions(data.labels, predict(params, data.features));
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,train_loss,dev_f1\n";
  for (const auto& r : history)
    out << r.epoch << ',' << detail::fmt_g(r.train_loss, 10) << ',' << detail::fmt_f(r.dev_f1, 6)
        << '\n';
}

}  // namespace depsum::model
