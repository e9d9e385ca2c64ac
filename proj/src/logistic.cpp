#include "depsum/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "depsum/error.hpp"

namespace depsum::model {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double logit_of(const LogisticModel& m, std::span<const double> x) {
  double z = m.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += m.weights[i] * x[i];
  return z;
}

double objective(const LogisticModel& m, const Dataset& d, double l2, std::vector<double>& z) {
  double loss = 0.0;
  for (std::size_t b = 0; b < d.size(); ++b) {
    z[b] = logit_of(m, d.features.row(b));
    // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
    loss += softplus(z[b]) - (d.labels[b] == 1 ? z[b] : 0.0);
  }
  loss /= static_cast<double>(d.size());
  double w2 = 0.0;
  for (double w : m.weights) w2 += w * w;
  return loss + 0.5 * l2 * w2;
}

}  // namespace

double LogisticModel::probability(std::span<const double> x) const {
  if (x.size() != weights.size())
    throw Error(ErrorCode::DimMismatch, "logistic input has the wrong width");
  return sigmoid(logit_of(*this, x));
}

LogisticModel fit_logistic(const Dataset& train_set, const LogisticConfig& config) {
  if (train_set.size() == 0 || train_set.features.rows != train_set.size())
    throw Error(ErrorCode::DegenerateSplit, "logistic train split is empty");
  if (!train_set.has_both_classes())
    throw Error(ErrorCode::DegenerateSplit, "logistic train split must contain both classes");
  if (!(config.l2 >= 0.0)) throw Error(ErrorCode::ArgumentError, "l2 must be >= 0");

  const std::size_t n = train_set.size(), dim = train_set.features.cols;
  LogisticModel m;
  m.weights.assign(dim, 0.0);

  // 1/L for the smoothness constant of the objective above.
  double max_sq = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    double s = 0.0;
    for (double v : train_set.features.row(b)) s += v * v;
    max_sq = std::max(max_sq, s);
  }
  const double step = 1.0 / (0.25 * (max_sq + 1.0) + config.l2);

  std::vector<double> z(n), grad(dim);
  double loss = objective(m, train_set, config.l2, z);
  int it = 0;
  while (it < config.max_iterations) {
    ++it;
    std::fill(grad.begin(), grad.end(), 0.0);
    double gbias = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double r = sigmoid(z[b]) - (train_set.labels[b] == 1 ? 1.0 : 0.0);
      gbias += r;
      const auto x = train_set.features.row(b);
      for (std::size_t i = 0; i < dim; ++i) grad[i] += r * x[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < dim; ++i)
      m.weights[i] -= step * (grad[i] * inv_n + config.l2 * m.weights[i]);
    m.bias -= step * gbias * inv_n;
    const double next = objective(m, train_set, config.l2, z);
    const bool done = std::abs(loss - next) < config.tolerance;
    loss = next;
    if (done) break;
  }
  m.iterations = it;
  m.loss = loss;
  return m;
}

EvalReport evaluate(const LogisticModel& model, const Dataset& data) {
  std::vector<int> pred(data.size());
  for (std::size_t b = 0; b < data.size(); ++b) pred[b] = model.predict(data.features.row(b));
  return evaluate_predictions(data.labels, pred);
}

EvalReport logistic_baseline(const Dataset& train_set, const Dataset& dev_set, double l2_strength) {
  if (dev_set.size() == 0) throw Error(ErrorCode::DegenerateSplit, "logistic dev split is empty");
  LogisticConfig cfg;
  cfg.l2 = l2_strength;
  return evaluate(fit_logistic(train_set, cfg), dev_set);
}

}  // namespace depsum::model
