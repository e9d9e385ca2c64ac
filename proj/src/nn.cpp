#include "depsum/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "depsum/error.hpp"
#include "depsum/kernels.hpp"

namespace depsum::model {

using nlohmann::json;

namespace {

constexpr double kNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  return cdf + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

enum class Pool { Max, Average };

kernels::ConvShape conv_shape(const ConvSpec& spec, std::size_t in_channels, std::size_t length) {
  return {in_channels, spec.channels, spec.kernel, length};
}

// --- dense block: dense -> layer norm -> GELU -> dropout -------------------

void dense_block_forward(const DenseBlockParams& p, const Matrix& x, const Matrix* mask,
                         DenseBlockCache& c) {
  Matrix pre;
  kernels::dense_forward(x, p.dense.weight, p.dense.bias, pre);
  const std::size_t rows = pre.rows, width = pre.cols;
  c.input = x;
  c.normed = Matrix(rows, width);
  c.gelu_input = Matrix(rows, width);
  c.output = Matrix(rows, width);
  c.inv_std.assign(rows, 0.0);
  c.mask = mask ? *mask : Matrix();
  for (std::size_t b = 0; b < rows; ++b) {
    const auto r = pre.row(b);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(width);
    const double inv = 1.0 / std::sqrt(var + kNormEps);
    c.inv_std[b] = inv;
    for (std::size_t j = 0; j < width; ++j) {
      const double xhat = (r[j] - mean) * inv;
      const double y = xhat * p.norm.gain[j] + p.norm.bias[j];
      c.normed(b, j) = xhat;
      c.gelu_input(b, j) = y;
      c.output(b, j) = gelu(y) * (mask ? (*mask)(b, j) : 1.0);
    }
  }
}

Matrix dense_block_backward(const DenseBlockParams& p, const DenseBlockCache& c, const Matrix& dout,
                            DenseBlockParams& g, bool need_input_grad) {
  const std::size_t rows = dout.rows, width = dout.cols;
  const bool masked = !c.mask.empty();
  Matrix dpre(rows, width);
  std::vector<double> dxhat(width);
  for (std::size_t b = 0; b < rows; ++b) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      double d = dout(b, j) * gelu_grad(c.gelu_input(b, j));
      if (masked) d *= c.mask(b, j);
      g.norm.gain[j] += d * c.normed(b, j);
      g.norm.bias[j] += d;
      dxhat[j] = d * p.norm.gain[j];
      s1 += dxhat[j];
      s2 += dxhat[j] * c.normed(b, j);
    }
    const double scale = c.inv_std[b] / static_cast<double>(width);
    for (std::size_t j = 0; j < width; ++j)
      dpre(b, j) = scale * (static_cast<double>(width) * dxhat[j] - s1 - c.normed(b, j) * s2);
  }
  kernels::dense_backward_params(c.input, dpre, g.dense.weight, g.dense.bias);
  Matrix dx;
  if (need_input_grad) kernels::dense_backward_input(dpre, p.dense.weight, dx);
  return dx;
}

// --- conv block: conv -> batch norm -> pool/2 ------------------------------

void conv_block_forward(const ConvBlockParams& p, const kernels::ConvShape& shape, const Matrix& x,
                        Mode mode, Pool pool, ConvBlockCache& c) {
  Matrix conv;
  kernels::conv1d_forward(x, shape, p.weight, p.bias, conv);
  const std::size_t rows = conv.rows, channels = shape.out_channels, len = shape.length;
  const std::size_t pooled = len / 2;
  c.input = x;
  c.batch_stats = mode == Mode::Train;
  c.normed = Matrix(rows, channels * len);
  c.bn_output = Matrix(rows, channels * len);
  c.output = Matrix(rows, channels * pooled);
  c.inv_std.assign(channels, 0.0);
  c.batch_mean.assign(channels, 0.0);
  c.batch_var.assign(channels, 0.0);
  c.argmax.clear();
  if (pool == Pool::Max) c.argmax.assign(rows * channels * pooled, 0);

  const double count = static_cast<double>(rows * len);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    double mean, var;
    if (c.batch_stats) {
      mean = 0.0;
      for (std::size_t b = 0; b < rows; ++b)
        for (std::size_t l = 0; l < len; ++l) mean += conv(b, ch * len + l);
      mean /= count;
      var = 0.0;
      for (std::size_t b = 0; b < rows; ++b)
        for (std::size_t l = 0; l < len; ++l) {
          const double d = conv(b, ch * len + l) - mean;
          var += d * d;
        }
      var /= count;
    } else {
      mean = p.running_mean[ch];
      var = p.running_var[ch];
    }
    const double inv = 1.0 / std::sqrt(var + kNormEps);
    c.batch_mean[ch] = mean;
    c.batch_var[ch] = var;
    c.inv_std[ch] = inv;
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t at = ch * len + l;
        const double xhat = (conv(b, at) - mean) * inv;
        c.normed(b, at) = xhat;
        c.bn_output(b, at) = xhat * p.norm.gain[ch] + p.norm.bias[ch];
      }
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t j = 0; j < pooled; ++j) {
        const std::size_t a = ch * len + 2 * j;
        const double va = c.bn_output(b, a), vb = c.bn_output(b, a + 1);
        const std::size_t out_at = ch * pooled + j;
        if (pool == Pool::Max) {
          const bool first = va >= vb;
          c.output(b, out_at) = first ? va : vb;
          c.argmax[b * channels * pooled + out_at] = first ? a : a + 1;
        } else {
          c.output(b, out_at) = 0.5 * (va + vb);
        }
      }
  }
}

Matrix conv_block_backward(const ConvBlockParams& p, const kernels::ConvShape& shape,
                           const ConvBlockCache& c, const Matrix& dout, Pool pool,
                           ConvBlockParams& g, bool need_input_grad) {
  const std::size_t rows = dout.rows, channels = shape.out_channels, len = shape.length;
  const std::size_t pooled = len / 2;
  Matrix dbn(rows, channels * len);
  for (std::size_t b = 0; b < rows; ++b)
    for (std::size_t ch = 0; ch < channels; ++ch)
      for (std::size_t j = 0; j < pooled; ++j) {
        const std::size_t out_at = ch * pooled + j;
        const double d = dout(b, out_at);
        if (pool == Pool::Max) {
          dbn(b, c.argmax[b * channels * pooled + out_at]) += d;
        } else {
          dbn(b, ch * len + 2 * j) += 0.5 * d;
          dbn(b, ch * len + 2 * j + 1) += 0.5 * d;
        }
      }

  Matrix dconv(rows, channels * len);
  const double count = static_cast<double>(rows * len);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t at = ch * len + l;
        const double d = dbn(b, at);
        g.norm.gain[ch] += d * c.normed(b, at);
        g.norm.bias[ch] += d;
        const double dxhat = d * p.norm.gain[ch];
        s1 += dxhat;
        s2 += dxhat * c.normed(b, at);
      }
    const double inv = c.inv_std[ch];
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t at = ch * len + l;
        const double dxhat = dbn(b, at) * p.norm.gain[ch];
        dconv(b, at) = c.batch_stats
                           ? inv / count * (count * dxhat - s1 - c.normed(b, at) * s2)
                           : dxhat * inv;
      }
  }
  kernels::conv1d_backward_params(c.input, dconv, shape, g.weight, g.bias);
  Matrix dx;
  if (need_input_grad) kernels::conv1d_backward_input(dconv, shape, p.weight, dx);
  return dx;
}

void uniform_fill(std::span<double> values, double bound, Rng& rng) {
  for (auto& v : values) v = rng.uniform(-bound, bound);
}

DenseBlockParams dense_block_zeros(std::size_t in, std::size_t out) {
  return {{Matrix(out, in), std::vector<double>(out, 0.0)},
          {std::vector<double>(out, 0.0), std::vector<double>(out, 0.0)}};
}

ConvBlockParams conv_block_zeros(const kernels::ConvShape& s) {
  ConvBlockParams p;
  p.weight.assign(s.weight_size(), 0.0);
  p.bias.assign(s.out_channels, 0.0);
  p.norm.gain.assign(s.out_channels, 0.0);
  p.norm.bias.assign(s.out_channels, 0.0);
  p.running_mean.assign(s.out_channels, 0.0);
  p.running_var.assign(s.out_channels, 1.0);
  return p;
}

void zero_running_stats(ModelParams& p) {
  for (auto* block : {&p.conv1, &p.conv2}) {
    std::fill(block->running_mean.begin(), block->running_mean.end(), 0.0);
    std::fill(block->running_var.begin(), block->running_var.end(), 0.0);
  }
}

}  // namespace

void FeatureExtractorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ArgumentError, msg); };
  if (input_dim < 1) fail("input_dim must be >= 1");
  if (fc_dims.empty()) fail("fc_dims must not be empty");
  for (auto d : fc_dims)
    if (d < 1) fail("fc_dims entries must be >= 1");
  for (auto d : head_dims)
    if (d < 1) fail("head_dims entries must be >= 1");
  for (const auto* c : {&conv1, &conv2}) {
    if (c->kernel < 1 || c->kernel % 2 == 0) fail("conv kernels must be odd and positive");
    if (c->channels < 1) fail("conv channels must be >= 1");
  }
  if (sequence_length() < 4) fail("last fc width must be >= 4 for two stride-2 pools");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail("dropout_p must lie in [0, 1)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ArgumentError, msg); };
  if (!(gamma >= 0.0)) fail("gamma must be >= 0");
  if (!(class_weights[0] > 0.0 && class_weights[1] > 0.0)) fail("class weights must be positive");
  if (!(learning_rate >= 0.0)) fail("learning rate must be >= 0");
  if (!(weight_decay >= 0.0)) fail("weight decay must be >= 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch_size < 1) fail("batch size must be >= 1");
}

ModelParams ModelParams::zeros(const FeatureExtractorConfig& config) {
  config.validate();
  ModelParams p;
  p.config = config;
  std::size_t in = config.input_dim;
  for (auto width : config.fc_dims) {
    p.expansion.push_back(dense_block_zeros(in, width));
    in = width;
  }
  const std::size_t len = config.sequence_length();
  p.conv1 = conv_block_zeros(conv_shape(config.conv1, 1, len));
  p.conv2 = conv_block_zeros(conv_shape(config.conv2, config.conv1.channels, config.pooled1()));
  in = config.flat_dim();
  for (auto width : config.head_dims) {
    p.head.push_back(dense_block_zeros(in, width));
    in = width;
  }
  p.output = {Matrix(2, in), std::vector<double>(2, 0.0)};
  return p;
}

ModelParams ModelParams::init(const FeatureExtractorConfig& config, Rng& rng) {
  ModelParams p = zeros(config);
  auto init_dense = [&](DenseParams& d) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d.weight.cols));
    uniform_fill(d.weight.data, bound, rng);
    uniform_fill(d.bias, bound, rng);
  };
  auto init_conv = [&](ConvBlockParams& c, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    uniform_fill(c.weight, bound, rng);
    uniform_fill(c.bias, bound, rng);
    std::fill(c.norm.gain.begin(), c.norm.gain.end(), 1.0);
  };
  for (auto& b : p.expansion) {
    init_dense(b.dense);
    std::fill(b.norm.gain.begin(), b.norm.gain.end(), 1.0);
  }
  init_conv(p.conv1, config.conv1.kernel);
  init_conv(p.conv2, config.conv1.channels * config.conv2.kernel);
  for (auto& b : p.head) {
    init_dense(b.dense);
    std::fill(b.norm.gain.begin(), b.norm.gain.end(), 1.0);
  }
  init_dense(p.output);
  return p;
}

std::vector<TensorRef> ModelParams::tensors() {
  std::vector<TensorRef> out;
  auto dense_block = [&](const std::string& prefix, DenseBlockParams& b) {
    out.push_back({prefix + ".dense.weight", {b.dense.weight.rows, b.dense.weight.cols},
                   b.dense.weight.data, true});
    out.push_back({prefix + ".dense.bias", {b.dense.bias.size()}, b.dense.bias, true});
    out.push_back({prefix + ".norm.gain", {b.norm.gain.size()}, b.norm.gain, true});
    out.push_back({prefix + ".norm.bias", {b.norm.bias.size()}, b.norm.bias, true});
  };
  auto conv_block = [&](const std::string& prefix, ConvBlockParams& c, std::size_t in_channels,
                        std::size_t kernel) {
    out.push_back({prefix + ".weight", {c.bias.size(), in_channels, kernel}, c.weight, true});
    out.push_back({prefix + ".bias", {c.bias.size()}, c.bias, true});
    out.push_back({prefix + ".norm.gain", {c.norm.gain.size()}, c.norm.gain, true});
    out.push_back({prefix + ".norm.bias", {c.norm.bias.size()}, c.norm.bias, true});
    out.push_back({prefix + ".running_mean", {c.running_mean.size()}, c.running_mean, false});
    out.push_back({prefix + ".running_var", {c.running_var.size()}, c.running_var, false});
  };
  for (std::size_t i = 0; i < expansion.size(); ++i)
    dense_block("expansion." + std::to_string(i), expansion[i]);
  conv_block("conv1", conv1, 1, config.conv1.kernel);
  conv_block("conv2", conv2, config.conv1.channels, config.conv2.kernel);
  for (std::size_t i = 0; i < head.size(); ++i) dense_block("head." + std::to_string(i), head[i]);
  out.push_back({"output.weight", {output.weight.rows, output.weight.cols}, output.weight.data, true});
  out.push_back({"output.bias", {output.bias.size()}, output.bias, true});
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors())
    if (t.trainable) n += t.values.size();
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors())
    for (double v : t.values)
      if (!std::isfinite(v)) return false;
  return true;
}

DropoutMasks draw_dropout_masks(const FeatureExtractorConfig& config, std::size_t batch, Rng& rng) {
  DropoutMasks masks;
  const double p = config.dropout_p;
  const double keep_scale = 1.0 / (1.0 - p);
  auto draw = [&](std::size_t width) {
    Matrix m(batch, width, keep_scale);
    if (p > 0.0)
      for (auto& v : m.data) v = rng.uniform() < p ? 0.0 : keep_scale;
    return m;
  };
  for (auto w : config.fc_dims) masks.expansion.push_back(draw(w));
  for (auto w : config.head_dims) masks.head.push_back(draw(w));
  return masks;
}

Matrix forward_batch(const ModelParams& params, const Matrix& x, Mode mode, const DropoutMasks* masks,
                     ForwardCache* cache) {
  const auto& cfg = params.config;
  if (x.cols != cfg.input_dim)
    throw Error(ErrorCode::DimMismatch, "input dim " + std::to_string(x.cols) + ", model expects " +
                                            std::to_string(cfg.input_dim));
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  const bool dropout = mode == Mode::Train && masks != nullptr;
  if (dropout) {
    bool ok = masks->expansion.size() == params.expansion.size() &&
              masks->head.size() == params.head.size();
    for (std::size_t i = 0; ok && i < masks->expansion.size(); ++i)
      ok = masks->expansion[i].rows == x.rows &&
           masks->expansion[i].cols == params.expansion[i].dense.bias.size();
    for (std::size_t i = 0; ok && i < masks->head.size(); ++i)
      ok = masks->head[i].rows == x.rows && masks->head[i].cols == params.head[i].dense.bias.size();
    if (!ok) throw Error(ErrorCode::ShapeMismatch, "dropout masks do not match the model");
  }

  c.expansion.resize(params.expansion.size());
  const Matrix* h = &x;
  for (std::size_t i = 0; i < params.expansion.size(); ++i) {
    dense_block_forward(params.expansion[i], *h, dropout ? &masks->expansion[i] : nullptr,
                        c.expansion[i]);
    h = &c.expansion[i].output;
  }
  conv_block_forward(params.conv1, conv_shape(cfg.conv1, 1, cfg.sequence_length()), *h, mode,
                     Pool::Max, c.conv1);
  conv_block_forward(params.conv2, conv_shape(cfg.conv2, cfg.conv1.channels, cfg.pooled1()),
                     c.conv1.output, mode, Pool::Average, c.conv2);
  h = &c.conv2.output;
  c.head.resize(params.head.size());
  for (std::size_t i = 0; i < params.head.size(); ++i) {
    dense_block_forward(params.head[i], *h, dropout ? &masks->head[i] : nullptr, c.head[i]);
    h = &c.head[i].output;
  }
  c.head_output = *h;
  kernels::dense_forward(c.head_output, params.output.weight, params.output.bias, c.logits);
  return c.logits;
}

std::array<double, 2> forward(const ModelParams& params, std::span<const double> x, Mode mode,
                              Rng* dropout_rng) {
  Matrix in(1, x.size());
  std::copy(x.begin(), x.end(), in.data.begin());
  DropoutMasks masks;
  const DropoutMasks* use = nullptr;
  if (mode == Mode::Train && dropout_rng) {
    masks = draw_dropout_masks(params.config, 1, *dropout_rng);
    use = &masks;
  }
  const Matrix logits = forward_batch(params, in, mode, use);
  return {logits(0, 0), logits(0, 1)};
}

ModelParams backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dlogits) {
  const auto& cfg = params.config;
  ModelParams grads = ModelParams::zeros(cfg);
  zero_running_stats(grads);

  kernels::dense_backward_params(cache.head_output, dlogits, grads.output.weight, grads.output.bias);
  Matrix d;
  kernels::dense_backward_input(dlogits, params.output.weight, d);
  for (std::size_t i = params.head.size(); i-- > 0;)
    d = dense_block_backward(params.head[i], cache.head[i], d, grads.head[i], true);
  d = conv_block_backward(params.conv2, conv_shape(cfg.conv2, cfg.conv1.channels, cfg.pooled1()),
                          cache.conv2, d, Pool::Average, grads.conv2, true);
  d = conv_block_backward(params.conv1, conv_shape(cfg.conv1, 1, cfg.sequence_length()),
                          cache.conv1, d, Pool::Max, grads.conv1, true);
  for (std::size_t i = params.expansion.size(); i-- > 0;)
    d = dense_block_backward(params.expansion[i], cache.expansion[i], d, grads.expansion[i], i > 0);
  return grads;
}

void update_running_stats(ModelParams& params, const ForwardCache& cache, double momentum) {
  auto fold = [momentum](ConvBlockParams& p, const ConvBlockCache& c) {
    if (!c.batch_stats) return;
    const double count = static_cast<double>(c.normed.rows * (c.normed.cols / p.bias.size()));
    const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
    for (std::size_t ch = 0; ch < p.bias.size(); ++ch) {
      p.running_mean[ch] = (1.0 - momentum) * p.running_mean[ch] + momentum * c.batch_mean[ch];
      p.running_var[ch] = (1.0 - momentum) * p.running_var[ch] + momentum * c.batch_var[ch] * unbias;
    }
  };
  fold(params.conv1, cache.conv1);
  fold(params.conv2, cache.conv2);
}

namespace {

struct Softmax2 {
  double p_target;  // probability of the labelled class
  double p_other;   // 1 - p_target, computed without cancellation
};

Softmax2 softmax_for(std::array<double, 2> logits, int label) {
  const double margin = logits[1 - label] - logits[label];
  // p_target = 1 / (1 + e^margin)
  if (margin > 0) {
    const double e = std::exp(-margin);
    return {e / (1.0 + e), 1.0 / (1.0 + e)};
  }
  const double e = std::exp(margin);
  return {1.0 / (1.0 + e), e / (1.0 + e)};
}

void check_label(int label) {
  if (label != 0 && label != 1) throw Error(ErrorCode::ArgumentError, "label must be 0 or 1");
}

}  // namespace

double focal_loss(std::array<double, 2> logits, int label, double gamma,
                  std::array<double, 2> class_weights) {
  check_label(label);
  const auto sm = softmax_for(logits, label);
  const double pt = std::max(sm.p_target, kProbabilityFloor);
  const double modulator = gamma == 0.0 ? 1.0 : std::pow(sm.p_other, gamma);
  return -class_weights[label] * modulator * std::log(pt);
}

std::array<double, 2> focal_loss_grad(std::array<double, 2> logits, int label, double gamma,
                                      std::array<double, 2> class_weights) {
  check_label(label);
  const auto sm = softmax_for(logits, label);
  const double pt = std::max(sm.p_target, kProbabilityFloor);
  const double q = sm.p_other;
  const double alpha = class_weights[label];
  // dL/dp_t, with d(1-p_t)^gamma/dp_t = -gamma (1-p_t)^(gamma-1)
  double dl_dpt = -alpha * (gamma == 0.0 ? 1.0 : std::pow(q, gamma)) / pt;
  if (gamma != 0.0 && q > 0.0) dl_dpt += alpha * gamma * std::pow(q, gamma - 1.0) * std::log(pt);
  // dp_t/dz_t = p_t (1 - p_t), dp_t/dz_other = -p_t (1 - p_t)
  const double dz = dl_dpt * sm.p_target * q;
  std::array<double, 2> g{};
  g[label] = dz;
  g[1 - label] = -dz;
  return g;
}

LossAndGradients loss_and_gradients(const ModelParams& params, const Matrix& x,
                                    std::span<const int> labels, const TrainConfig& config,
                                    const DropoutMasks* masks) {
  if (x.rows == 0 || labels.size() != x.rows)
    throw Error(ErrorCode::ArgumentError, "batch must be non-empty with one label per row");
  LossAndGradients out;
  const Matrix logits = forward_batch(params, x, Mode::Train, masks, &out.cache);
  const double inv_batch = 1.0 / static_cast<double>(x.rows);
  Matrix dlogits(x.rows, 2);
  for (std::size_t b = 0; b < x.rows; ++b) {
    const std::array<double, 2> z{logits(b, 0), logits(b, 1)};
    out.loss += focal_loss(z, labels[b], config.gamma, config.class_weights) * inv_batch;
    const auto g = focal_loss_grad(z, labels[b], config.gamma, config.class_weights);
    dlogits(b, 0) = g[0] * inv_batch;
    dlogits(b, 1) = g[1] * inv_batch;
  }
  out.gradients = backward(params, out.cache, dlogits);
  return out;
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'E', 'P', 'S', 'U', 'M', 'P', '1'};

json config_to_json(const FeatureExtractorConfig& c) {
  return {{"input_dim", c.input_dim},
          {"fc_dims", c.fc_dims},
          {"conv1", {{"kernel", c.conv1.kernel}, {"channels", c.conv1.channels}}},
          {"conv2", {{"kernel", c.conv2.kernel}, {"channels", c.conv2.channels}}},
          {"head_dims", c.head_dims},
          {"dropout_p", c.dropout_p}};
}

FeatureExtractorConfig config_from_json(const json& j) {
  FeatureExtractorConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.fc_dims = j.at("fc_dims").get<std::vector<std::size_t>>();
  c.conv1 = {j.at("conv1").at("kernel").get<std::size_t>(), j.at("conv1").at("channels").get<std::size_t>()};
  c.conv2 = {j.at("conv2").at("kernel").get<std::size_t>(), j.at("conv2").at("channels").get<std::size_t>()};
  c.head_dims = j.at("head_dims").get<std::vector<std::size_t>>();
  c.dropout_p = j.at("dropout_p").get<double>();
  return c;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::MalformedFile, "truncated params file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_params(const ModelParams& params, std::ostream& out) {
  json header;
  header["format"] = "depsum-params";
  header["version"] = 1;
  header["config"] = config_to_json(params.config);
  header["tensors"] = json::array();
  const auto tensors = params.tensors();
  for (const auto& t : tensors) header["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  const std::string text = header.dump();
  out.write(kMagic, sizeof kMagic);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors)
    for (double v : t.values) write_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error(ErrorCode::MalformedFile, "failed writing params");
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  save_params(params, out);
}

ModelParams load_params(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorCode::MalformedFile, "not a depsum params file");
  const std::uint64_t len = read_u64(in);
  if (len > (1u << 26)) throw Error(ErrorCode::MalformedFile, "header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw Error(ErrorCode::MalformedFile, "truncated params header");
  ModelParams params;
  try {
    const json header = json::parse(text);
    params = ModelParams::zeros(config_from_json(header.at("config")));
    const auto tensors = params.tensors();
    const auto& table = header.at("tensors");
    if (table.size() != tensors.size())
      throw Error(ErrorCode::ShapeMismatch, "tensor count differs from config");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto name = table[i].at("name").get<std::string>();
      const auto shape = table[i].at("shape").get<std::vector<std::size_t>>();
      if (name != tensors[i].name || shape != tensors[i].shape)
        throw Error(ErrorCode::ShapeMismatch, "tensor " + std::to_string(i) + " '" + name +
                                                  "' does not match config");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("params header: ") + e.what());
  }
  auto tensors = params.tensors();
  for (auto& t : tensors)
    for (auto& v : t.values) v = std::bit_cast<double>(read_u64(in));
  return params;
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  return load_params(in);
}

}  // namespace depsum::model
