#pragma once

// The classifier: a fully connected expansion block, two 1D convolution
// blocks and a fully connected head producing two logits, plus focal loss and
// exact backpropagation through all of it.
//
//   x[input_dim]
//     -> per fc width: dense -> layer norm -> GELU -> dropout
//     -> as 1 channel x L
//     -> conv1 -> batch norm -> max-pool/2
//     -> conv2 -> batch norm -> avg-pool/2
//     -> flatten
//     -> per head width: dense -> layer norm -> GELU -> dropout
//     -> dense -> 2 logits (index 0 = NotDepressed, 1 = Depressed)

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "depsum/matrix.hpp"
#include "depsum/rng.hpp"

namespace depsum::model {

struct ConvSpec {
  std::size_t kernel = 3;
  std::size_t channels = 16;
  bool operator==(const ConvSpec&) const = default;
};

struct FeatureExtractorConfig {
  std::size_t input_dim = 768;
  std::vector<std::size_t> fc_dims{1536};
  ConvSpec conv1{3, 16};
  ConvSpec conv2{5, 8};
  std::vector<std::size_t> head_dims{128};
  double dropout_p = 0.3;

  void validate() const;  // ArgumentError on an unusable shape
  std::size_t sequence_length() const { return fc_dims.back(); }
  std::size_t pooled1() const { return sequence_length() / 2; }
  std::size_t pooled2() const { return pooled1() / 2; }
  std::size_t flat_dim() const { return conv2.channels * pooled2(); }

  bool operator==(const FeatureExtractorConfig&) const = default;
};

struct TrainConfig {
  double gamma = 2.0;
  std::array<double, 2> class_weights{1.4, 3.3};  // [NotDepressed, Depressed]
  double learning_rate = 1e-3;
  double weight_decay = 1e-2;
  int epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double bn_momentum = 0.1;

  void validate() const;
};

struct DenseParams {
  Matrix weight;  // [out x in]
  std::vector<double> bias;
};

struct NormParams {
  std::vector<double> gain;
  std::vector<double> bias;
};

struct DenseBlockParams {
  DenseParams dense;
  NormParams norm;  // layer norm
};

struct ConvBlockParams {
  std::vector<double> weight;  // [out][in][kernel]
  std::vector<double> bias;
  NormParams norm;  // batch norm affine
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
  bool trainable;
};

struct ModelParams {
  FeatureExtractorConfig config;
  std::vector<DenseBlockParams> expansion;
  ConvBlockParams conv1;
  ConvBlockParams conv2;
  std::vector<DenseBlockParams> head;
  DenseParams output;

  // Correct shapes, every entry zero except running_var = 1.
  static ModelParams zeros(const FeatureExtractorConfig& config);
  // Uniform(+-1/sqrt(fan_in)) weights and biases, unit norm gains.
  static ModelParams init(const FeatureExtractorConfig& config, Rng& rng);

  // Every tensor in a fixed order; running statistics are not trainable.
  std::vector<TensorRef> tensors();
  std::vector<TensorRef> tensors() const { return const_cast<ModelParams*>(this)->tensors(); }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

enum class Mode { Train, Eval };

// Inverted-dropout scale factors (0 or 1/(1-p)) for one batch.
struct DropoutMasks {
  std::vector<Matrix> expansion;
  std::vector<Matrix> head;
};
DropoutMasks draw_dropout_masks(const FeatureExtractorConfig& config, std::size_t batch, Rng& rng);

struct DenseBlockCache {
  Matrix input;
  Matrix normed;  // pre-affine layer-norm output
  std::vector<double> inv_std;
  Matrix gelu_input;
  Matrix mask;  // empty when dropout is inactive
  Matrix output;
};

struct ConvBlockCache {
  Matrix input;
  Matrix normed;
  std::vector<double> inv_std;  // per channel
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // biased
  bool batch_stats = false;
  Matrix bn_output;
  std::vector<std::size_t> argmax;  // max pool only
  Matrix output;
};

struct ForwardCache {
  std::vector<DenseBlockCache> expansion;
  ConvBlockCache conv1;
  ConvBlockCache conv2;
  std::vector<DenseBlockCache> head;
  Matrix head_output;  // input of the output layer
  Matrix logits;
};

// Batched forward over rows of x. Train mode uses batch statistics in batch
// norm and applies `masks` (nullptr = no dropout); Eval mode uses running
// statistics and no dropout. Throws DimMismatch.
Matrix forward_batch(const ModelParams& params, const Matrix& x, Mode mode,
                     const DropoutMasks* masks = nullptr, ForwardCache* cache = nullptr);

std::array<double, 2> forward(const ModelParams& params, std::span<const double> x,
                              Mode mode = Mode::Eval, Rng* dropout_rng = nullptr);

// Gradients of every tensor given d(loss)/d(logits); running-stat slots of
// the result are zero.
ModelParams backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dlogits);

// Folds the cached batch statistics into the running estimates.
void update_running_stats(ModelParams& params, const ForwardCache& cache, double momentum);

inline constexpr double kProbabilityFloor = 1e-12;

// p_t = softmax(logits)[label]:  -alpha_t (1 - p_t)^gamma ln p_t
double focal_loss(std::array<double, 2> logits, int label, double gamma,
                  std::array<double, 2> class_weights);
std::array<double, 2> focal_loss_grad(std::array<double, 2> logits, int label, double gamma,
                                      std::array<double, 2> class_weights);

struct LossAndGradients {
  double loss = 0.0;  // batch mean
  ModelParams gradients;
  ForwardCache cache;
};

// Mean focal loss over a batch in Train mode and its exact gradients.
LossAndGradients loss_and_gradients(const ModelParams& params, const Matrix& x,
                                    std::span<const int> labels, const TrainConfig& config,
                                    const DropoutMasks* masks);

// Binary file: 8-byte magic, u64 header length, JSON header (config and
// tensor table), then each tensor's doubles little-endian in table order.
void save_params(const ModelParams& params, const std::filesystem::path& path);
void save_params(const ModelParams& params, std::ostream& out);
// Throws MalformedFile / ShapeMismatch.
ModelParams load_params(const std::filesystem::path& path);
ModelParams load_params(std::istream& in);

}  // namespace depsum::model
