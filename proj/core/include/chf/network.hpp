#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chf/tensor.hpp"

namespace chf {

enum class LayerKind { conv1d, dense, activation, flatten };

enum class ActivationFn { relu, tanh };

std::string to_string(LayerKind kind);
std::string to_string(ActivationFn fn);
LayerKind layer_kind_from_string(const std::string& s);
ActivationFn activation_from_string(const std::string& s);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;

  // conv1d ("same" padding, odd kernel)
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 0;

  // dense
  std::size_t in_features = 0;
  std::size_t out_features = 0;

  // activation
  ActivationFn fn = ActivationFn::relu;

  static LayerSpec conv1d(std::size_t in_channels, std::size_t out_channels,
                          std::size_t kernel_size);
  static LayerSpec dense(std::size_t in_features, std::size_t out_features);
  static LayerSpec activation(ActivationFn fn);
  static LayerSpec flatten();

  bool has_parameters() const {
    return kind == LayerKind::conv1d || kind == LayerKind::dense;
  }
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

/// An ordered layer stack with its parameters. Construction validates that
/// consecutive layer shapes chain together and initializes weights with
/// seeded uniform Kaiming fan-in scaling (biases start at zero).
///
/// input_shape is per sample: {length, channels} for convolutional stacks,
/// {features} for dense-only ones. Batches carry a leading free dimension.
class NetworkModel {
 public:
  NetworkModel(std::vector<LayerSpec> layers,
               std::vector<std::size_t> input_shape, std::uint64_t rng_seed);

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  const std::vector<std::size_t>& input_shape() const noexcept {
    return input_shape_;
  }
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }

  /// Weight/bias tensor of layer i; empty for parameter-free layers.
  const Tensor& weights(std::size_t layer) const { return weights_[layer]; }
  const Tensor& biases(std::size_t layer) const { return biases_[layer]; }
  Tensor& weights(std::size_t layer) { return weights_[layer]; }
  Tensor& biases(std::size_t layer) { return biases_[layer]; }

  std::size_t parameter_count() const;

  /// Per-sample output shape.
  const std::vector<std::size_t>& output_shape() const noexcept {
    return output_shape_;
  }

  /// Flat copy of every parameter in serialization order (layer order,
  /// weights before biases, row-major) and the inverse operation.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& values);

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> input_shape_;
  std::vector<std::size_t> output_shape_;
  std::uint64_t rng_seed_ = 0;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

/// Shape a layer produces for the given per-sample input shape; throws
/// ValidationError when the layer cannot accept it.
std::vector<std::size_t> layer_output_shape(
    const LayerSpec& spec, const std::vector<std::size_t>& input);

/// Runs the stack on a batch. The batch must be the model's input shape
/// with a leading batch dimension.
Tensor forward(const NetworkModel& model, const Tensor& batch);

/// Mean of squared differences over all elements.
double mse_loss(const Tensor& pred, const Tensor& target);

struct Gradients {
  std::vector<Tensor> weights;  // same shapes as model parameters
  std::vector<Tensor> biases;
};

/// Analytic gradients of mse_loss(forward(model, batch), target) with
/// respect to every parameter.
Gradients backward(const NetworkModel& model, const Tensor& batch,
                   const Tensor& target);

struct AdamState {
  explicit AdamState(const NetworkModel& model);
  std::vector<Tensor> m_weights, v_weights;
  std::vector<Tensor> m_biases, v_biases;
  std::size_t step = 0;
};

/// One bias-corrected Adam update in place.
void adam_step(NetworkModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainHistory {
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> valid_loss;
};

using EpochCallback =
    std::function<void(std::size_t epoch, double train_loss, double valid_loss)>;

/// Full training loop: epochs x ceil(N/batch) Adam steps over
/// seeded-shuffled mini-batches (the last batch of an epoch may be short).
/// Deterministic for a fixed cfg.seed. Throws TrainingDivergence when a
/// batch loss turns non-finite. on_epoch, when set, is called after every
/// epoch with the freshly computed losses.
TrainHistory train(NetworkModel& model, const Tensor& train_inputs,
                   const Tensor& train_targets, const Tensor& valid_inputs,
                   const Tensor& valid_targets, const TrainConfig& cfg,
                   const EpochCallback& on_epoch = {});

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|,
/// 1e-12), numeric being central finite differences with h = 1e-5. Meant
/// for small models; cost grows with the parameter count.
double gradient_check(const NetworkModel& model, const Tensor& batch,
                      const Tensor& target);

/// The 8-weight-layer regression network: five kernel-3 "same" conv1d
/// layers (channels 16, 32, 64, 64, 32, ReLU after each), flatten, then
/// dense 32*input_length -> 64 -> 16 -> 1 with ReLU on the hidden denses
/// and a linear output. input_length must be 3..6.
NetworkModel build_dcnn(std::size_t input_length, std::uint64_t seed);

}  // namespace chf
