#pragma once

#include <cstdint>

#include "chf/dataset.hpp"
#include "chf/network.hpp"

namespace chf {

/// Bottleneck autoencoder: input_dim -> hidden -> latent -> hidden ->
/// input_dim, tanh on the hidden layers, linear bottleneck and output.
/// latent_dim may be at most input_dim (the widest variant keeps the full
/// dimensionality).
struct AutoencoderSpec {
  std::size_t input_dim = 3;
  std::size_t hidden_dim = 8;
  std::size_t latent_dim = 2;
};

class Autoencoder {
 public:
  Autoencoder(AutoencoderSpec spec, std::uint64_t seed);
  /// Rebuilds from a deserialized network (layer count fixes the encoder
  /// boundary; see encoder_layer_count).
  Autoencoder(AutoencoderSpec spec, NetworkModel net);

  const AutoencoderSpec& spec() const noexcept { return spec_; }
  std::size_t latent_dim() const noexcept { return spec_.latent_dim; }

  const NetworkModel& net() const noexcept { return net_; }
  NetworkModel& net() noexcept { return net_; }

  /// Layers [0, encoder_layer_count) of the stack form the encoder.
  std::size_t encoder_layer_count() const noexcept { return 3; }

  /// (n, input_dim) -> (n, latent_dim) bottleneck codes.
  Tensor encode(const Tensor& features) const;
  std::vector<double> encode_row(const std::vector<double>& features) const;

  /// Full encode-decode pass, (n, input_dim) -> (n, input_dim).
  Tensor reconstruct(const Tensor& features) const;

 private:
  AutoencoderSpec spec_;
  NetworkModel net_;
};

/// Joint Adam training of encoder and decoder on the reconstruction MSE.
/// `standardized` must be an (n, input_dim) matrix of standardized
/// features; a column standard deviation outside [0.5, 2] is rejected to
/// catch unit mistakes. Deterministic under cfg.seed.
TrainHistory train_autoencoder(Autoencoder& ae, const Tensor& standardized,
                               const TrainConfig& cfg);

/// Appends the bottleneck codes to each sample of a standardized
/// 3-feature dataset: features become [base..., aug_1..aug_k], names gain
/// aug_1..aug_k, base columns and targets stay untouched.
Dataset augment_dataset(const Dataset& standardized, const Autoencoder& ae);

}  // namespace chf
