#include "chf/autoencoder.hpp"

#include <cmath>
#include <string>

#include "chf/errors.hpp"

namespace chf {

namespace {

std::vector<LayerSpec> autoencoder_layers(const AutoencoderSpec& spec) {
  if (spec.input_dim < 2 || spec.hidden_dim < 1 || spec.latent_dim < 1) {
    throw ValidationError("autoencoder dimensions must be positive");
  }
  // The widest configuration keeps latent_dim == input_dim (its appended
  // code spans the full input); anything wider stops being a bottleneck.
  if (spec.latent_dim > spec.input_dim) {
    throw ValidationError("autoencoder latent dim " +
                          std::to_string(spec.latent_dim) +
                          " exceeds input dim " +
                          std::to_string(spec.input_dim));
  }
  return {
      LayerSpec::dense(spec.input_dim, spec.hidden_dim),
      LayerSpec::activation(ActivationFn::tanh),
      LayerSpec::dense(spec.hidden_dim, spec.latent_dim),  // encoder ends here
      LayerSpec::dense(spec.latent_dim, spec.hidden_dim),
      LayerSpec::activation(ActivationFn::tanh),
      LayerSpec::dense(spec.hidden_dim, spec.input_dim),
  };
}

}  // namespace

Autoencoder::Autoencoder(AutoencoderSpec spec, std::uint64_t seed)
    : spec_(spec),
      net_(autoencoder_layers(spec), {spec.input_dim}, seed) {}

Autoencoder::Autoencoder(AutoencoderSpec spec, NetworkModel net)
    : spec_(spec), net_(std::move(net)) {
  const auto expected = autoencoder_layers(spec_);
  if (net_.layers().size() != expected.size() ||
      net_.input_shape() != std::vector<std::size_t>{spec_.input_dim}) {
    throw ValidationError("network does not match the autoencoder spec");
  }
}

Tensor Autoencoder::encode(const Tensor& features) const {
  if (features.rank() != 2 || features.extent(1) != spec_.input_dim) {
    throw ValidationError("encode expects an (n, " +
                          std::to_string(spec_.input_dim) + ") matrix");
  }
  // Run the encoder half only.
  std::vector<LayerSpec> enc_layers(
      net_.layers().begin(),
      net_.layers().begin() + static_cast<long>(encoder_layer_count()));
  NetworkModel encoder(std::move(enc_layers), {spec_.input_dim}, 0);
  for (std::size_t li = 0; li < encoder_layer_count(); ++li) {
    encoder.weights(li) = net_.weights(li);
    encoder.biases(li) = net_.biases(li);
  }
  return forward(encoder, features);
}

std::vector<double> Autoencoder::encode_row(
    const std::vector<double>& features) const {
  Tensor row({1, spec_.input_dim}, std::vector<double>(features));
  Tensor code = encode(row);
  return {code.data(), code.data() + code.size()};
}

Tensor Autoencoder::reconstruct(const Tensor& features) const {
  return forward(net_, features);
}

TrainHistory train_autoencoder(Autoencoder& ae, const Tensor& standardized,
                               const TrainConfig& cfg) {
  if (standardized.rank() != 2 ||
      standardized.extent(1) != ae.spec().input_dim) {
    throw ValidationError("autoencoder training data must be (n, " +
                          std::to_string(ae.spec().input_dim) + ")");
  }
  // Guard against accidentally feeding raw physical units.
  const std::size_t n = standardized.extent(0);
  const std::size_t dim = standardized.extent(1);
  for (std::size_t c = 0; c < dim; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += standardized.at(i, c);
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = standardized.at(i, c) - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / static_cast<double>(n));
    if (sd < 0.5 || sd > 2.0) {
      throw ValidationError(
          "autoencoder input column " + std::to_string(c) +
          " has sd " + std::to_string(sd) +
          "; expected standardized features (sd within [0.5, 2])");
    }
  }
  return train(ae.net(), standardized, standardized, standardized,
               standardized, cfg);
}

Dataset augment_dataset(const Dataset& standardized, const Autoencoder& ae) {
  if (standardized.feature_count() != ae.spec().input_dim) {
    throw ValidationError("augment_dataset expects " +
                          std::to_string(ae.spec().input_dim) +
                          " base features, got " +
                          std::to_string(standardized.feature_count()));
  }
  const Tensor codes = ae.encode(standardized.feature_matrix());
  const std::size_t k = ae.latent_dim();

  std::vector<Sample> samples;
  samples.reserve(standardized.size());
  for (std::size_t i = 0; i < standardized.size(); ++i) {
    Sample s = standardized[i];
    for (std::size_t j = 0; j < k; ++j) {
      s.features.push_back(codes.at(i, j));
    }
    samples.push_back(std::move(s));
  }
  std::vector<std::string> names = standardized.feature_names();
  for (std::size_t j = 1; j <= k; ++j) {
    names.push_back("aug_" + std::to_string(j));
  }
  return Dataset(std::move(samples), std::move(names));
}

}  // namespace chf
