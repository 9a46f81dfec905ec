#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chf/autoencoder.hpp"
#include "chf/dataset.hpp"
#include "chf/network.hpp"

namespace chf {

/// Everything needed to run a trained regressor on raw-unit inputs: the
/// network plus the preprocessing fitted alongside it (training-set
/// standardizer and, for augmented variants, the feature autoencoder).
struct ModelBundle {
  std::string name;
  NetworkModel net;
  Standardizer standardizer;
  std::optional<Autoencoder> autoencoder;
  // Scaling of the appended code columns; only present when the run was
  // configured to standardize augmented features (off by default).
  std::optional<Standardizer> augment_standardizer;
  std::vector<std::string> base_feature_names;
  TrainConfig train_config;
};

/// File format: 8-byte magic "CHFMDL1\n", a little-endian u64 header
/// length, a JSON header (layer specs, seed, training config,
/// preprocessing), then every parameter as little-endian IEEE-754 f64 in
/// a fixed order: embedded autoencoder first when present, then the main
/// network; within a network layer order, weights before biases,
/// row-major.
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

/// Standalone autoencoder files use the same container with
/// kind = "autoencoder".
void save_autoencoder(const Autoencoder& ae, const TrainConfig& cfg,
                      const std::string& path);
Autoencoder load_autoencoder(const std::string& path);

}  // namespace chf
