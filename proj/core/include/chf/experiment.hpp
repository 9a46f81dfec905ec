#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chf/dataset.hpp"
#include "chf/metrics.hpp"
#include "chf/model_io.hpp"
#include "chf/network.hpp"

namespace chf {

/// The experiment matrix columns: the plain 3-feature regressor and the
/// three autoencoder-augmented ones (latent widths 1..3, final feature
/// counts 4..6).
enum class Variant { base = 0, a1 = 1, a2 = 2, a3 = 3 };

std::size_t variant_latent_dim(Variant v);      // 0 for base
std::size_t variant_feature_count(Variant v);   // 3..6
std::string variant_slug(Variant v);            // dcnn_3f, dcnn_3f_a1, ...
std::string variant_display(Variant v);         // DCNN_3F, DCNN_3F-A1, ...
Variant parse_variant(const std::string& text);

struct ExperimentConfig {
  std::string lut_path;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  std::vector<Variant> variants = {Variant::base, Variant::a1, Variant::a2,
                                   Variant::a3};
  TrainConfig train;  // seed field ignored; stage seeds derive from `seed`
  bool standardize_augmented = false;
  std::string output_dir;
  // Progress lines on stderr while training (set by the CLI, not a config
  // file key; has no effect on any artifact).
  bool log_progress = false;
};

/// Flat `key = value` config text. Keys: lut, seed, train_fraction,
/// variants, epochs, batch_size, learning_rate, standardize_augmented,
/// output_dir. '#' starts a comment. Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::string& path);

struct VariantOutcome {
  Variant variant;
  std::string slug;
  std::string display;
  std::size_t feature_count = 0;
  std::size_t parameter_count = 0;
  MetricsReport train_metrics;
  MetricsReport test_metrics;
  TrainHistory history;
  ModelBundle bundle;
  std::vector<double> train_predictions;
  std::vector<double> test_predictions;
};

struct RunOutcome {
  std::uint64_t master_seed = 0;
  std::size_t sample_count = 0;
  SplitResult split;
  std::vector<VariantOutcome> variants;
};

/// Trains every requested variant on an existing split. All fitting
/// (standardizer, autoencoders, networks) happens on split.train only;
/// split.test is used for evaluation and per-epoch monitoring, never for
/// fitting.
RunOutcome run_on_split(const SplitResult& split, const ExperimentConfig& cfg);

/// Full pipeline: load the LUT, flatten, split with the derived split
/// seed, train all variants, and (when output_dir is set) write the
/// artifact tree: models/, reports/, predictions/, manifest.json.
/// Rerunning with an identical config reproduces the outputs bytewise.
RunOutcome run_experiment(const ExperimentConfig& cfg);

void write_run_artifacts(const RunOutcome& outcome,
                         const ExperimentConfig& cfg);

/// Deterministic JSON text of every variant's train/test metrics, as
/// written to reports/metrics.json.
std::string run_metrics_json(const RunOutcome& outcome);

struct RankingEntry {
  std::string display;
  MetricsReport test;
  // Per-metric test deltas against the base variant; absent when the run
  // has no base variant.
  std::optional<MetricsReport> delta_vs_base;
};

/// Variants ordered by test R^2 descending, ties broken by test NRMSE
/// ascending, remaining ties keep the run order. Needs >= 2 variants.
std::vector<RankingEntry> compare_variants(const RunOutcome& outcome);
std::string render_comparison(const std::vector<RankingEntry>& ranking);

/// Applies a trained bundle to raw-unit inputs (standardize, encode and
/// append when augmented, run the network).
std::vector<double> predict_dataset(const ModelBundle& bundle,
                                    const Dataset& raw);
double predict_point(const ModelBundle& bundle,
                     const std::vector<double>& raw_features);

/// CSV with columns measured_chf,predicted_chf,split_tag.
void export_predictions(const ModelBundle& bundle, const Dataset& raw,
                        const std::string& split_tag, std::ostream& out);

}  // namespace chf
