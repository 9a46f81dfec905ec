#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chf/tensor.hpp"

namespace chf {

struct Sample {
  std::vector<double> features;
  double target = 0.0;
};

/// Immutable collection of regression rows. All samples share one feature
/// dimensionality; feature_names label the columns in order.
class Dataset {
 public:
  Dataset(std::vector<Sample> samples, std::vector<std::string> feature_names);

  std::size_t size() const noexcept { return samples_.size(); }
  std::size_t feature_count() const noexcept { return feature_names_.size(); }

  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const noexcept { return samples_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }

  /// (n, feature_count) matrix of the feature columns.
  Tensor feature_matrix() const;
  /// (n, length, 1) view of the features as single-channel sequences.
  Tensor feature_sequences() const;
  /// (n, 1) column of targets.
  Tensor target_column() const;
  std::vector<double> targets() const;

 private:
  std::vector<Sample> samples_;
  std::vector<std::string> feature_names_;
};

struct ColumnStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // population form, divisor N
  std::optional<double> cv;  // sd / mean; absent when mean == 0
};

/// Per-column descriptive statistics: one entry per feature column followed
/// by one entry for the target.
std::vector<ColumnStats> compute_stats(const Dataset& ds);

/// Per-feature shift-and-scale to mean 0, sd 1. Fitted on training data
/// only; the target column is never touched.
class Standardizer {
 public:
  Standardizer(std::vector<double> means, std::vector<double> stds);

  static Standardizer fit(const Dataset& train);

  Dataset transform(const Dataset& ds) const;
  Dataset inverse_transform(const Dataset& ds) const;

  /// Standardizes a single raw feature row.
  std::vector<double> transform_row(const std::vector<double>& features) const;

  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& stds() const noexcept { return stds_; }

 private:
  std::vector<double> means_;
  std::vector<double> stds_;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Seeded uniform shuffle (Fisher-Yates) followed by a prefix/suffix cut.
/// Train size is round-half-up of train_fraction * N.
SplitResult split(const Dataset& ds, double train_fraction,
                  std::uint64_t seed);

/// CSV import/export. The writer emits feature_names plus a final
/// `chf_kw_m2` target column; the reader treats the last column as the
/// target whatever its header says.
Dataset load_dataset_csv(std::istream& in);
Dataset load_dataset_csv_file(const std::string& path);
void write_dataset_csv(const Dataset& ds, std::ostream& out);

/// JSON text {seed, train_indices, test_indices} for exact reproduction.
std::string split_manifest_json(const SplitResult& split);

}  // namespace chf
