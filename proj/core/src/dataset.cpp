#include "chf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "chf/errors.hpp"
#include "chf/rng.hpp"
#include "text_util.hpp"

namespace chf {

Dataset::Dataset(std::vector<Sample> samples,
                 std::vector<std::string> feature_names)
    : samples_(std::move(samples)), feature_names_(std::move(feature_names)) {
  if (samples_.empty()) {
    throw ValidationError("dataset must not be empty");
  }
  const std::size_t dim = feature_names_.size();
  for (const Sample& s : samples_) {
    if (s.features.size() != dim) {
      throw ValidationError("sample feature count " +
                            std::to_string(s.features.size()) +
                            " does not match the " + std::to_string(dim) +
                            " feature names");
    }
    if (!std::isfinite(s.target) ||
        std::any_of(s.features.begin(), s.features.end(),
                    [](double v) { return !std::isfinite(v); })) {
      throw ValidationError("dataset contains a non-finite value");
    }
  }
}

Tensor Dataset::feature_matrix() const {
  Tensor m({size(), feature_count()});
  double* out = m.data();
  for (const Sample& s : samples_) {
    out = std::copy(s.features.begin(), s.features.end(), out);
  }
  return m;
}

Tensor Dataset::feature_sequences() const {
  return feature_matrix().reshaped({size(), feature_count(), 1});
}

Tensor Dataset::target_column() const {
  Tensor t({size(), 1});
  for (std::size_t i = 0; i < size(); ++i) t[i] = samples_[i].target;
  return t;
}

std::vector<double> Dataset::targets() const {
  std::vector<double> t(size());
  for (std::size_t i = 0; i < size(); ++i) t[i] = samples_[i].target;
  return t;
}

std::vector<ColumnStats> compute_stats(const Dataset& ds) {
  const std::size_t cols = ds.feature_count() + 1;
  const std::size_t n = ds.size();
  auto column_value = [&](std::size_t i, std::size_t c) {
    return c < ds.feature_count() ? ds[i].features[c] : ds[i].target;
  };

  std::vector<ColumnStats> stats(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double mn = column_value(0, c), mx = mn, sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = column_value(i, c);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
    }
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = column_value(i, c) - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / static_cast<double>(n));
    ColumnStats& s = stats[c];
    s.min = mn;
    s.max = mx;
    s.mean = mean;
    s.sd = sd;
    if (mean != 0.0) s.cv = sd / mean;
  }
  return stats;
}

Standardizer::Standardizer(std::vector<double> means, std::vector<double> stds)
    : means_(std::move(means)), stds_(std::move(stds)) {
  if (means_.size() != stds_.size()) {
    throw ValidationError("standardizer means/stds length mismatch");
  }
  for (double sd : stds_) {
    if (!(sd > 0.0)) {
      throw ValidationError("standardizer requires positive stds");
    }
  }
}

Standardizer Standardizer::fit(const Dataset& train) {
  auto stats = compute_stats(train);
  std::vector<double> means, stds;
  for (std::size_t c = 0; c < train.feature_count(); ++c) {
    if (stats[c].sd == 0.0) {
      throw ValidationError("zero-variance feature column '" +
                            train.feature_names()[c] +
                            "' cannot be standardized");
    }
    means.push_back(stats[c].mean);
    stds.push_back(stats[c].sd);
  }
  return Standardizer(std::move(means), std::move(stds));
}

Dataset Standardizer::transform(const Dataset& ds) const {
  if (ds.feature_count() != means_.size()) {
    throw ValidationError("standardizer was fitted on " +
                          std::to_string(means_.size()) +
                          " features, dataset has " +
                          std::to_string(ds.feature_count()));
  }
  std::vector<Sample> out;
  out.reserve(ds.size());
  for (const Sample& s : ds.samples()) {
    Sample t = s;
    for (std::size_t c = 0; c < means_.size(); ++c) {
      t.features[c] = (s.features[c] - means_[c]) / stds_[c];
    }
    out.push_back(std::move(t));
  }
  return Dataset(std::move(out), ds.feature_names());
}

Dataset Standardizer::inverse_transform(const Dataset& ds) const {
  if (ds.feature_count() != means_.size()) {
    throw ValidationError("standardizer dimensionality mismatch");
  }
  std::vector<Sample> out;
  out.reserve(ds.size());
  for (const Sample& s : ds.samples()) {
    Sample t = s;
    for (std::size_t c = 0; c < means_.size(); ++c) {
      t.features[c] = s.features[c] * stds_[c] + means_[c];
    }
    out.push_back(std::move(t));
  }
  return Dataset(std::move(out), ds.feature_names());
}

std::vector<double> Standardizer::transform_row(
    const std::vector<double>& features) const {
  if (features.size() != means_.size()) {
    throw ValidationError("standardizer dimensionality mismatch");
  }
  std::vector<double> out(features.size());
  for (std::size_t c = 0; c < means_.size(); ++c) {
    out[c] = (features[c] - means_[c]) / stds_[c];
  }
  return out;
}

SplitResult split(const Dataset& ds, double train_fraction,
                  std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n) + 0.5));
  if (n_train == 0 || n_train == n) {
    throw ValidationError("dataset too small to split: " + std::to_string(n) +
                          " samples at fraction " +
                          detail::format_double(train_fraction));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> test_idx(order.begin() + n_train, order.end());

  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<Sample> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(ds[i]);
    return Dataset(std::move(rows), ds.feature_names());
  };

  return SplitResult{gather(train_idx), gather(test_idx), seed,
                     std::move(train_idx), std::move(test_idx)};
}

Dataset load_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("empty dataset file");
  }
  auto header = detail::split_csv(line);
  if (header.size() < 2) {
    throw ValidationError("dataset needs at least one feature column and a "
                          "target column");
  }
  std::vector<std::string> feature_names(header.begin(), header.end() - 1);

  std::vector<Sample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() != header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    Sample s;
    s.features.reserve(feature_names.size());
    for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
      s.features.push_back(detail::parse_double(fields[c], line_no));
    }
    s.target = detail::parse_double(fields.back(), line_no);
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), std::move(feature_names));
}

Dataset load_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open dataset file: " + path);
  }
  return load_dataset_csv(in);
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  for (const std::string& name : ds.feature_names()) out << name << ',';
  out << "chf_kw_m2\n";
  for (const Sample& s : ds.samples()) {
    for (double v : s.features) out << detail::format_double(v) << ',';
    out << detail::format_double(s.target) << '\n';
  }
}

std::string split_manifest_json(const SplitResult& split) {
  std::ostringstream out;
  auto write_indices = [&](const std::vector<std::size_t>& idx) {
    out << '[';
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i) out << ',';
      out << idx[i];
    }
    out << ']';
  };
  out << "{\"seed\":" << split.seed << ",\"train_indices\":";
  write_indices(split.train_indices);
  out << ",\"test_indices\":";
  write_indices(split.test_indices);
  out << '}';
  return out.str();
}

}  // namespace chf
