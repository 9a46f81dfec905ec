#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chf {

struct MetricsReport {
  double nrmse = 0.0;  // dimensionless
  double mae = 0.0;    // CHF units
  double r2 = 0.0;     // in [0, 1]
  double nse = 0.0;    // <= 1, unbounded below
  std::size_t n = 0;
};

/// sqrt( sum (m_i - p_i)^2 / (N - 1) ) / mean(measured). Note the N-1
/// divisor: that is how the source formula is written, not the usual
/// RMSE convention.
double nrmse(std::span<const double> measured, std::span<const double> predicted);

/// (1/N) sum |m_i - p_i|.
double mae(std::span<const double> measured, std::span<const double> predicted);

/// Nash-Sutcliffe efficiency: 1 - sum (m_i - p_i)^2 / sum (m_i - mean_m)^2.
/// Not clamped; a worse-than-mean predictor yields a negative value.
double nse(std::span<const double> measured, std::span<const double> predicted);

/// Squared Pearson correlation, so it is invariant under affine transforms
/// of either series (NSE is the variant that penalizes offsets).
double r2(std::span<const double> measured, std::span<const double> predicted);

MetricsReport evaluate(std::span<const double> measured,
                       std::span<const double> predicted);

std::string metrics_json(const MetricsReport& report);

struct MetricsTableRow {
  std::string model;
  MetricsReport training;
  MetricsReport testing;
};

/// Aligned plain-text table, models down the side, train/test metric
/// blocks across.
std::string render_metrics_table(const std::vector<MetricsTableRow>& rows);

}  // namespace chf
