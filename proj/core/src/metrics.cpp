#include "chf/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "chf/errors.hpp"

namespace chf {

namespace {

void check_lengths(std::span<const double> measured,
                   std::span<const double> predicted, std::size_t min_n) {
  if (measured.size() != predicted.size()) {
    throw ValidationError("measured and predicted series differ in length (" +
                          std::to_string(measured.size()) + " vs " +
                          std::to_string(predicted.size()) + ")");
  }
  if (measured.size() < min_n) {
    throw ValidationError("metric needs at least " + std::to_string(min_n) +
                          " samples");
  }
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

double nrmse(std::span<const double> measured,
             std::span<const double> predicted) {
  check_lengths(measured, predicted, 2);
  const double mean_measured = mean_of(measured);
  if (mean_measured == 0.0) {
    throw ValidationError("NRMSE undefined: mean of measured series is zero");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double d = measured[i] - predicted[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(measured.size() - 1)) /
         mean_measured;
}

double mae(std::span<const double> measured,
           std::span<const double> predicted) {
  check_lengths(measured, predicted, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    sum += std::abs(measured[i] - predicted[i]);
  }
  return sum / static_cast<double>(measured.size());
}

double nse(std::span<const double> measured,
           std::span<const double> predicted) {
  check_lengths(measured, predicted, 2);
  const double mean_measured = mean_of(measured);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double e = measured[i] - predicted[i];
    const double d = measured[i] - mean_measured;
    num += e * e;
    den += d * d;
  }
  if (den == 0.0) {
    throw ValidationError("NSE undefined: measured series is constant");
  }
  return 1.0 - num / den;
}

double r2(std::span<const double> measured,
          std::span<const double> predicted) {
  check_lengths(measured, predicted, 2);
  const double mean_m = mean_of(measured);
  const double mean_p = mean_of(predicted);
  double cov = 0.0, var_m = 0.0, var_p = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double dm = measured[i] - mean_m;
    const double dp = predicted[i] - mean_p;
    cov += dm * dp;
    var_m += dm * dm;
    var_p += dp * dp;
  }
  if (var_m == 0.0 || var_p == 0.0) {
    throw ValidationError("R^2 undefined: a series is constant");
  }
  const double corr = cov / std::sqrt(var_m * var_p);
  return corr * corr;
}

MetricsReport evaluate(std::span<const double> measured,
                       std::span<const double> predicted) {
  MetricsReport report;
  report.nrmse = nrmse(measured, predicted);
  report.mae = mae(measured, predicted);
  report.r2 = r2(measured, predicted);
  report.nse = nse(measured, predicted);
  report.n = measured.size();
  return report;
}

std::string metrics_json(const MetricsReport& r) {
  std::ostringstream out;
  out << std::setprecision(17)
      << "{\"n\":" << r.n << ",\"nrmse\":" << r.nrmse << ",\"mae\":" << r.mae
      << ",\"r2\":" << r.r2 << ",\"nse\":" << r.nse << "}";
  return out.str();
}

std::string render_metrics_table(const std::vector<MetricsTableRow>& rows) {
  std::ostringstream out;
  auto cell = [](double v) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(4) << v;
    return c.str();
  };
  std::size_t name_width = 5;
  for (const auto& row : rows) name_width = std::max(name_width, row.model.size());

  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "Model"
      << "| Training                              | Testing\n";
  out << std::setw(static_cast<int>(name_width) + 2) << ""
      << "| NRMSE     MAE         R^2     NSE     | NRMSE     MAE         "
         "R^2     NSE\n";
  for (const auto& row : rows) {
    out << std::left << std::setw(static_cast<int>(name_width) + 2)
        << row.model;
    for (const MetricsReport* m : {&row.training, &row.testing}) {
      out << "| " << std::setw(10) << cell(m->nrmse) << std::setw(12)
          << cell(m->mae) << std::setw(8) << cell(m->r2) << std::setw(8)
          << cell(m->nse);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace chf
