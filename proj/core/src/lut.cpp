#include "chf/lut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "chf/errors.hpp"
#include "text_util.hpp"

namespace chf {

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 2) {
    throw ValidationError(std::string(name) + " axis needs at least 2 values");
  }
  for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
    if (!(axis[i] < axis[i + 1])) {
      throw ValidationError(std::string(name) +
                            " axis is not strictly increasing");
    }
  }
  for (double v : axis) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(name) + " axis has a non-finite value");
    }
  }
}

/// Index of the cell containing q, i.e. the largest i with axis[i] <= q,
/// clamped so the top boundary falls into the last cell.
std::size_t cell_index(const std::vector<double>& axis, double q) {
  auto it = std::upper_bound(axis.begin(), axis.end(), q);
  std::size_t i = static_cast<std::size_t>(it - axis.begin());
  if (i > 0) --i;
  if (i > axis.size() - 2) i = axis.size() - 2;
  return i;
}

double lerp(double a, double b, double t) { return a * (1.0 - t) + b * t; }

}  // namespace

LutGrid::LutGrid(std::vector<double> pressures, std::vector<double> mass_fluxes,
                 std::vector<double> qualities, std::vector<double> chf_values)
    : pressures_(std::move(pressures)),
      mass_fluxes_(std::move(mass_fluxes)),
      qualities_(std::move(qualities)),
      chf_(std::move(chf_values)) {
  check_axis(pressures_, "pressure");
  check_axis(mass_fluxes_, "mass flux");
  check_axis(qualities_, "quality");
  if (chf_.size() !=
      pressures_.size() * mass_fluxes_.size() * qualities_.size()) {
    throw ValidationError("CHF value count does not match axis dimensions");
  }
  for (double& v : chf_) {
    if (!std::isfinite(v)) {
      throw ValidationError("CHF table contains a non-finite value");
    }
    if (v < 0.0) {
      throw ValidationError("CHF table contains a negative value");
    }
    if (v == 0.0) v = 0.0;  // normalize -0.0 so node lookups stay bit-exact
  }
}

bool LutGrid::covers_reference_ranges() const {
  return pressures_.front() <= 0.1 && pressures_.back() >= 21.0 &&
         mass_fluxes_.front() <= 0.0 && mass_fluxes_.back() >= 8000.0 &&
         qualities_.front() <= -0.5 && qualities_.back() >= 1.0;
}

LutGrid load_lut(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("empty LUT file");
  }
  auto header = detail::split_csv(line);
  const std::vector<std::string_view> expected = {
      "pressure_mpa", "mass_flux_kg_m2s", "quality", "chf_kw_m2"};
  if (std::vector<std::string_view>(header.begin(), header.end()) != expected) {
    throw ValidationError(
        "LUT header must be pressure_mpa,mass_flux_kg_m2s,quality,chf_kw_m2");
  }

  struct Row {
    double p, g, x, chf;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() != 4) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": expected 4 fields, got " +
                            std::to_string(fields.size()));
    }
    Row r{detail::parse_double(fields[0], line_no),
          detail::parse_double(fields[1], line_no),
          detail::parse_double(fields[2], line_no),
          detail::parse_double(fields[3], line_no)};
    rows.push_back(r);
  }
  if (rows.empty()) {
    throw ValidationError("LUT file has no data rows");
  }

  // Axis values are recovered from the rows themselves; sorting makes them
  // monotone by construction, so the remaining structural check is that
  // every (P, G, x) combination appears exactly once.
  std::map<double, std::size_t> p_index, g_index, x_index;
  for (const Row& r : rows) {
    p_index.emplace(r.p, 0);
    g_index.emplace(r.g, 0);
    x_index.emplace(r.x, 0);
  }
  auto number_axis = [](std::map<double, std::size_t>& index) {
    std::vector<double> axis;
    axis.reserve(index.size());
    std::size_t i = 0;
    for (auto& [value, slot] : index) {
      slot = i++;
      axis.push_back(value);
    }
    return axis;
  };
  std::vector<double> pressures = number_axis(p_index);
  std::vector<double> mass_fluxes = number_axis(g_index);
  std::vector<double> qualities = number_axis(x_index);

  const std::size_t expected_nodes =
      pressures.size() * mass_fluxes.size() * qualities.size();
  if (rows.size() != expected_nodes) {
    throw ValidationError(
        "incomplete grid: " + std::to_string(rows.size()) + " rows but " +
        std::to_string(pressures.size()) + "x" +
        std::to_string(mass_fluxes.size()) + "x" +
        std::to_string(qualities.size()) + " axes need " +
        std::to_string(expected_nodes));
  }

  std::vector<double> chf(expected_nodes, -1.0);
  for (const Row& r : rows) {
    std::size_t idx = (p_index[r.p] * mass_fluxes.size() + g_index[r.g]) *
                          qualities.size() +
                      x_index[r.x];
    if (chf[idx] >= 0.0) {
      throw ValidationError("duplicate grid node (P=" +
                            detail::format_double(r.p) + ", G=" +
                            detail::format_double(r.g) + ", x=" +
                            detail::format_double(r.x) + ")");
    }
    if (r.chf < 0.0) {
      throw ValidationError("negative CHF at node (P=" +
                            detail::format_double(r.p) + ", G=" +
                            detail::format_double(r.g) + ", x=" +
                            detail::format_double(r.x) + ")");
    }
    chf[idx] = r.chf;
  }
  // Row count matches the axis product and no node repeated, so the grid is
  // complete at this point.

  return LutGrid(std::move(pressures), std::move(mass_fluxes),
                 std::move(qualities), std::move(chf));
}

LutGrid load_lut_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open LUT file: " + path);
  }
  return load_lut(in);
}

double interpolate(const LutGrid& grid, double pressure_mpa, double mass_flux,
                   double quality) {
  const auto& pa = grid.pressures();
  const auto& ga = grid.mass_fluxes();
  const auto& xa = grid.qualities();

  auto in_range = [](const std::vector<double>& axis, double q) {
    return std::isfinite(q) && q >= axis.front() && q <= axis.back();
  };
  if (!in_range(pa, pressure_mpa)) {
    throw ValidationError("pressure " + detail::format_double(pressure_mpa) +
                          " outside table range [" +
                          detail::format_double(pa.front()) + ", " +
                          detail::format_double(pa.back()) + "]");
  }
  if (!in_range(ga, mass_flux)) {
    throw ValidationError("mass flux " + detail::format_double(mass_flux) +
                          " outside table range [" +
                          detail::format_double(ga.front()) + ", " +
                          detail::format_double(ga.back()) + "]");
  }
  if (!in_range(xa, quality)) {
    throw ValidationError("quality " + detail::format_double(quality) +
                          " outside table range [" +
                          detail::format_double(xa.front()) + ", " +
                          detail::format_double(xa.back()) + "]");
  }

  const std::size_t ip = cell_index(pa, pressure_mpa);
  const std::size_t ig = cell_index(ga, mass_flux);
  const std::size_t ix = cell_index(xa, quality);

  const double tp = (pressure_mpa - pa[ip]) / (pa[ip + 1] - pa[ip]);
  const double tg = (mass_flux - ga[ig]) / (ga[ig + 1] - ga[ig]);
  const double tx = (quality - xa[ix]) / (xa[ix + 1] - xa[ix]);

  // Tensor product of three 1-D linear interpolations.
  const double c00 =
      lerp(grid.value_at(ip, ig, ix), grid.value_at(ip + 1, ig, ix), tp);
  const double c01 = lerp(grid.value_at(ip, ig, ix + 1),
                          grid.value_at(ip + 1, ig, ix + 1), tp);
  const double c10 = lerp(grid.value_at(ip, ig + 1, ix),
                          grid.value_at(ip + 1, ig + 1, ix), tp);
  const double c11 = lerp(grid.value_at(ip, ig + 1, ix + 1),
                          grid.value_at(ip + 1, ig + 1, ix + 1), tp);
  const double c0 = lerp(c00, c10, tg);
  const double c1 = lerp(c01, c11, tg);
  return lerp(c0, c1, tx);
}

double correct_diameter(double chf_8mm, double diameter_mm) {
  if (!(diameter_mm > 0.0) || !std::isfinite(diameter_mm)) {
    throw ValidationError("tube diameter must be positive");
  }
  if (!(chf_8mm >= 0.0) || !std::isfinite(chf_8mm)) {
    throw ValidationError("CHF value must be finite and non-negative");
  }
  return chf_8mm * std::sqrt(diameter_mm / 8.0);
}

double lookup_chf(const LutGrid& grid, const QueryPoint& query) {
  return correct_diameter(
      interpolate(grid, query.pressure_mpa, query.mass_flux, query.quality),
      query.diameter_mm);
}

Dataset flatten(const LutGrid& grid) {
  std::vector<Sample> samples;
  samples.reserve(grid.node_count());
  const auto& pa = grid.pressures();
  const auto& ga = grid.mass_fluxes();
  const auto& xa = grid.qualities();
  for (std::size_t ip = 0; ip < pa.size(); ++ip) {
    for (std::size_t ig = 0; ig < ga.size(); ++ig) {
      for (std::size_t ix = 0; ix < xa.size(); ++ix) {
        samples.push_back(
            Sample{{pa[ip], ga[ig], xa[ix]}, grid.value_at(ip, ig, ix)});
      }
    }
  }
  return Dataset(std::move(samples),
                 {"pressure_mpa", "mass_flux_kg_m2s", "quality"});
}

}  // namespace chf
