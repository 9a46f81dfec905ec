#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chf/dataset.hpp"

namespace chf {

struct QueryPoint {
  double pressure_mpa = 0.0;
  double mass_flux = 0.0;   // kg/m^2 s
  double quality = 0.0;     // thermodynamic quality, dimensionless
  double diameter_mm = 8.0;
};

/// The 3-axis (pressure, mass flux, quality) CHF table for 8 mm tubes.
/// Immutable after construction; interpolation is safe to call from any
/// number of threads.
class LutGrid {
 public:
  /// chf_values is dense, indexed (pressure, mass_flux, quality) row-major.
  /// Throws ValidationError on non-monotone axes, shape mismatch, or
  /// non-finite / negative CHF entries.
  LutGrid(std::vector<double> pressures, std::vector<double> mass_fluxes,
          std::vector<double> qualities, std::vector<double> chf_values);

  const std::vector<double>& pressures() const noexcept { return pressures_; }
  const std::vector<double>& mass_fluxes() const noexcept {
    return mass_fluxes_;
  }
  const std::vector<double>& qualities() const noexcept { return qualities_; }

  double value_at(std::size_t ip, std::size_t ig, std::size_t ix) const {
    return chf_[(ip * mass_fluxes_.size() + ig) * qualities_.size() + ix];
  }

  std::size_t node_count() const noexcept { return chf_.size(); }

  /// Whether the axes span the published table ranges
  /// ([0.1, 21] MPa, [0, 8000] kg/m^2 s, [-0.5, 1]). Small test grids are
  /// valid LutGrids but do not cover them.
  bool covers_reference_ranges() const;

 private:
  std::vector<double> pressures_;
  std::vector<double> mass_fluxes_;
  std::vector<double> qualities_;
  std::vector<double> chf_;
};

/// Parses the LUT CSV format: header
/// `pressure_mpa,mass_flux_kg_m2s,quality,chf_kw_m2`, one row per grid
/// node, any row order. Throws ValidationError on malformed rows, missing
/// (P,G,x) combinations, duplicates, or negative CHF.
LutGrid load_lut(std::istream& in);
LutGrid load_lut_file(const std::string& path);

/// Trilinear interpolation over the 8 surrounding grid corners. Queries on
/// the boundary are in range (closed intervals); anything outside throws
/// ValidationError. A query exactly on a grid node returns the stored value.
double interpolate(const LutGrid& grid, double pressure_mpa, double mass_flux,
                   double quality);

/// Tube-diameter correction: chf_8mm * (d_real / 8)^0.5.
double correct_diameter(double chf_8mm, double diameter_mm);

/// Interpolation plus diameter correction in one step. With the default
/// 8 mm diameter this is plain interpolation.
double lookup_chf(const LutGrid& grid, const QueryPoint& query);

/// One Sample per grid node in axis-major order (pressure outermost,
/// quality innermost). Feature columns: pressure_mpa, mass_flux_kg_m2s,
/// quality; target: chf_kw_m2.
Dataset flatten(const LutGrid& grid);

}  // namespace chf
