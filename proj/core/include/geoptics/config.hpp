#pragma once

#include "geoptics/elliptic_layer.hpp"
#include "geoptics/hyperbolic_system.hpp"
#include "geoptics/singular_reference.hpp"
#include "geoptics/spectral_grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace geoptics {

struct SystemConfig {
  std::string kind = "euler2d";  // euler2d, euler3d or custom
  // Euler: pressure law K rho^gamma_exp; sound_speed > 0 overrides K.
  double K = 1.0 / 1.4;
  double gamma_exp = 1.4;
  double sound_speed = 0.0;
  double rho = 1.0;
  std::vector<double> u;
  // custom: A[j] for j = 1..d, dA[j][i], source matrix.
  std::vector<Mat> A;
  std::vector<std::vector<Mat>> dA;
  Mat source;
  Mat B0;
};

// One Gaussian-windowed theta0 harmonic of the boundary data on row `row`:
//   amplitude * ramp(t) * exp(-((t - center) / width)^2) * cos(harmonic theta0 + phase),
// with ramp(t) = smooth_step(t / ramp) so the data vanishes for t <= 0.
struct BoundaryTerm {
  int row = 0;
  int harmonic = 1;
  double amplitude = 0.05;
  double center = 1.3;
  double width = 0.4;
  double ramp = 1.2;
  double phase = 0.0;
  double y_harmonic = 0.0;  // optional cos(y_harmonic y) modulation when ny > 1
};

struct Tolerances {
  double profile = 1e-8;
  int profile_max_iter = 50;
  double singular = 1e-8;
  int singular_max_iter = 50;
  double blowup_cap = 1e6;
  double resonance = 1e-10;
  double amplitude_cap = 0.2;  // weakly nonlinear regime
  double stability_margin = 1e-3;
  double cond_cap = 1e12;
  double boundary_residual = 1e-4;
};

struct RunConfig {
  std::string name = "run";
  SystemConfig system;
  std::vector<double> beta;
  std::vector<BoundaryTerm> G;
  GridSpec grid;
  double D = 4.0;
  double taper = 1.0;
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  int resonance_bound = 8;
  int picard_levels = 3;
  int stability_samples = 200;
  int multiplicity_samples = 100;
  int slice_stride = 100;  // x_d stride of the CSV slices
  Tolerances tol;
  std::uint64_t seed = 1;
};

// Parses and validates; every problem raises ErrorKind::ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

// Canonical JSON of the full (defaulted) configuration and its 64-bit FNV-1a hash.
std::string canonical_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

SystemSpec build_system(const RunConfig& cfg);
BoundaryField build_boundary_data(const RunConfig& cfg, const SpectralGrid& g, int p);

}  // namespace geoptics
