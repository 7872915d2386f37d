#pragma once

#include "geoptics/hyperbolic_system.hpp"
#include "geoptics/spectral_grid.hpp"

#include <functional>
#include <vector>

namespace geoptics {

// Boundary data G(t, y, theta0) as physical (t, y) values per theta0
// harmonic: Field(1, nh, p, nf).
using BoundaryField = Field;

struct SingularOptions {
  double tol = 1e-8;
  int max_iter = 50;
  double blowup_cap = 1e6;
};

struct SingularResult {
  double eps = 0.0;
  Field U;  // weighted spectral, [ix][h][c][f]
  int iterations = 0;
  std::vector<double> increments;  // relative E^{s-1} size of U^{n+1} - U^n
  NormReport norm;
  double max_condition = 1.0;
};

// Solver for
//   d_{x_d} U + sum_{j<d} At_j(eps U)(d_j + beta_j d_theta0 / eps) U = F(eps U) U,
//   B(eps U) U = G at x_d = 0,
// by explicit Picard iteration around the constant-coefficient operator.
class SingularSolver {
 public:
  SingularSolver(const SystemSpec& sys, const SpectralGrid& g, std::vector<double> beta, double eps);

  // Nonlinear right-hand side of the step that maps U^n to U^{n+1}, returned
  // in weighted spectral form and multiplied by the source cutoff.
  void nonlinear_source(const Field& Un, Field& R) const;
  // Effective boundary data G - (B(eps U^n) - B(0)) U^n|_{x_d=0}, spectral [h][row][f].
  std::vector<cd> boundary_data(const BoundaryField& G, const Field* Un) const;
  // U^{n+1} from U^n (Un == nullptr means U^0 = 0).
  void picard_step(const Field* Un, const BoundaryField& G, Field& Unext) const;
  // Linear solve with the given spectral source and spectral boundary data.
  void solve_linear(const Field& R, const std::vector<cd>& Ghat, Field& U) const;

  using IterateHook = std::function<void(int n, const Field& Un)>;
  SingularResult solve(const BoundaryField& G, const SingularOptions& opt, const IterateHook& hook = {}) const;

  double eps() const { return eps_; }
  const SpectralGrid& grid() const { return g_; }

 private:
  const SystemSpec& sys_;
  const SpectralGrid& g_;
  std::vector<double> beta_;
  double eps_;
  LinearSweeper sweeper_;
  std::vector<Mat> At0_;
};

std::vector<int> harmonic_list(int K);

}  // namespace geoptics
