#pragma once

#include "geoptics/mode_analysis.hpp"
#include "geoptics/profile_spectral.hpp"
#include "geoptics/spectral_grid.hpp"

#include <functional>
#include <vector>

namespace geoptics {

// Boundary value a and normal derivative b of one elliptic component,
// physical in (t, y) per theta harmonic: Field(1, nh, 1, nf).
struct TracePair {
  Field a, b;
};

struct EllipticOptions {
  double D = 4.0;          // x_d support of the cutoff chi
  double taper = 1.0;      // the extension past T0 is switched off over this length
  double margin = 0.2;     // extra room at both ends of the wave domain
  double residual_tol = 1e-4;  // boundary residual tolerance, relative to max |f| + 1
  bool quadratic = true;
};

struct EllipticReport {
  double energy_drift = 0.0;    // max relative drift of the discrete wave energy
  double support_leak = 0.0;    // max |sigma| over t <= 0
  double boundary_residual = 0.0;
};

TracePair extract_traces(const ProfileSet& S, const ModeTable& mt, const SpectralGrid& g, int m, int k);

// Reflection across the sample index iT reproducing quadratics,
//   f(T + s) = 6 f(T - s) - 8 f(T - 2s) + 3 f(T - 3s),
// then multiplied by 1 - smooth_step(s / taper).  Values left of index 0 count as zero.
void extend_past_T(std::vector<cd>& f, int iT, double h, double taper);

// C^2 cutoff, 1 on [0, D/2] and 0 on [0.9 D, inf).
double cutoff_chi(double x, double D);

// Leapfrog solve of d_x^2 u = d_t^2 u - kappa2 u for x in [0, nsteps hx], with u = a and
// d_x u = bt at x = 0 on a t grid of spacing ht and zero values past both ends.
// The callback sees every row u(., j hx), j = 0..nsteps.  Returns the maximum
// relative drift of the conserved discrete energy.
using WaveRowHook = std::function<void(int step, const std::vector<cd>& row)>;
double wave_solve(const std::vector<cd>& a, const std::vector<cd>& bt, double ht, double hx, double kappa2,
                  int nsteps, const WaveRowHook& hook);

// sigma(t, y, x_d, theta) = chi(x_d) varsigma(t - x_d, y, x_d, theta) on the profile grid,
// where varsigma solves the wave problem with data {a, b + d_t a} extended past T0.
Field build_elliptic_profile(const TracePair& tp, const ModeTable& mt, int m, const SpectralGrid& g,
                             const EllipticOptions& opt, EllipticReport* report = nullptr);

// Fills S.sigma for every elliptic mode from the traces and rhs0 stored in S.
EllipticReport build_elliptic_profiles(ProfileSet& S, const ModeTable& mt, const SpectralGrid& g,
                                       const EllipticOptions& opt);

struct EllipticResidual {
  std::vector<std::vector<Field>> R;  // [m][k] X_phi sigma - f for elliptic modes, physical
  double boundary_max = 0.0;
  double interior_max = 0.0;
};

// X_{phi_p} sigma_{p,l} - f_{p,l}, where f is evaluated on S_prev (the iterate the
// right-hand side was frozen at).  Raises BoundaryResidualNonzero past the tolerance.
EllipticResidual elliptic_residual(const ProfileSolver& solver, const ModeTable& mt, const SpectralGrid& g,
                                   const ProfileSet& S_prev, const ProfileSet& S, const EllipticOptions& opt);

}  // namespace geoptics
