#pragma once

#include "geoptics/corrector.hpp"
#include "geoptics/elliptic_layer.hpp"
#include "geoptics/mode_analysis.hpp"
#include "geoptics/profile_spectral.hpp"
#include "geoptics/resonance_lattice.hpp"
#include "geoptics/singular_reference.hpp"
#include "geoptics/spectral_grid.hpp"

#include <vector>

namespace geoptics {

// Single-phase field  sum_n F_n(x) r e^{i n theta0} e^{i n omega_m x_d / eps}  for a
// list of scalar component fields (nx, nh, 1, nf) attached to (m, k).
struct ComponentRef {
  int m = 0, k = 0;
  const Field* f = nullptr;
};
Field substituted_field(const ModeTable& mt, const SpectralGrid& g, const std::vector<ComponentRef>& comps,
                        double eps);

// U0 at xi_d = x_d / eps: mean plus every built profile, physical Field(nx, nh, N, nf).
Field assemble_leading(const ProfileSet& S, const ModeTable& mt, const SpectralGrid& g, double eps);

struct DecayReport {
  std::vector<double> eps, sup, l2;
  double l2_slope = 0.0;  // least-squares slope of log l2 against log eps
  bool sup_decreasing = false;
};
// E^{s-1} size of the substituted elliptic residual per eps.
DecayReport decay_check(const ModeTable& mt, const SpectralGrid& g, const std::vector<ComponentRef>& R,
                        const std::vector<double>& epsilons);

struct LinearFit {
  double a = 0.0, b = 0.0;  // e(eps) ~ a + b eps
  double residual = 0.0;    // rms of the relative misfit
};
LinearFit fit_affine(const std::vector<double>& eps, const std::vector<double>& err);

double log_slope(const std::vector<double>& x, const std::vector<double>& y);
bool strictly_decreasing(const std::vector<double>& v);

struct PicardDiagnostic {
  int n = 0;
  std::vector<double> err;  // per eps: E^{s-1} of U^n - U0^n - eps U1^n
  LinearFit fit;
  bool decreasing = false;
};

struct ConvergenceOptions {
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  SingularOptions singular;
  CorrectorOptions corrector;
  int picard_levels = 3;  // 0 disables the iterate diagnostic
};

struct ConvergenceReport {
  std::vector<double> eps;
  std::vector<NormReport> error;  // |U_eps - U0_eps| in E^{s-1}
  std::vector<double> linf;       // physical L^inf error
  std::vector<double> norm_U;     // |U_eps| in E^{s-1}
  std::vector<int> iterations;
  std::vector<double> seconds;
  std::vector<double> corrector_amplification;
  std::vector<PicardDiagnostic> picard;
  std::vector<Field> U;           // spectral singular solutions, kept for artifacts
};

// One singular solve at a single eps.  picard_err[n - 1] holds the E^{s-1} size of
// U^n - U0^n - eps U1^n for the first picard_levels iterates (NaN when the solve
// converged before reaching n).
struct EpsilonRun {
  double eps = 0.0;
  SingularResult result;
  std::vector<double> picard_err;
};

// Corrector builders for the kept profile iterates, in iterate order.
std::vector<CorrectorBuilder> iterate_correctors(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                                 const SpectralGrid& g, const HyperbolicResult& prof,
                                                 const ConvergenceOptions& opt);

EpsilonRun solve_epsilon(const SystemSpec& sys, const ModeTable& mt, const SpectralGrid& g, const BoundaryField& G,
                         const HyperbolicResult& prof, const std::vector<CorrectorBuilder>& iterate_cb, double eps,
                         const ConvergenceOptions& opt);

// Error tables from finished runs; runs must be ordered like opt.epsilons.
ConvergenceReport convergence_report(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                     const SpectralGrid& g, const HyperbolicResult& prof,
                                     std::vector<EpsilonRun> runs, const ConvergenceOptions& opt);

// Profiles (and the kept iterates) must already contain their elliptic parts.
ConvergenceReport convergence_study(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                    const SpectralGrid& g, const BoundaryField& G, const HyperbolicResult& prof,
                                    const ConvergenceOptions& opt);

// L^inf over the window of u_eps - u^a_eps, both evaluated at theta0 = beta.x'/eps.
double physical_error(const SpectralGrid& g, const Field& U_spec, const Field& approx_phys,
                      const std::vector<double>& beta, double eps);

}  // namespace geoptics
