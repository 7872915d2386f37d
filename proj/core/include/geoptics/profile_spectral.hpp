#pragma once

#include "geoptics/hyperbolic_system.hpp"
#include "geoptics/mode_analysis.hpp"
#include "geoptics/resonance_lattice.hpp"
#include "geoptics/singular_reference.hpp"
#include "geoptics/spectral_grid.hpp"

#include <vector>

namespace geoptics {

// Scalar Fourier series in one phase, coefficients for n = -K..K at index n + K.
using Series = std::vector<cd>;

// Preparation map: keeps the coefficients at multiples of nq.
Series prepare(const Series& f, int nq);

// Prepared interaction integral with Fourier series
//   sum_j f_{j c1} g_{j c2} i (j c2) e^{i j ct theta},
// truncated to harmonics inside the output range |j ct| <= Kout.
Series interaction_integral(const Series& f, const Series& g, int ct, int c1, int c2, int Kout);

// Q(v, w) = sum_{j<d} beta_j (dAt_j(0) . v) w.
CVec quad_form(const SystemSpec& sys, const std::vector<double>& beta, const CVec& v, const CVec& w);

// Interaction of profiles s1 (undifferentiated) and s2 (differentiated)
// landing on target component (target, l) with harmonic pattern (ct, c1, c2).
struct InteractionTerm {
  int target = 0, l = 0;
  int s1 = 0, k1 = 0, s2 = 0, k2 = 0;
  int ct = 0, c1 = 0, c2 = 0;
  cd coef = 0.0;
};

struct ProfileCoefficients {
  std::vector<int> offset;  // global component id = offset[m] + k
  int total = 0;
  std::vector<std::vector<CVec>> a;   // [g][k'] : a_{p,l,k'}(v) = a . v
  std::vector<CMat> b;                // [g] mu_p x mu_p
  std::vector<CVec> e;                // [g] length mu_p
  std::vector<std::vector<CVec>> R;   // [m][k * mu_m + k'] mean-equation vectors
  std::vector<InteractionTerm> inter;
  int mode_of(int g) const;
};

ProfileCoefficients profile_coefficients(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs);

// Boundary coupling of the profile traces.  For n > 0 the unknowns are the
// components of I u P, for n < 0 those of I u N; outgoing traces are data.
class BoundaryTraceSolver {
 public:
  BoundaryTraceSolver(const ModeTable& mt, const Mat& B0, const ProfileCoefficients& pc);
  // values[g] holds all component traces; unknown entries are overwritten.
  void solve(int n, const CVec& Gn, std::vector<cd>& values) const;
  // B0 sum_m sigma_{m,k,n} r_{m,k} over the modes present at harmonic sign n.
  CVec apply(int n, const std::vector<cd>& values) const;
  double condition(int sign) const { return sign > 0 ? cond_plus_ : cond_minus_; }

 private:
  const ModeTable& mt_;
  const ProfileCoefficients& pc_;
  CMat B0_;
  std::vector<int> plus_, minus_, out_;  // global component ids
  CMat inv_plus_, inv_minus_;
  double cond_plus_ = 1.0, cond_minus_ = 1.0;
};

// Profiles on the grid, physical in (t, y) and Fourier in theta_m.
struct ProfileSet {
  int M = 0;
  int N = 0;
  Field vbar;                                // (nx, 1, N, nf)
  std::vector<std::vector<Field>> sigma;     // [m][k] (nx, nh, 1, nf); empty until built
  std::vector<std::vector<Field>> trace;     // [m][k] (1, nh, 1, nf), x_d = 0 values
  std::vector<std::vector<Field>> rhs0;      // [m][k] elliptic right-hand side at x_d = 0
  int iteration = 0;
  bool has(int m) const { return !sigma[m].empty() && sigma[m][0].nx > 0; }
};

struct HyperbolicOptions {
  double tol = 1e-8;
  int max_iter = 50;
  int keep_iterates = 3;
  bool quadratic = true;  // false drops the a, b, J and mean terms (linear runs)
};

struct HyperbolicResult {
  ProfileSet profiles;
  std::vector<ProfileSet> iterates;  // n = 1..keep_iterates
  std::vector<double> increments;
  int iterations = 0;
};

class ProfileSolver {
 public:
  ProfileSolver(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs, const SpectralGrid& g);

  HyperbolicResult picard_solve_hyperbolic(const BoundaryField& G, const HyperbolicOptions& opt) const;

  // Right-hand side f_{p,l} of X_phi sigma_{p,l} = f_{p,l} built from S at one
  // x_d index; out is (nh x nf) physical, multiplied by the source cutoff.
  void component_rhs(const ProfileSet& S, int ix, int g, bool quadratic, std::vector<cd>& out) const;
  // Mean-equation right-hand side at ix (N x nf physical).
  void mean_rhs(const ProfileSet& S, int ix, bool quadratic, std::vector<cd>& out) const;

  const ProfileCoefficients& coefficients() const { return pc_; }
  const BoundaryTraceSolver& boundary() const { return bts_; }
  cd transport_rate(int m, int f) const;  // mu = -(kappa_0 dt + kappa_1 dy) symbol

 private:
  const SystemSpec& sys_;
  const ModeTable& mt_;
  const ResonanceSet& rs_;
  const SpectralGrid& g_;
  ProfileCoefficients pc_;
  BoundaryTraceSolver bts_;
  LinearSweeper mean_sweeper_;

  // sigma value of component (m,k) at (ix, h, f); elliptic modes read the trace at ix = 0.
  const cd* sigma_ptr(const ProfileSet& S, int m, int k, int ix, int h) const;
  void sweep(const Field& src_spec, int m, const std::vector<cd>* trace_spec, Field& out_spec) const;
};

ProfileSet empty_profile_set(const ModeTable& mt, const SpectralGrid& g, int N);

}  // namespace geoptics
