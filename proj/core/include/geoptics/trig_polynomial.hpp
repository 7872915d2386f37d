#pragma once

#include "geoptics/common.hpp"
#include "geoptics/mode_analysis.hpp"
#include "geoptics/resonance_lattice.hpp"

#include <map>

namespace geoptics {

// Finite sum  V(x, theta) = sum_alpha V_alpha(x) exp(i alpha . theta)  over
// alpha in Z^{M;2}.  Each coefficient is an N x npts block, so the same type
// covers pointwise algebra (npts = 1) and coefficient fields on a grid.
struct TrigPolynomial {
  int N = 0;
  int M = 0;
  int npts = 1;
  std::map<Alpha, CMat> terms;

  TrigPolynomial() = default;
  TrigPolynomial(int N_, int M_, int npts_ = 1) : N(N_), M(M_), npts(npts_) {}

  void add(const Alpha& a, const CMat& v);
  CMat coeff(const Alpha& a) const;  // zero block when absent
  Alpha zero_alpha() const { return Alpha(M, 0); }
  double max_abs() const;
  TrigPolynomial operator-(const TrigPolynomial& o) const;
  TrigPolynomial operator+(const TrigPolynomial& o) const;
};

Alpha single_phase(int M, int m, int n);
int alpha_sum(const Alpha& a);
cd alpha_dot(const Alpha& a, const std::vector<cd>& omega);

enum class ProjectorPart { All, Hyperbolic, Elliptic };

// E: characteristic terms collapse onto single phases P_m V_alpha e^{i n_alpha theta_m}.
// Hyperbolic keeps the mean and m in I u O, Elliptic keeps only m in P u N.
TrigPolynomial project_E(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt,
                         ProjectorPart part = ProjectorPart::All);
// E-flat: same projections, the multi-phase exponential is kept.
TrigPolynomial project_Eflat(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt);
// E_{m,k} = P_{m,k} E_m, with P_{m,k} v = (l_{m,k} . v) r_{m,k}.
TrigPolynomial project_Emk(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt, int m, int k);

// Throws SpectrumViolation unless every alpha has at most two nonzero entries
// inside the sign lattices.
void check_spectrum(const TrigPolynomial& v, const SpectrumLattice& lat);

// Phi: evaluate at theta = (theta0 + omega_1 xid, ..., theta0 + omega_M xid).
CMat substitute(const TrigPolynomial& v, const std::vector<cd>& omega, const SpectrumLattice& lat, double theta0,
                double xid);

// Symbol of L(d_theta) at alpha: i Ltilde(sum(alpha) beta, alpha . omega).
CMat corrector_symbol(const SystemSpec& sys, const ModeTable& mt, const Alpha& alpha);

// L(d_theta) V applied termwise.
TrigPolynomial apply_L_theta(const SystemSpec& sys, const ModeTable& mt, const TrigPolynomial& v);

}  // namespace geoptics
