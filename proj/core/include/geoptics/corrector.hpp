#pragma once

#include "geoptics/hyperbolic_system.hpp"
#include "geoptics/mode_analysis.hpp"
#include "geoptics/profile_spectral.hpp"
#include "geoptics/resonance_lattice.hpp"
#include "geoptics/spectral_grid.hpp"
#include "geoptics/trig_polynomial.hpp"

#include <map>
#include <vector>

namespace geoptics {

struct CorrectorOptions {
  double cond_cap = 1e12;      // NearSingular past this condition number
  double residual_tol = 1e-9;  // relative tolerance of the round-trip check
  double delta = 0.0;          // truncation tail of the profiles
};

struct CorrectorResult {
  TrigPolynomial V;
  double amplification = 0.0;  // max over used alpha of |V_alpha| / |H_alpha| bound
  double residual = 0.0;       // max |L(d_theta) V - H| relative to 1 + |H|
};

// Solution operator of L(d_theta) at one alpha: the inverse of the symbol when it is
// invertible, otherwise the minimum-norm least-squares pseudo-inverse.
struct AlphaSolve {
  CMat symbol;
  CMat S;
  bool characteristic = false;
  double condition = 1.0;
  double gain = 0.0;  // operator 2-norm of S
};
AlphaSolve alpha_solve(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs, const Alpha& alpha);

// Solves L(d_theta) V = H for H with E-flat H = 0.
CorrectorResult solve_corrector(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                const TrigPolynomial& H, const CorrectorOptions& opt = {});

// Harmonics of each profile that survive truncation with tail below delta.
struct ProfileTruncation {
  std::vector<std::vector<std::vector<char>>> keep;  // [m][k][h]
  double tail = 0.0;
  int kept = 0, total = 0;
  bool keeps(int m, int k, int h) const { return keep[m][k][h] != 0; }
};
ProfileTruncation truncate_to_polynomial(const ProfileSet& S, const SpectralGrid& g, double delta);

// Builds the interior forcing of the corrector slice by slice from a profile set and
// evaluates the corrector on the grid.
class CorrectorBuilder {
 public:
  CorrectorBuilder(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs, const SpectralGrid& g,
                   const ProfileSet& S, const CorrectorOptions& opt = {});

  // L~(d_x) V0 + M(V0) d_theta V0 - F(0) V0 at x_d index ix; blocks are N x nf,
  // physical in (t, y).
  TrigPolynomial interior_H(int ix) const;
  // (I - E-flat) H.
  TrigPolynomial flat_complement(const TrigPolynomial& H) const;
  // V1 solving L(d_theta) V1 = -(I - E-flat) H at ix.
  CorrectorResult corrector_at(int ix) const;
  // U1(x, theta0, x_d / eps) on the grid, physical in (t, y): Field(nx, nh, N, nf).
  // Phases with |sum alpha| > K are dropped.
  Field corrector_field(double eps, double* amplification = nullptr, double* residual = nullptr) const;

  const ProfileTruncation& truncation() const { return trunc_; }

 private:
  const SystemSpec& sys_;
  const ModeTable& mt_;
  const ResonanceSet& rs_;
  const SpectralGrid& g_;
  const ProfileSet& S_;
  CorrectorOptions opt_;
  ProfileTruncation trunc_;
  std::vector<Mat> At_;
  CMat F0_;
  std::map<Alpha, AlphaSolve> solves_;
  std::vector<std::vector<CVec>> Qe_;  // [c][component] Q(e_c, r)
  std::vector<std::vector<CVec>> Qrr_; // [component][component] Q(r1, r2)
  std::vector<int> comp_m_, comp_k_;

  CorrectorResult solve_slice(const TrigPolynomial& Hflat) const;
};

}  // namespace geoptics
