#pragma once

#include "geoptics/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace geoptics {

// Quasilinear system sum_j A_j(u) d_j u = Fsrc(u) u on x_d >= 0 with boundary
// rows B(u) u = g.  The state u is the perturbation from a constant base
// state, so every evaluator is centred at u = 0.  Index j runs over
// 0..d where j = 0 is time and j = d is the normal direction.
struct SystemSpec {
  std::string name;
  int N = 0;
  int d = 0;
  int p = 0;
  Vec u0;  // base state in model units, informational

  std::function<Mat(int j, const Vec& u)> A;
  // Directional derivative (dA_j(0) . v); empty means central differences.
  std::function<Mat(int j, const Vec& v)> dA;
  std::function<Mat(const Vec& u)> source;  // Fsrc(u); may be empty (zero)
  std::function<Mat(const Vec& u)> B;       // may be empty (constant B0)
  Mat B0;

  Mat A0(int j) const { return A(j, Vec::Zero(N)); }
  Mat dA0(int j, const Vec& v) const;
  // Normal-form coefficients Atilde_j = A_d^{-1} A_j, F = A_d^{-1} Fsrc.
  Mat At(int j, const Vec& u) const;
  Mat dAt0(int j, const Vec& v) const;
  Mat F(const Vec& u) const;
  Mat F0() const { return F(Vec::Zero(N)); }
  Mat Bu(const Vec& u) const { return B ? B(u) : B0; }
};

struct FrequencyPoint {
  double tau = 0.0;
  double gamma = 0.0;
  std::vector<double> eta;
};

struct EulerParams {
  int d = 2;
  double K = 1.0 / 1.4;
  double gamma_exp = 1.4;
  double rho = 1.0;
  std::vector<double> u;  // length d
};

// Isentropic Euler with pressure p(rho) = K rho^gamma_exp in the variables
// (rho, u_1..u_d); B0 is supplied by the caller.
SystemSpec make_euler(const EulerParams& prm, const Mat& B0);
// Sound speed c with c^2 = p'(rho).
double euler_sound_speed(const EulerParams& prm);
// K chosen so the sound speed at rho equals c.
double euler_K_for_sound_speed(double c, double rho, double gamma_exp);

// Constant-coefficient system with affine coefficients
// A_j(u) = A_j + sum_i u_i dA_j[i], j = 1..d (A_0 = I), constant source F.
SystemSpec make_affine_system(const std::vector<Mat>& A, const std::vector<std::vector<Mat>>& dA,
                              const Mat& Fsrc, const Mat& B0, const std::string& name = "custom");

struct MultiplicityReport {
  int q = 0;
  std::vector<int> multiplicities;
  bool pass = false;
  std::vector<std::vector<double>> eigenvalues;  // per sample, ascending
};

struct Sample {
  Vec u;
  Vec xi;  // length d, spatial frequency
};

// Cluster eigenvalues of sum_{j>=1} xi_j A_j(u) per sample.
MultiplicityReport check_constant_multiplicity(const SystemSpec& sys, const std::vector<Sample>& samples,
                                               double cluster_rel = 1e-8, double rank_rel = 1e-8);

struct NoncharacteristicReport {
  int p = 0;
  int rankB = 0;
  std::vector<double> eigenvalues;  // of A_d(0), ascending
  double cond = 0.0;
  bool pass = false;
};

NoncharacteristicReport check_noncharacteristic(const SystemSpec& sys, double cond_bound = 1e8);

// Basis (N x p, orthonormal columns) of the stable subspace E^s(zeta).
CMat stable_subspace(const SystemSpec& sys, const FrequencyPoint& z, double imag_axis_tol = 1e-8);

// Symbol A(zeta) = -i A_d^{-1} ((tau - i gamma) I + sum eta_j A_j) at u = 0.
CMat symbol_matrix(const SystemSpec& sys, cd tau, const std::vector<cd>& eta);

struct StabilityReport {
  int n_samples = 0;
  int n_used = 0;
  double min_sigma = 0.0;
  FrequencyPoint argmin;
  bool pass = false;
  bool vacuous = false;
};

StabilityReport check_uniform_stability(const SystemSpec& sys, int n_samples, double margin = 1e-3,
                                        double glancing_radius = 1e-2);

// Subspace distance || P1 - P2 ||_2 between orthogonal projectors.
double subspace_distance(const CMat& a, const CMat& b);

}  // namespace geoptics
