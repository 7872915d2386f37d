#pragma once

#include "geoptics/common.hpp"
#include "geoptics/hyperbolic_system.hpp"

#include <string>
#include <vector>

namespace geoptics {

enum class ModeClass { Incoming, Outgoing, Positive, Negative };

const char* to_string(ModeClass c);
inline bool is_hyperbolic(ModeClass c) { return c == ModeClass::Incoming || c == ModeClass::Outgoing; }
inline bool is_elliptic(ModeClass c) { return !is_hyperbolic(c); }

struct ModeTable {
  int N = 0;
  int d = 0;
  std::vector<double> beta;  // (tau, eta_1..eta_{d-1})
  std::vector<cd> omega;
  std::vector<int> mult;
  std::vector<ModeClass> cls;
  std::vector<CMat> r;  // N x mu_m, columns r_{m,k}
  std::vector<CMat> l;  // mu_m x N, rows l_{m,k}, with l_m r_m = I
  std::vector<CMat> P;  // N x N
  // Group velocity grad lambda_{k_m}(eta, omega_m), length d (hyperbolic modes only).
  std::vector<Vec> v;
  // Coefficients of X_{phi_m} = d_{x_d} + sum_{j<d} kappa_j d_{x_j}, with
  // kappa_j = -d_{xi_j} omega_m; length d (complex for elliptic modes).
  std::vector<CVec> kappa;
  std::vector<int> kmap;  // eigenvalue branch index (ascending order at (eta, omega_m))
  std::vector<double> dlambda_dxid;  // d_{xi_d} lambda_{k_m}, hyperbolic modes

  int M() const { return static_cast<int>(omega.size()); }
  // Mode index paired by conjugation with m (m itself for hyperbolic modes).
  int conjugate_of(int m) const;
};

struct ModeOptions {
  double cluster_rel = 1e-8;
  double rank_rel = 1e-8;
  double real_tol = 1e-9;       // |Im omega| below this (relative) counts as real
  double glancing_tol = 1e-6;   // required |d_{xi_d} lambda|
  int perturbation_samples = 4; // regularity probe
  double perturbation_size = 1e-6;
};

ModeTable compute_modes(const SystemSpec& sys, const std::vector<double>& beta, const ModeOptions& opt = {});

// grad lambda_{k_m}(eta, omega_m); error for elliptic modes.
Vec group_velocity(const ModeTable& mt, int m);

// Finite-difference check helper: lambda_{k}(xi) for the eigenvalue branch k
// (ascending order) of sum_j xi_j A_j(0).
double branch_eigenvalue(const SystemSpec& sys, const Vec& xi, int k);

struct BoundaryBasisReport {
  int n_plus = 0;   // size of I u P
  int n_minus = 0;  // size of I u N
  double cond_plus = 1.0;
  double cond_minus = 1.0;
  double smin_plus = 1.0;
  double smin_minus = 1.0;
  bool pass = false;
};

BoundaryBasisReport boundary_basis_check(const ModeTable& mt, const SystemSpec& sys, double margin = 1e-8);

// Columns r_{m,k} over the modes satisfying pred, in table order.
CMat stack_basis(const ModeTable& mt, bool incoming, bool positive, bool negative, bool outgoing);
// E^s(beta) basis for a regular frequency: sum over I u P.
CMat stable_basis_from_modes(const ModeTable& mt);

// L(dphi_m) = tau I + sum eta_j A_j + omega_m A_d and its normal form.
CMat L_of(const SystemSpec& sys, const std::vector<double>& beta, cd omega);
CMat Ltilde_of(const SystemSpec& sys, const std::vector<double>& beta, cd omega);

}  // namespace geoptics
