#include "geoptics/hyperbolic_system.hpp"

#include "geoptics/mode_analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace geoptics {

Mat SystemSpec::dA0(int j, const Vec& v) const {
  if (dA) return dA(j, v);
  const double h = 1e-6;
  return (A(j, h * v) - A(j, -h * v)) / (2.0 * h);
}

Mat SystemSpec::At(int j, const Vec& u) const {
  Mat Ad = A(d, u);
  return Ad.lu().solve(A(j, u));
}

Mat SystemSpec::dAt0(int j, const Vec& v) const {
  // d(A_d^{-1} A_j) = A_d^{-1} dA_j - A_d^{-1} dA_d A_d^{-1} A_j
  Mat Ad = A0(d);
  auto lu = Ad.lu();
  Mat dAj = (j == 0) ? Mat::Zero(N, N) : dA0(j, v);
  Mat dAd = dA0(d, v);
  return lu.solve(dAj) - lu.solve(dAd * lu.solve(A0(j)));
}

Mat SystemSpec::F(const Vec& u) const {
  if (!source) return Mat::Zero(N, N);
  return A(d, u).lu().solve(source(u));
}

double euler_sound_speed(const EulerParams& prm) {
  return std::sqrt(prm.K * prm.gamma_exp * std::pow(prm.rho, prm.gamma_exp - 1.0));
}

double euler_K_for_sound_speed(double c, double rho, double gamma_exp) {
  return c * c / (gamma_exp * std::pow(rho, gamma_exp - 1.0));
}

SystemSpec make_euler(const EulerParams& prm, const Mat& B0) {
  const int d = prm.d;
  const int N = d + 1;
  if (static_cast<int>(prm.u.size()) != d)
    fail(ErrorKind::ConfigError, "hyperbolic_system", "Euler base velocity must have d entries");
  if (prm.rho <= 0 || prm.K <= 0 || prm.gamma_exp <= 0)
    fail(ErrorKind::ConfigError, "hyperbolic_system", "Euler parameters must be positive");
  SystemSpec s;
  s.name = "euler" + std::to_string(d) + "d";
  s.N = N;
  s.d = d;
  s.B0 = B0;
  s.p = static_cast<int>(B0.rows());
  s.u0 = Vec(N);
  s.u0(0) = prm.rho;
  for (int i = 0; i < d; ++i) s.u0(i + 1) = prm.u[i];
  const double K = prm.K, g = prm.gamma_exp;
  const Vec base = s.u0;
  auto c2_over_rho = [K, g](double rho) { return K * g * std::pow(rho, g - 2.0); };
  auto dc2_over_rho = [K, g](double rho) { return K * g * (g - 2.0) * std::pow(rho, g - 3.0); };
  s.A = [N, base, c2_over_rho](int j, const Vec& du) -> Mat {
    if (j == 0) return Mat::Identity(N, N);
    Vec w = base + du;
    const double rho = w(0);
    const double uj = w(j);
    Mat M = uj * Mat::Identity(N, N);
    M(0, j) = rho;
    M(j, 0) = c2_over_rho(rho);
    return M;
  };
  s.dA = [N, base, dc2_over_rho](int j, const Vec& v) -> Mat {
    if (j == 0) return Mat::Zero(N, N);
    Mat M = v(j) * Mat::Identity(N, N);
    M(0, j) = v(0);
    M(j, 0) = dc2_over_rho(base(0)) * v(0);
    return M;
  };
  return s;
}

SystemSpec make_affine_system(const std::vector<Mat>& A, const std::vector<std::vector<Mat>>& dA,
                              const Mat& Fsrc, const Mat& B0, const std::string& name) {
  SystemSpec s;
  s.name = name;
  s.d = static_cast<int>(A.size());
  if (s.d < 1) fail(ErrorKind::ConfigError, "hyperbolic_system", "need at least one spatial matrix");
  s.N = static_cast<int>(A[0].rows());
  s.B0 = B0;
  s.p = static_cast<int>(B0.rows());
  s.u0 = Vec::Zero(s.N);
  const int N = s.N;
  for (const auto& a : A)
    if (a.rows() != N || a.cols() != N)
      fail(ErrorKind::ConfigError, "hyperbolic_system", "coefficient matrices must be N x N");
  if (!dA.empty() && dA.size() != A.size())
    fail(ErrorKind::ConfigError, "hyperbolic_system", "dA must list one entry per spatial direction");
  std::vector<Mat> Ac = A;
  std::vector<std::vector<Mat>> dAc = dA;
  s.A = [N, Ac, dAc](int j, const Vec& u) -> Mat {
    if (j == 0) return Mat::Identity(N, N);
    Mat M = Ac[j - 1];
    if (!dAc.empty())
      for (int i = 0; i < N; ++i) M += u(i) * dAc[j - 1][i];
    return M;
  };
  s.dA = [N, dAc](int j, const Vec& v) -> Mat {
    Mat M = Mat::Zero(N, N);
    if (j == 0 || dAc.empty()) return M;
    for (int i = 0; i < N; ++i) M += v(i) * dAc[j - 1][i];
    return M;
  };
  if (Fsrc.size() > 0 && Fsrc.norm() > 0) {
    Mat Fc = Fsrc;
    s.source = [Fc](const Vec&) -> Mat { return Fc; };
  }
  return s;
}

namespace {

struct Cluster {
  double value;
  int mult;
};

std::vector<Cluster> cluster_real(std::vector<double> ev, double tol) {
  std::sort(ev.begin(), ev.end());
  std::vector<Cluster> out;
  for (double e : ev) {
    if (!out.empty() && std::abs(e - out.back().value) <= tol) {
      auto& c = out.back();
      c.value = (c.value * c.mult + e) / (c.mult + 1);
      ++c.mult;
    } else {
      out.push_back({e, 1});
    }
  }
  return out;
}

}  // namespace

MultiplicityReport check_constant_multiplicity(const SystemSpec& sys, const std::vector<Sample>& samples,
                                               double cluster_rel, double rank_rel) {
  MultiplicityReport rep;
  std::vector<int> pattern;
  for (size_t s = 0; s < samples.size(); ++s) {
    const auto& smp = samples[s];
    Mat M = Mat::Zero(sys.N, sys.N);
    for (int j = 1; j <= sys.d; ++j) M += smp.xi(j - 1) * sys.A(j, smp.u);
    Eigen::EigenSolver<Mat> es(M, false);
    std::vector<double> ev;
    double rad = 0.0;
    for (int i = 0; i < sys.N; ++i) {
      ev.push_back(es.eigenvalues()(i).real());
      rad = std::max(rad, std::abs(es.eigenvalues()(i)));
      if (std::abs(es.eigenvalues()(i).imag()) > 1e-8 * std::max(1.0, rad))
        fail(ErrorKind::NotSemisimple, "check-assumptions", "non-real eigenvalue: system not hyperbolic");
    }
    auto cl = cluster_real(ev, cluster_rel * std::max(rad, 1e-300));
    std::vector<int> pat;
    for (const auto& c : cl) {
      CMat shifted = (M - c.value * Mat::Identity(sys.N, sys.N)).cast<cd>();
      int rank = numeric_rank(shifted, rank_rel);
      if (rank != sys.N - c.mult)
        fail(ErrorKind::NotSemisimple, "check-assumptions",
             "eigenvalue " + std::to_string(c.value) + " has geometric multiplicity below algebraic");
      pat.push_back(c.mult);
    }
    std::sort(ev.begin(), ev.end());
    rep.eigenvalues.push_back(ev);
    if (s == 0) {
      pattern = pat;
    } else if (pat != pattern) {
      fail(ErrorKind::MultiplicityDrift, "check-assumptions",
           "multiplicity pattern changes at sample " + std::to_string(s));
    }
  }
  rep.multiplicities = pattern;
  rep.q = static_cast<int>(pattern.size());
  rep.pass = true;
  return rep;
}

NoncharacteristicReport check_noncharacteristic(const SystemSpec& sys, double cond_bound) {
  NoncharacteristicReport rep;
  Mat Ad = sys.A0(sys.d);
  Eigen::JacobiSVD<Mat> svd(Ad);
  const auto& sv = svd.singularValues();
  double smin = sv(sv.size() - 1);
  rep.cond = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (smin <= 1e-12 * std::max(1.0, sv(0)) || rep.cond > cond_bound)
    fail(ErrorKind::CharacteristicBoundary, "check-assumptions", "A_d(0) is singular or ill-conditioned");
  Eigen::EigenSolver<Mat> es(Ad, false);
  for (int i = 0; i < sys.N; ++i) rep.eigenvalues.push_back(es.eigenvalues()(i).real());
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
  rep.p = 0;
  for (double e : rep.eigenvalues)
    if (e > 0) ++rep.p;
  rep.rankB = sys.B0.rows() == 0 ? 0 : numeric_rank(sys.B0.cast<cd>(), 1e-10);
  rep.pass = (rep.rankB == sys.p) && (sys.p == rep.p) && (sys.B0.cols() == sys.N || sys.p == 0);
  return rep;
}

CMat symbol_matrix(const SystemSpec& sys, cd tau, const std::vector<cd>& eta) {
  const int N = sys.N;
  CMat S = tau * CMat::Identity(N, N);
  for (int j = 1; j < sys.d; ++j) S += eta[j - 1] * sys.A0(j).cast<cd>();
  CMat Ad = sys.A0(sys.d).cast<cd>();
  return -kI * Ad.lu().solve(S);
}

namespace {

// Spectral projector onto eigenvalues with negative real part, through the
// Newton iteration for the matrix sign function.
CMat stable_projector(const CMat& A) {
  const int n = static_cast<int>(A.rows());
  CMat X = A;
  for (int it = 0; it < 100; ++it) {
    CMat Xi = X.inverse();
    double nx = X.norm(), ni = Xi.norm();
    double mu = std::sqrt(ni / nx);  // Frobenius scaling speeds up the early steps
    CMat Xn = 0.5 * (mu * X + Xi / mu);
    double diff = (Xn - X).norm() / std::max(1.0, Xn.norm());
    X = Xn;
    if (diff < 1e-14) break;
  }
  return 0.5 * (CMat::Identity(n, n) - X);
}

}  // namespace

CMat stable_subspace(const SystemSpec& sys, const FrequencyPoint& z, double imag_axis_tol) {
  double nrm = z.tau * z.tau + z.gamma * z.gamma;
  for (double e : z.eta) nrm += e * e;
  if (nrm == 0.0) fail(ErrorKind::InvalidInput, "stable_subspace", "zeta = 0 is not in Xi");
  if (z.gamma < 0) fail(ErrorKind::InvalidInput, "stable_subspace", "gamma must be nonnegative");
  if (sys.p == 0) return CMat(sys.N, 0);
  if (z.gamma == 0.0) {
    std::vector<double> beta{z.tau};
    for (double e : z.eta) beta.push_back(e);
    ModeTable mt = compute_modes(sys, beta);
    return orth(stable_basis_from_modes(mt));
  }
  std::vector<cd> eta(z.eta.begin(), z.eta.end());
  CMat A = symbol_matrix(sys, cd(z.tau, -z.gamma), eta);
  Eigen::ComplexEigenSolver<CMat> es(A, false);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int nstable = 0;
  for (int i = 0; i < A.rows(); ++i) {
    double re = es.eigenvalues()(i).real();
    if (std::abs(re) < imag_axis_tol * scale)
      fail(ErrorKind::GlancingOrSingular, "stable_subspace", "eigenvalue on the imaginary axis");
    if (re < 0) ++nstable;
  }
  CMat P = stable_projector(A);
  Eigen::JacobiSVD<CMat> svd(P, Eigen::ComputeThinU);
  CMat basis = svd.matrixU().leftCols(nstable);
  if (nstable != sys.p)
    fail(ErrorKind::GlancingOrSingular, "stable_subspace",
         "stable dimension " + std::to_string(nstable) + " differs from p");
  return basis;
}

double subspace_distance(const CMat& a, const CMat& b) {
  CMat qa = orth(a), qb = orth(b);
  CMat Pa = qa * qa.adjoint();
  CMat Pb = qb * qb.adjoint();
  Eigen::JacobiSVD<CMat> svd(Pa - Pb);
  return svd.singularValues()(0);
}

StabilityReport check_uniform_stability(const SystemSpec& sys, int n_samples, double margin,
                                        double glancing_radius) {
  StabilityReport rep;
  rep.n_samples = n_samples;
  if (sys.p == 0) {
    rep.vacuous = true;
    rep.pass = true;
    rep.min_sigma = 1.0;
    return rep;
  }
  const int dim = sys.d + 1;  // coordinates (tau, eta_1..eta_{d-1}, gamma)
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  rep.min_sigma = std::numeric_limits<double>::infinity();
  CMat B0 = sys.B0.cast<cd>();
  for (int s = 0; s < n_samples; ++s) {
    // Fibonacci-style quasi-uniform points on the half sphere gamma >= 0.
    std::vector<double> x(dim, 0.0);
    double gam = (s + 0.5) / n_samples;  // gamma coordinate in (0, 1)
    double rad = std::sqrt(std::max(0.0, 1.0 - gam * gam));
    if (dim == 2) {
      double ang = kPi * (s % 2 == 0 ? 0.0 : 1.0);
      x[0] = rad * std::cos(ang);
    } else if (dim == 3) {
      double phi = golden * s;
      x[0] = rad * std::cos(phi);
      x[1] = rad * std::sin(phi);
    } else {
      double phi = golden * s, psi = 0.5 * golden * s * s / n_samples;
      x[0] = rad * std::cos(phi) * std::cos(psi);
      x[1] = rad * std::sin(phi) * std::cos(psi);
      x[2] = rad * std::sin(psi);
    }
    FrequencyPoint z;
    z.tau = x[0];
    for (int j = 1; j < sys.d; ++j) z.eta.push_back(x[j]);
    z.gamma = gam;
    if (gam < glancing_radius) z.gamma = 0.0;
    CMat basis;
    try {
      basis = stable_subspace(sys, z);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::GlancingOrSingular || e.kind() == ErrorKind::GlancingMode ||
          e.kind() == ErrorKind::IrregularFrequency)
        continue;
      throw;
    }
    CMat q = orth(basis);
    if (q.cols() != sys.p) continue;
    Eigen::JacobiSVD<CMat> svd(B0 * q);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    ++rep.n_used;
    if (smin < rep.min_sigma) {
      rep.min_sigma = smin;
      rep.argmin = z;
    }
  }
  rep.pass = rep.n_used > 0 && rep.min_sigma > margin;
  if (!rep.pass)
    fail(ErrorKind::StabilityFail, "check-assumptions",
         "uniform Lopatinski margin " + std::to_string(rep.min_sigma) + " at tau=" +
             std::to_string(rep.argmin.tau) + ", gamma=" + std::to_string(rep.argmin.gamma));
  return rep;
}

}  // namespace geoptics
