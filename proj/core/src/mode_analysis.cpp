#include "geoptics/mode_analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace geoptics {

const char* to_string(ModeClass c) {
  switch (c) {
    case ModeClass::Incoming: return "I";
    case ModeClass::Outgoing: return "O";
    case ModeClass::Positive: return "P";
    case ModeClass::Negative: return "N";
  }
  return "?";
}

int ModeTable::conjugate_of(int m) const {
  if (is_hyperbolic(cls[m])) return m;
  double best = 1e300;
  int arg = -1;
  for (int k = 0; k < M(); ++k) {
    if (k == m || cls[k] == cls[m] || is_hyperbolic(cls[k])) continue;
    double dist = std::abs(omega[k] - std::conj(omega[m]));
    if (dist < best) {
      best = dist;
      arg = k;
    }
  }
  return arg;
}

CMat L_of(const SystemSpec& sys, const std::vector<double>& beta, cd omega) {
  const int N = sys.N;
  CMat L = beta[0] * CMat::Identity(N, N);
  for (int j = 1; j < sys.d; ++j) L += beta[j] * sys.A0(j).cast<cd>();
  L += omega * sys.A0(sys.d).cast<cd>();
  return L;
}

CMat Ltilde_of(const SystemSpec& sys, const std::vector<double>& beta, cd omega) {
  CMat Ad = sys.A0(sys.d).cast<cd>();
  return Ad.lu().solve(L_of(sys, beta, omega));
}

namespace {

Mat pencil_matrix(const SystemSpec& sys, const std::vector<double>& beta) {
  const int N = sys.N;
  Mat S = beta[0] * Mat::Identity(N, N);
  for (int j = 1; j < sys.d; ++j) S += beta[j] * sys.A0(j);
  return -sys.A0(sys.d).lu().solve(S);
}

struct ECluster {
  cd value;
  int mult;
};

std::vector<ECluster> cluster_complex(const Eigen::VectorXcd& ev, double tol) {
  std::vector<cd> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](cd a, cd b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<ECluster> out;
  std::vector<bool> used(v.size(), false);
  for (size_t i = 0; i < v.size(); ++i) {
    if (used[i]) continue;
    cd sum = v[i];
    int cnt = 1;
    used[i] = true;
    for (size_t k = i + 1; k < v.size(); ++k) {
      if (!used[k] && std::abs(v[k] - v[i]) <= tol) {
        used[k] = true;
        sum += v[k];
        ++cnt;
      }
    }
    out.push_back({sum / double(cnt), cnt});
  }
  return out;
}

std::vector<std::pair<int, bool>> signature(const SystemSpec& sys, const std::vector<double>& beta,
                                            const ModeOptions& opt) {
  Mat M = pencil_matrix(sys, beta);
  Eigen::EigenSolver<Mat> es(M, false);
  double rad = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  auto cl = cluster_complex(es.eigenvalues(), opt.cluster_rel * rad);
  std::vector<std::pair<int, bool>> sig;
  for (const auto& c : cl) sig.push_back({c.mult, std::abs(c.value.imag()) <= opt.real_tol * rad});
  std::sort(sig.begin(), sig.end());
  return sig;
}

}  // namespace

double branch_eigenvalue(const SystemSpec& sys, const Vec& xi, int k) {
  Mat A = Mat::Zero(sys.N, sys.N);
  for (int j = 1; j <= sys.d; ++j) A += xi(j - 1) * sys.A0(j);
  Eigen::EigenSolver<Mat> es(A, false);
  std::vector<double> ev;
  for (int i = 0; i < sys.N; ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.begin(), ev.end());
  // Collapse clusters so the branch index counts distinct eigenvalues.
  std::vector<double> distinct;
  double scale = 1.0;
  for (double e : ev) scale = std::max(scale, std::abs(e));
  for (double e : ev)
    if (distinct.empty() || std::abs(e - distinct.back()) > 1e-8 * scale) distinct.push_back(e);
  return distinct.at(k);
}

ModeTable compute_modes(const SystemSpec& sys, const std::vector<double>& beta, const ModeOptions& opt) {
  const int N = sys.N, d = sys.d;
  const std::string stage = "analyze-modes";
  if (static_cast<int>(beta.size()) != d) fail(ErrorKind::InvalidInput, stage, "beta must have d entries");
  double bn = 0.0;
  for (double b : beta) bn += b * b;
  if (bn == 0.0) fail(ErrorKind::InvalidInput, stage, "beta must be nonzero");

  Mat M = pencil_matrix(sys, beta);
  Eigen::EigenSolver<Mat> es(M, false);
  const double rad = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  auto clusters = cluster_complex(es.eigenvalues(), opt.cluster_rel * std::max(rad, 1.0));

  ModeTable mt;
  mt.N = N;
  mt.d = d;
  mt.beta = beta;
  CMat Mc = M.cast<cd>();
  Mat Ad = sys.A0(d);
  auto Adlu = Ad.lu();

  for (const auto& c : clusters) {
    cd w = c.value;
    if (std::abs(w.imag()) <= opt.real_tol * std::max(rad, 1.0)) w = cd(w.real(), 0.0);
    CMat shifted = Mc - w * CMat::Identity(N, N);
    int rank = numeric_rank(shifted, opt.rank_rel);
    if (rank != N - c.mult)
      fail(ErrorKind::NotSemisimple, stage, "omega=" + std::to_string(w.real()) + " is not semisimple");
    mt.omega.push_back(w);
    mt.mult.push_back(c.mult);
    bool real = w.imag() == 0.0;
    CMat rb = null_space(shifted, c.mult);
    CMat r = real ? CMat(canonical_real_basis(rb).cast<cd>()) : canonical_basis(rb);
    CMat lb = null_space(shifted.transpose(), c.mult);  // columns are l^T
    CMat lrows = lb.transpose();
    if (real) lrows = canonical_real_basis(lb).transpose().cast<cd>();
    CMat G = lrows * r;
    lrows = G.lu().solve(lrows);
    mt.r.push_back(r);
    mt.l.push_back(lrows);
    mt.P.push_back(r * lrows);
    if (real)
      mt.cls.push_back(ModeClass::Incoming);  // fixed below
    else
      mt.cls.push_back(w.imag() > 0 ? ModeClass::Positive : ModeClass::Negative);
  }

  // Conjugate pairing: N-modes take the conjugated P-mode bases.
  for (int m = 0; m < mt.M(); ++m) {
    if (mt.cls[m] != ModeClass::Negative) continue;
    int k = mt.conjugate_of(m);
    if (k < 0 || std::abs(mt.omega[k] - std::conj(mt.omega[m])) > 1e-8 * std::max(1.0, rad))
      fail(ErrorKind::IrregularFrequency, stage, "elliptic mode without conjugate partner");
    mt.omega[m] = std::conj(mt.omega[k]);
    mt.r[m] = mt.r[k].conjugate();
    mt.l[m] = mt.l[k].conjugate();
    mt.P[m] = mt.r[m] * mt.l[m];
  }

  const int M_ = mt.M();
  mt.v.assign(M_, Vec());
  mt.kappa.assign(M_, CVec());
  mt.kmap.assign(M_, -1);
  mt.dlambda_dxid.assign(M_, 0.0);
  for (int m = 0; m < M_; ++m) {
    const CMat& r = mt.r[m];
    const CMat& l = mt.l[m];
    const double mu = mt.mult[m];
    CVec kap(d);
    for (int j = 0; j < d; ++j) {
      CMat Atj = Adlu.solve(sys.A0(j)).cast<cd>();
      kap(j) = (l * Atj * r).trace() / mu;
    }
    mt.kappa[m] = kap;
    if (mt.omega[m].imag() != 0.0) continue;
    // Left eigenvectors of A(xi) at lambda = -tau are l A_d^{-1}.
    CMat lt = l * Adlu.solve(Mat::Identity(N, N)).cast<cd>();
    CMat G = lt * r;
    auto Glu = G.lu();
    Vec vel(d);
    for (int j = 1; j <= d; ++j) vel(j - 1) = (Glu.solve(lt * sys.A0(j).cast<cd>() * r)).trace().real() / mu;
    mt.v[m] = vel;
    double dl = vel(d - 1);
    mt.dlambda_dxid[m] = dl;
    if (std::abs(dl) <= opt.glancing_tol)
      fail(ErrorKind::GlancingMode, stage, "mode " + std::to_string(m) + " is glancing");
    mt.cls[m] = dl > 0 ? ModeClass::Incoming : ModeClass::Outgoing;
    // Branch index: position of -tau among the distinct eigenvalues at (eta, omega).
    Vec xi(d);
    for (int j = 1; j < d; ++j) xi(j - 1) = beta[j];
    xi(d - 1) = mt.omega[m].real();
    Mat A = Mat::Zero(N, N);
    for (int j = 1; j <= d; ++j) A += xi(j - 1) * sys.A0(j);
    Eigen::EigenSolver<Mat> esA(A, false);
    std::vector<double> ev;
    for (int i = 0; i < N; ++i) ev.push_back(esA.eigenvalues()(i).real());
    std::sort(ev.begin(), ev.end());
    double sc = 1.0;
    for (double e : ev) sc = std::max(sc, std::abs(e));
    std::vector<double> distinct;
    for (double e : ev)
      if (distinct.empty() || std::abs(e - distinct.back()) > 1e-8 * sc) distinct.push_back(e);
    for (size_t k = 0; k < distinct.size(); ++k)
      if (std::abs(distinct[k] + beta[0]) <= 1e-8 * sc) mt.kmap[m] = static_cast<int>(k);
  }

  // Regularity probe: the multiplicity / reality signature must not change
  // under small perturbations of beta.
  if (opt.perturbation_samples > 0) {
    auto sig0 = signature(sys, beta, opt);
    const double bnorm = std::sqrt(bn);
    for (int s = 0; s < opt.perturbation_samples; ++s) {
      std::vector<double> bp = beta;
      for (int j = 0; j < d; ++j) {
        double dir = std::cos(1.7 * (s + 1) * (j + 1) + 0.3 * s);
        bp[j] += opt.perturbation_size * bnorm * dir;
      }
      if (signature(sys, bp, opt) != sig0)
        fail(ErrorKind::IrregularFrequency, stage, "multiplicity pattern not locally constant near beta");
    }
  }
  return mt;
}

Vec group_velocity(const ModeTable& mt, int m) {
  if (m < 0 || m >= mt.M()) fail(ErrorKind::InvalidInput, "group_velocity", "mode index out of range");
  if (!is_hyperbolic(mt.cls[m]))
    fail(ErrorKind::NotHyperbolicMode, "group_velocity", "mode " + std::to_string(m) + " is elliptic");
  return mt.v[m];
}

CMat stack_basis(const ModeTable& mt, bool incoming, bool positive, bool negative, bool outgoing) {
  std::vector<CVec> cols;
  for (int m = 0; m < mt.M(); ++m) {
    bool take = (mt.cls[m] == ModeClass::Incoming && incoming) || (mt.cls[m] == ModeClass::Positive && positive) ||
                (mt.cls[m] == ModeClass::Negative && negative) || (mt.cls[m] == ModeClass::Outgoing && outgoing);
    if (!take) continue;
    for (int k = 0; k < mt.mult[m]; ++k) cols.push_back(mt.r[m].col(k));
  }
  CMat out(mt.N, static_cast<int>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) out.col(c) = cols[c];
  return out;
}

CMat stable_basis_from_modes(const ModeTable& mt) { return stack_basis(mt, true, true, false, false); }

BoundaryBasisReport boundary_basis_check(const ModeTable& mt, const SystemSpec& sys, double margin) {
  BoundaryBasisReport rep;
  CMat plus = stack_basis(mt, true, true, false, false);
  CMat minus = stack_basis(mt, true, false, true, false);
  rep.n_plus = static_cast<int>(plus.cols());
  rep.n_minus = static_cast<int>(minus.cols());
  if (sys.p == 0) {
    rep.pass = rep.n_plus == 0 && rep.n_minus == 0;
    if (!rep.pass) fail(ErrorKind::DegenerateBasis, "analyze-modes", "p = 0 but incoming/elliptic modes exist");
    return rep;
  }
  if (rep.n_plus != sys.p || rep.n_minus != sys.p)
    fail(ErrorKind::DegenerateBasis, "analyze-modes", "boundary basis size differs from p");
  CMat B = sys.B0.cast<cd>();
  auto cond = [&](const CMat& basis, double& smin) {
    Eigen::JacobiSVD<CMat> svd(B * basis);
    const auto& s = svd.singularValues();
    smin = s(s.size() - 1);
    return smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  };
  rep.cond_plus = cond(plus, rep.smin_plus);
  rep.cond_minus = cond(minus, rep.smin_minus);
  rep.pass = rep.smin_plus > margin && rep.smin_minus > margin;
  if (!rep.pass) fail(ErrorKind::DegenerateBasis, "analyze-modes", "B(0) r_{m,k} do not form a basis");
  return rep;
}

}  // namespace geoptics
