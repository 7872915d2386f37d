#include "geoptics/profile_spectral.hpp"

#include <algorithm>
#include <cmath>

namespace geoptics {

Series prepare(const Series& f, int nq) {
  if (nq == 0) fail(ErrorKind::InvalidInput, "prepare", "n_q must be nonzero");
  const int K = (static_cast<int>(f.size()) - 1) / 2;
  Series out(f.size(), cd(0.0));
  for (int n = -K; n <= K; ++n)
    if (n % nq == 0) out[n + K] = f[n + K];
  return out;
}

Series interaction_integral(const Series& f, const Series& g, int ct, int c1, int c2, int Kout) {
  if (ct == 0 || c1 == 0 || c2 == 0) fail(ErrorKind::InvalidInput, "interaction", "harmonic pattern has a zero");
  const int Kf = (static_cast<int>(f.size()) - 1) / 2;
  const int Kg = (static_cast<int>(g.size()) - 1) / 2;
  Series out(2 * Kout + 1, cd(0.0));
  const int jmax = std::max({Kf, Kg, Kout});
  for (int j = -jmax; j <= jmax; ++j) {
    if (j == 0) continue;
    const int a = j * c1, b = j * c2, t = j * ct;
    if (std::abs(a) > Kf || std::abs(b) > Kg || std::abs(t) > Kout) continue;
    out[t + Kout] += f[a + Kf] * g[b + Kg] * (kI * double(b));
  }
  return out;
}

CVec quad_form(const SystemSpec& sys, const std::vector<double>& beta, const CVec& v, const CVec& w) {
  const Vec vr = v.real(), vi = v.imag();
  CVec out = CVec::Zero(sys.N);
  for (int j = 0; j < sys.d; ++j) {
    if (beta[j] == 0.0) continue;
    CMat D = sys.dAt0(j, vr).cast<cd>() + kI * sys.dAt0(j, vi).cast<cd>();
    out += beta[j] * (D * w);
  }
  return out;
}

int ProfileCoefficients::mode_of(int g) const {
  int m = 0;
  while (m + 1 < static_cast<int>(offset.size()) && offset[m + 1] <= g) ++m;
  return m;
}

ProfileCoefficients profile_coefficients(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs) {
  ProfileCoefficients pc;
  const int M = mt.M(), N = sys.N;
  for (int m = 0; m < M; ++m) {
    pc.offset.push_back(pc.total);
    pc.total += mt.mult[m];
  }
  const CMat F0 = sys.F0().cast<cd>();
  pc.a.resize(pc.total);
  pc.b.resize(pc.total);
  pc.e.resize(pc.total);
  for (int p = 0; p < M; ++p)
    for (int l = 0; l < mt.mult[p]; ++l) {
      const int g = pc.offset[p] + l;
      const CVec ell = mt.l[p].row(l).transpose();
      pc.a[g].resize(mt.mult[p]);
      pc.b[g] = CMat::Zero(mt.mult[p], mt.mult[p]);
      pc.e[g] = CVec::Zero(mt.mult[p]);
      for (int k2 = 0; k2 < mt.mult[p]; ++k2) {
        const CVec r2 = mt.r[p].col(k2);
        pc.a[g][k2] = CVec::Zero(N);
        for (int c = 0; c < N; ++c) {
          CVec ec = CVec::Zero(N);
          ec(c) = 1.0;
          pc.a[g][k2](c) = (ell.transpose() * quad_form(sys, mt.beta, ec, r2))(0);
        }
        for (int k1 = 0; k1 < mt.mult[p]; ++k1)
          pc.b[g](k1, k2) = (ell.transpose() * quad_form(sys, mt.beta, mt.r[p].col(k1), r2))(0);
        pc.e[g](k2) = (ell.transpose() * F0 * r2)(0);
      }
    }
  pc.R.resize(M);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < mt.mult[m]; ++k)
      for (int k2 = 0; k2 < mt.mult[m]; ++k2)
        pc.R[m].push_back(quad_form(sys, mt.beta, mt.r[m].col(k), mt.r[m].col(k2)));

  auto add_terms = [&](int t, int ct, int sa, int ca, int sb, int cb) {
    for (int l = 0; l < mt.mult[t]; ++l) {
      const CVec ell = mt.l[t].row(l).transpose();
      for (int ka = 0; ka < mt.mult[sa]; ++ka)
        for (int kb = 0; kb < mt.mult[sb]; ++kb) {
          InteractionTerm x;
          x.target = t;
          x.l = l;
          x.ct = ct;
          x.s1 = sa;
          x.k1 = ka;
          x.c1 = ca;
          x.s2 = sb;
          x.k2 = kb;
          x.c2 = cb;
          x.coef = (ell.transpose() * quad_form(sys, mt.beta, mt.r[sa].col(ka), mt.r[sb].col(kb)))(0);
          pc.inter.push_back(x);
          InteractionTerm y = x;
          y.s1 = sb;
          y.k1 = kb;
          y.c1 = cb;
          y.s2 = sa;
          y.k2 = ka;
          y.c2 = ca;
          y.coef = (ell.transpose() * quad_form(sys, mt.beta, mt.r[sb].col(kb), mt.r[sa].col(ka)))(0);
          pc.inter.push_back(y);
        }
    }
  };
  for (const auto& t : rs.triples) {
    add_terms(t.p, t.np, t.q, t.nq, t.r, t.nr);
    add_terms(t.q, t.nq, t.p, t.np, t.r, -t.nr);
    add_terms(t.r, t.nr, t.p, t.np, t.q, -t.nq);
  }
  return pc;
}

BoundaryTraceSolver::BoundaryTraceSolver(const ModeTable& mt, const Mat& B0, const ProfileCoefficients& pc)
    : mt_(mt), pc_(pc), B0_(B0.cast<cd>()) {
  for (int m = 0; m < mt.M(); ++m)
    for (int k = 0; k < mt.mult[m]; ++k) {
      const int g = pc.offset[m] + k;
      switch (mt.cls[m]) {
        case ModeClass::Incoming:
          plus_.push_back(g);
          minus_.push_back(g);
          break;
        case ModeClass::Positive: plus_.push_back(g); break;
        case ModeClass::Negative: minus_.push_back(g); break;
        case ModeClass::Outgoing: out_.push_back(g); break;
      }
    }
  const int p = static_cast<int>(B0.rows());
  auto build = [&](const std::vector<int>& ids, CMat& inv, double& cond) {
    if (static_cast<int>(ids.size()) != p)
      fail(ErrorKind::DegenerateBasis, "boundary", "boundary basis size differs from p");
    if (p == 0) return;
    CMat Bm(p, p);
    for (int i = 0; i < p; ++i) {
      const int m = pc.mode_of(ids[i]);
      Bm.col(i) = B0_ * mt.r[m].col(ids[i] - pc.offset[m]);
    }
    Eigen::JacobiSVD<CMat> svd(Bm);
    const auto& s = svd.singularValues();
    if (s(p - 1) < 1e-10 * std::max(1.0, s(0))) fail(ErrorKind::DegenerateBasis, "boundary", "singular basis");
    cond = s(0) / s(p - 1);
    inv = Bm.inverse();
  };
  build(plus_, inv_plus_, cond_plus_);
  build(minus_, inv_minus_, cond_minus_);
}

void BoundaryTraceSolver::solve(int n, const CVec& Gn, std::vector<cd>& values) const {
  if (n == 0) fail(ErrorKind::InvalidInput, "boundary", "mean part is handled by the mean equation");
  const int p = static_cast<int>(B0_.rows());
  const auto& ids = n > 0 ? plus_ : minus_;
  const auto& inv = n > 0 ? inv_plus_ : inv_minus_;
  for (int g : (n > 0 ? minus_ : plus_))
    if (std::find(ids.begin(), ids.end(), g) == ids.end()) values[g] = 0.0;
  if (p == 0) return;
  CVec rhs = Gn;
  for (int g : out_) {
    const int m = pc_.mode_of(g);
    rhs -= B0_ * mt_.r[m].col(g - pc_.offset[m]) * values[g];
  }
  const CVec s = inv * rhs;
  for (int i = 0; i < p; ++i) values[ids[i]] = s(i);
}

CVec BoundaryTraceSolver::apply(int n, const std::vector<cd>& values) const {
  CVec v = CVec::Zero(mt_.N);
  for (int m = 0; m < mt_.M(); ++m) {
    if (mt_.cls[m] == ModeClass::Positive && n < 0) continue;
    if (mt_.cls[m] == ModeClass::Negative && n > 0) continue;
    for (int k = 0; k < mt_.mult[m]; ++k) v += mt_.r[m].col(k) * values[pc_.offset[m] + k];
  }
  return B0_ * v;
}

ProfileSet empty_profile_set(const ModeTable& mt, const SpectralGrid& g, int N) {
  ProfileSet S;
  S.M = mt.M();
  S.N = N;
  S.vbar = Field(g.nx(), 1, N, g.nf());
  S.sigma.resize(S.M);
  S.trace.resize(S.M);
  S.rhs0.resize(S.M);
  for (int m = 0; m < S.M; ++m)
    for (int k = 0; k < mt.mult[m]; ++k) {
      S.sigma[m].push_back(is_hyperbolic(mt.cls[m]) ? Field(g.nx(), g.nh(), 1, g.nf()) : Field());
      S.trace[m].emplace_back(1, g.nh(), 1, g.nf());
      S.rhs0[m].emplace_back(1, g.nh(), 1, g.nf());
    }
  return S;
}

ProfileSolver::ProfileSolver(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                             const SpectralGrid& g)
    : sys_(sys),
      mt_(mt),
      rs_(rs),
      g_(g),
      pc_(profile_coefficients(sys, mt, rs)),
      bts_(mt, sys.B0, pc_),
      mean_sweeper_(sys, g, mt.beta, 1.0, std::vector<int>{0}) {
  for (int m = 0; m < mt.M(); ++m) {
    if (!is_hyperbolic(mt.cls[m])) continue;
    const double k0 = mt.kappa[m](0).real();
    if ((mt.cls[m] == ModeClass::Incoming) != (k0 > 0.0))
      fail(ErrorKind::ClassificationContradiction, "solve-profiles", "transport direction disagrees with class");
  }
}

cd ProfileSolver::transport_rate(int m, int f) const {
  cd mu = -mt_.kappa[m](0) * g_.dt_symbol(f);
  if (sys_.d > 1) mu -= mt_.kappa[m](1) * g_.dy_symbol(f);
  return mu;
}

const cd* ProfileSolver::sigma_ptr(const ProfileSet& S, int m, int k, int ix, int h) const {
  if (S.has(m)) return S.sigma[m][k].at(ix, h, 0);
  if (ix == 0 && !S.trace[m].empty() && S.trace[m][k].nx > 0) return S.trace[m][k].at(0, h, 0);
  return nullptr;
}

void ProfileSolver::component_rhs(const ProfileSet& S, int ix, int g, bool quadratic, std::vector<cd>& out) const {
  const int nf = g_.nf(), nh = g_.nh(), K = g_.K(), N = sys_.N;
  const int p = pc_.mode_of(g), l = g - pc_.offset[p];
  out.assign(static_cast<size_t>(nh) * nf, cd(0.0));
  const SpectrumLattice lat = make_lattice(mt_, K);
  auto allowed = [&](int n) { return n != 0 && lat.contains(p, n); };
  // Linear source term.
  for (int k = 0; k < mt_.mult[p]; ++k) {
    const cd e = pc_.e[g](k);
    if (e == cd(0.0)) continue;
    for (int h = 0; h < nh; ++h) {
      if (!allowed(h - K)) continue;
      const cd* s = sigma_ptr(S, p, k, ix, h);
      if (!s) continue;
      for (int f = 0; f < nf; ++f) out[h * nf + f] += e * s[f];
    }
  }
  if (quadratic) {
    // Coupling to the mean.
    for (int k2 = 0; k2 < mt_.mult[p]; ++k2) {
      const CVec& a = pc_.a[g][k2];
      for (int f = 0; f < nf; ++f) {
        cd av = 0.0;
        for (int c = 0; c < N; ++c) av += a(c) * S.vbar.at(ix, 0, c)[f];
        if (av == cd(0.0)) continue;
        for (int h = 0; h < nh; ++h) {
          if (!allowed(h - K)) continue;
          const cd* s = sigma_ptr(S, p, k2, ix, h);
          if (s) out[h * nf + f] -= av * (kI * double(h - K)) * s[f];
        }
      }
    }
    // Self-interaction, truncated convolution without the mean.
    for (int k1 = 0; k1 < mt_.mult[p]; ++k1)
      for (int k2 = 0; k2 < mt_.mult[p]; ++k2) {
        const cd b = pc_.b[g](k1, k2);
        if (b == cd(0.0)) continue;
        for (int n1 = -K; n1 <= K; ++n1)
          for (int n2 = -K; n2 <= K; ++n2) {
            const int n = n1 + n2;
            if (std::abs(n) > K || !allowed(n)) continue;
            const cd* s1 = sigma_ptr(S, p, k1, ix, n1 + K);
            const cd* s2 = sigma_ptr(S, p, k2, ix, n2 + K);
            if (!s1 || !s2) continue;
            const cd c = b * kI * double(n2);
            for (int f = 0; f < nf; ++f) out[(n + K) * nf + f] -= c * s1[f] * s2[f];
          }
      }
    // Resonant interactions.
    for (const auto& t : pc_.inter) {
      if (t.target != p || t.l != l || t.coef == cd(0.0)) continue;
      for (int j = -K; j <= K; ++j) {
        if (j == 0) continue;
        const int nt = j * t.ct, n1 = j * t.c1, n2 = j * t.c2;
        if (std::abs(nt) > K || std::abs(n1) > K || std::abs(n2) > K || !allowed(nt)) continue;
        const cd* s1 = sigma_ptr(S, t.s1, t.k1, ix, n1 + K);
        const cd* s2 = sigma_ptr(S, t.s2, t.k2, ix, n2 + K);
        if (!s1 || !s2) continue;
        const cd c = t.coef * kI * double(n2);
        for (int f = 0; f < nf; ++f) out[(nt + K) * nf + f] -= c * s1[f] * s2[f];
      }
    }
  }
  for (int f = 0; f < nf; ++f) {
    const double cut = g_.source_cutoff(g_.t(g_.it_of(f)));
    for (int h = 0; h < nh; ++h) out[h * nf + f] *= cut;
  }
}

void ProfileSolver::mean_rhs(const ProfileSet& S, int ix, bool quadratic, std::vector<cd>& out) const {
  const int nf = g_.nf(), K = g_.K(), N = sys_.N;
  out.assign(static_cast<size_t>(N) * nf, cd(0.0));
  const Mat F0 = sys_.F0();
  for (int f = 0; f < nf; ++f)
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c)
        if (F0(r, c) != 0.0) out[r * nf + f] += F0(r, c) * S.vbar.at(ix, 0, c)[f];
  if (quadratic) {
    for (int m = 0; m < mt_.M(); ++m) {
      if (!is_hyperbolic(mt_.cls[m])) continue;
      const int mu = mt_.mult[m];
      for (int k1 = 0; k1 < mu; ++k1)
        for (int k2 = 0; k2 < mu; ++k2) {
          const CVec& R = pc_.R[m][k1 * mu + k2];
          for (int n = -K; n <= K; ++n) {
            if (n == 0) continue;
            const cd* a = sigma_ptr(S, m, k1, ix, -n + K);
            const cd* b = sigma_ptr(S, m, k2, ix, n + K);
            if (!a || !b) continue;
            for (int f = 0; f < nf; ++f) {
              const cd mv = a[f] * (kI * double(n)) * b[f];
              for (int r = 0; r < N; ++r) out[r * nf + f] -= R(r) * mv;
            }
          }
        }
    }
  }
  for (int f = 0; f < nf; ++f) {
    const double cut = g_.source_cutoff(g_.t(g_.it_of(f)));
    for (int r = 0; r < N; ++r) out[r * nf + f] *= cut;
  }
}

void ProfileSolver::sweep(const Field& src, int m, const std::vector<cd>* trace_spec, Field& out) const {
  const int nf = g_.nf(), nh = g_.nh(), nx = g_.nx();
  const double h = g_.spec().dx;
  const bool forward = mt_.cls[m] == ModeClass::Incoming;
  out = Field(nx, nh, 1, nf);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < nf; ++f) {
    const cd mu = transport_rate(m, f);
    const cd z = forward ? mu * h : -mu * h;
    const cd E = std::exp(z), P1 = h * phi1(z), P2 = h * phi2(z);
    for (int hi = 0; hi < nh; ++hi) {
      if (forward) {
        cd w = trace_spec ? (*trace_spec)[hi * nf + f] : cd(0.0);
        out.at(0, hi, 0)[f] = w;
        for (int ix = 1; ix < nx; ++ix) {
          const cd g0 = src.at(ix - 1, hi, 0)[f], g1 = src.at(ix, hi, 0)[f];
          w = E * w + P1 * g0 + P2 * (g1 - g0);
          out.at(ix, hi, 0)[f] = w;
        }
      } else {
        cd w = 0.0;
        out.at(nx - 1, hi, 0)[f] = w;
        for (int ix = nx - 2; ix >= 0; --ix) {
          const cd g1 = src.at(ix + 1, hi, 0)[f], g0 = src.at(ix, hi, 0)[f];
          w = E * w - (P1 * g1 + P2 * (g0 - g1));
          out.at(ix, hi, 0)[f] = w;
        }
      }
    }
  }
}

namespace {

double sq_diff(const Field& a, const Field& b, double& base) {
  double s = 0.0;
  if (a.data.size() != b.data.size()) return 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    s += std::norm(a.data[i] - b.data[i]);
    base += std::norm(a.data[i]);
  }
  return s;
}

}  // namespace

HyperbolicResult ProfileSolver::picard_solve_hyperbolic(const BoundaryField& G, const HyperbolicOptions& opt) const {
  const int nf = g_.nf(), nh = g_.nh(), nx = g_.nx(), K = g_.K(), N = sys_.N, p = sys_.p;
  if (G.nx != 1 || G.nh != nh || G.nc != p || G.nf != nf)
    fail(ErrorKind::InvalidInput, "solve-profiles", "boundary data shape");
  HyperbolicResult res;
  ProfileSet prev = empty_profile_set(mt_, g_, N);
  std::vector<int> hyp_components, ell_components;
  for (int m = 0; m < mt_.M(); ++m)
    for (int k = 0; k < mt_.mult[m]; ++k)
      (is_hyperbolic(mt_.cls[m]) ? hyp_components : ell_components).push_back(pc_.offset[m] + k);

  std::vector<cd> G0(static_cast<size_t>(p) * nf);
  for (int r = 0; r < p; ++r) {
    std::copy(G.at(0, K, r), G.at(0, K, r) + nf, G0.begin() + static_cast<size_t>(r) * nf);
    g_.forward(G0.data() + static_cast<size_t>(r) * nf);
  }

  for (int it = 1; it <= opt.max_iter; ++it) {
    ProfileSet cur = empty_profile_set(mt_, g_, N);
    cur.iteration = it;
    // Mean.
    {
      Field msrc(nx, 1, N, nf);
#pragma omp parallel
      {
        std::vector<cd> buf;
#pragma omp for schedule(static)
        for (int ix = 0; ix < nx; ++ix) {
          mean_rhs(prev, ix, opt.quadratic, buf);
          std::copy(buf.begin(), buf.end(), msrc.slice(ix));
        }
      }
      g_.forward_field(msrc);
      mean_sweeper_.solve(msrc, G0, cur.vbar);
      g_.backward_field(cur.vbar);
    }
    // Interior sources of the hyperbolic components.
    std::vector<Field> src(pc_.total);
    for (int gi : hyp_components) {
      Field s(nx, nh, 1, nf);
#pragma omp parallel
      {
        std::vector<cd> buf;
#pragma omp for schedule(static)
        for (int ix = 0; ix < nx; ++ix) {
          component_rhs(prev, ix, gi, opt.quadratic, buf);
          std::copy(buf.begin(), buf.end(), s.slice(ix));
        }
      }
      g_.forward_field(s);
      src[gi] = std::move(s);
    }
    // Outgoing profiles.
    for (int gi : hyp_components) {
      const int m = pc_.mode_of(gi), k = gi - pc_.offset[m];
      if (mt_.cls[m] != ModeClass::Outgoing) continue;
      Field o;
      sweep(src[gi], m, nullptr, o);
      g_.backward_field(o);
      std::copy(o.slice(0), o.slice(0) + o.slice_size(), cur.trace[m][k].data.begin());
      cur.sigma[m][k] = std::move(o);
    }
    // Boundary traces of I u P u N.
    for (int h = 0; h < nh; ++h) {
      const int n = h - K;
      if (n == 0) continue;
      std::vector<cd> vals(pc_.total);
      CVec Gn(p);
      for (int f = 0; f < nf; ++f) {
        for (int gi = 0; gi < pc_.total; ++gi) {
          const int m = pc_.mode_of(gi);
          vals[gi] = cur.trace[m][gi - pc_.offset[m]].at(0, h, 0)[f];
        }
        for (int r = 0; r < p; ++r) Gn(r) = G.at(0, h, r)[f];
        bts_.solve(n, Gn, vals);
        for (int gi = 0; gi < pc_.total; ++gi) {
          const int m = pc_.mode_of(gi);
          if (mt_.cls[m] == ModeClass::Outgoing) continue;
          cur.trace[m][gi - pc_.offset[m]].at(0, h, 0)[f] = vals[gi];
        }
      }
    }
    // Incoming profiles.
    for (int gi : hyp_components) {
      const int m = pc_.mode_of(gi), k = gi - pc_.offset[m];
      if (mt_.cls[m] != ModeClass::Incoming) continue;
      std::vector<cd> tr(cur.trace[m][k].data);
      for (int h = 0; h < nh; ++h) g_.forward(tr.data() + static_cast<size_t>(h) * nf);
      Field o;
      sweep(src[gi], m, &tr, o);
      g_.backward_field(o);
      cur.sigma[m][k] = std::move(o);
    }
    src.clear();
    // Elliptic right-hand sides at the boundary, from the previous iterate.
    for (int gi : ell_components) {
      const int m = pc_.mode_of(gi), k = gi - pc_.offset[m];
      std::vector<cd> buf;
      component_rhs(prev, 0, gi, opt.quadratic, buf);
      std::copy(buf.begin(), buf.end(), cur.rhs0[m][k].data.begin());
    }
    // Increment.
    double diff = 0.0, base = 0.0;
    diff += sq_diff(cur.vbar, prev.vbar, base);
    for (int m = 0; m < mt_.M(); ++m)
      for (int k = 0; k < mt_.mult[m]; ++k) {
        if (cur.has(m)) diff += sq_diff(cur.sigma[m][k], prev.sigma[m][k], base);
        diff += sq_diff(cur.trace[m][k], prev.trace[m][k], base);
      }
    const double rel = base > 0.0 ? std::sqrt(diff / base) : 0.0;
    res.increments.push_back(rel);
    res.iterations = it;
    if (it <= opt.keep_iterates) res.iterates.push_back(cur);
    prev = std::move(cur);
    if (rel < opt.tol) {
      // Elliptic right-hand sides of the converged profiles.
      for (int gi : ell_components) {
        const int m = pc_.mode_of(gi), k = gi - pc_.offset[m];
        std::vector<cd> buf;
        component_rhs(prev, 0, gi, opt.quadratic, buf);
        std::copy(buf.begin(), buf.end(), prev.rhs0[m][k].data.begin());
      }
      // Iterates past convergence coincide with the fixed point.
      while (static_cast<int>(res.iterates.size()) < opt.keep_iterates) res.iterates.push_back(prev);
      res.profiles = std::move(prev);
      return res;
    }
  }
  fail(ErrorKind::NoConvergence, "solve-profiles",
       "hyperbolic Picard iteration did not converge; suggest a smaller T0");
}

}  // namespace geoptics
