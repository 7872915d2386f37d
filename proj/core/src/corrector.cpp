#include "geoptics/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace geoptics {

namespace {

bool all_zero(const Alpha& a) {
  return std::all_of(a.begin(), a.end(), [](int v) { return v == 0; });
}

}  // namespace

AlphaSolve alpha_solve(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs, const Alpha& alpha) {
  AlphaSolve out;
  const int N = sys.N;
  if (all_zero(alpha)) {
    out.symbol = CMat::Zero(N, N);
    out.S = CMat::Zero(N, N);
    out.characteristic = true;
    return out;
  }
  out.symbol = corrector_symbol(sys, mt, alpha);
  out.characteristic = lookup_characteristic(rs, alpha).m >= 0;
  Eigen::JacobiSVD<CMat> svd(out.symbol, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  out.condition = s(N - 1) > 0.0 ? smax / s(N - 1) : INFINITY;
  if (out.characteristic) {
    // Minimum-norm least squares on the range of the singular symbol.
    CVec inv = CVec::Zero(N);
    const double cut = 1e-9 * std::max(1.0, smax);
    for (int i = 0; i < N; ++i)
      if (s(i) > cut) inv(i) = 1.0 / s(i);
    out.S = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
    double g = 0.0;
    for (int i = 0; i < N; ++i) g = std::max(g, std::abs(inv(i)));
    out.gain = g;
  } else {
    out.S = out.symbol.inverse();
    out.gain = s(N - 1) > 0.0 ? 1.0 / s(N - 1) : INFINITY;
  }
  return out;
}

CorrectorResult solve_corrector(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                const TrigPolynomial& H, const CorrectorOptions& opt) {
  const double hmax = H.max_abs();
  const TrigPolynomial Ef = project_Eflat(H, rs, mt);
  if (Ef.max_abs() > 1e-9 * (1.0 + hmax))
    fail(ErrorKind::NotSolvable, "corrector", "right-hand side is not annihilated by E-flat");
  CorrectorResult res;
  res.V = TrigPolynomial(H.N, H.M, H.npts);
  for (const auto& [alpha, Ha] : H.terms) {
    if (Ha.cwiseAbs().maxCoeff() == 0.0) continue;
    const AlphaSolve as = alpha_solve(sys, mt, rs, alpha);
    if (!as.characteristic && as.condition > opt.cond_cap)
      fail(ErrorKind::NearSingular, "corrector", "symbol is nearly singular at a non-characteristic alpha");
    const CMat V = as.S * Ha;
    const double r = (as.symbol * V - Ha).cwiseAbs().maxCoeff() / (1.0 + hmax);
    res.residual = std::max(res.residual, r);
    res.amplification = std::max(res.amplification, as.gain);
    res.V.add(alpha, V);
  }
  if (res.residual > opt.residual_tol)
    fail(ErrorKind::NotSolvable, "corrector", "round-trip residual exceeds the tolerance");
  return res;
}

ProfileTruncation truncate_to_polynomial(const ProfileSet& S, const SpectralGrid& g, double delta) {
  ProfileTruncation tr;
  const int K = g.K(), nh = g.nh(), nf = g.nf(), nx = g.nx();
  const double dx = g.spec().dx, dt = g.spec().dt * g.dy();
  std::vector<std::tuple<double, int, int, int>> items;
  tr.keep.resize(S.M);
  for (int m = 0; m < S.M; ++m) {
    tr.keep[m].assign(S.sigma[m].size(), std::vector<char>(nh, 0));
    if (!S.has(m)) continue;
    for (int k = 0; k < static_cast<int>(S.sigma[m].size()); ++k)
      for (int h = 0; h < nh; ++h) {
        const int n = h - K;
        if (n == 0) continue;
        double s = 0.0;
        for (int ix = 0; ix < nx; ++ix) {
          const cd* p = S.sigma[m][k].at(ix, h, 0);
          for (int f = 0; f < nf; ++f)
            if (g.in_window(f)) s += std::norm(p[f]);
        }
        s *= dx * dt * std::pow(1.0 + std::abs(n), 4);
        tr.keep[m][k][h] = 1;
        ++tr.total;
        items.emplace_back(s, m, k, h);
      }
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  double dropped = 0.0;
  for (const auto& [s, m, k, h] : items) {
    if (dropped + s > delta * delta) break;
    dropped += s;
    tr.keep[m][k][h] = 0;
  }
  tr.tail = std::sqrt(dropped);
  for (const auto& [s, m, k, h] : items) tr.kept += tr.keep[m][k][h];
  return tr;
}

CorrectorBuilder::CorrectorBuilder(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                   const SpectralGrid& g, const ProfileSet& S, const CorrectorOptions& opt)
    : sys_(sys), mt_(mt), rs_(rs), g_(g), S_(S), opt_(opt), trunc_(truncate_to_polynomial(S, g, opt.delta)) {
  const int N = sys.N, M = mt.M(), K = g.K();
  for (int j = 0; j < sys.d; ++j) At_.push_back(sys.At(j, Vec::Zero(N)));
  F0_ = sys.F0().cast<cd>();
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < mt.mult[m]; ++k) {
      comp_m_.push_back(m);
      comp_k_.push_back(k);
    }
  const int C = static_cast<int>(comp_m_.size());
  Qe_.assign(N, std::vector<CVec>(C));
  Qrr_.assign(C, std::vector<CVec>(C));
  for (int c = 0; c < N; ++c) {
    CVec e = CVec::Zero(N);
    e(c) = 1.0;
    for (int a = 0; a < C; ++a) Qe_[c][a] = quad_form(sys, mt.beta, e, mt.r[comp_m_[a]].col(comp_k_[a]));
  }
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b)
      Qrr_[a][b] = quad_form(sys, mt.beta, mt.r[comp_m_[a]].col(comp_k_[a]), mt.r[comp_m_[b]].col(comp_k_[b]));

  const SpectrumLattice lat = make_lattice(mt, 2 * K);
  solves_.emplace(Alpha(M, 0), alpha_solve(sys, mt, rs, Alpha(M, 0)));
  for (int m = 0; m < M; ++m)
    for (int n = -2 * K; n <= 2 * K; ++n)
      if (n != 0 && lat.contains(m, n)) {
        const Alpha a = single_phase(M, m, n);
        solves_.emplace(a, alpha_solve(sys, mt, rs, a));
      }
  for (int m1 = 0; m1 < M; ++m1)
    for (int m2 = m1 + 1; m2 < M; ++m2)
      for (int n1 = -K; n1 <= K; ++n1)
        for (int n2 = -K; n2 <= K; ++n2) {
          if (n1 == 0 || n2 == 0 || !lat.contains(m1, n1) || !lat.contains(m2, n2)) continue;
          Alpha a(M, 0);
          a[m1] = n1;
          a[m2] = n2;
          solves_.emplace(a, alpha_solve(sys, mt, rs, a));
        }
}

TrigPolynomial CorrectorBuilder::interior_H(int ix) const {
  const int N = sys_.N, M = mt_.M(), nf = g_.nf(), nh = g_.nh(), K = g_.K(), nx = g_.nx();
  const double h = g_.spec().dx;
  std::map<Alpha, CMat> blocks;
  auto block = [&](const Alpha& a) -> CMat& {
    auto it = blocks.find(a);
    if (it == blocks.end()) it = blocks.emplace(a, CMat::Zero(N, nf)).first;
    return it->second;
  };
  auto ddx = [&](auto get, int q) -> cd {
    if (nx < 3) return 0.0;
    if (ix == 0) return (-3.0 * get(0, q) + 4.0 * get(1, q) - get(2, q)) / (2.0 * h);
    if (ix == nx - 1) return (3.0 * get(ix, q) - 4.0 * get(ix - 1, q) + get(ix - 2, q)) / (2.0 * h);
    return (get(ix + 1, q) - get(ix - 1, q)) / (2.0 * h);
  };
  std::vector<cd> spec(nf), dt(nf), dy(nf, 0.0);

  // Mean part.
  CMat vbar(N, nf), Hm = CMat::Zero(N, nf);
  for (int c = 0; c < N; ++c) {
    const cd* p = S_.vbar.at(ix, 0, c);
    std::copy(p, p + nf, spec.begin());
    for (int q = 0; q < nf; ++q) vbar(c, q) = p[q];
    g_.forward(spec.data());
    g_.physical_derivative(spec.data(), 1, 0, dt.data());
    if (g_.ny() > 1) g_.physical_derivative(spec.data(), 0, 1, dy.data());
    for (int q = 0; q < nf; ++q) {
      Hm(c, q) += ddx([&](int i, int f) { return S_.vbar.at(i, 0, c)[f]; }, q);
      for (int r = 0; r < N; ++r) {
        Hm(r, q) += cd(At_[0](r, c)) * dt[q];
        if (sys_.d > 1 && g_.ny() > 1) Hm(r, q) += cd(At_[1](r, c)) * dy[q];
      }
    }
  }
  Hm -= F0_ * vbar;
  block(Alpha(M, 0)) += Hm;

  // Single-phase parts.
  struct Entry {
    int ci, m, n;
    const cd* s;
  };
  std::vector<Entry> entries;
  for (int ci = 0; ci < static_cast<int>(comp_m_.size()); ++ci) {
    const int m = comp_m_[ci], k = comp_k_[ci];
    if (!S_.has(m)) continue;
    const CVec r = mt_.r[m].col(k);
    std::vector<CVec> Ar;
    for (int j = 0; j < sys_.d; ++j) Ar.push_back(At_[j].cast<cd>() * r);
    const CVec Fr = F0_ * r;
    for (int hi = 0; hi < nh; ++hi) {
      const int n = hi - K;
      if (n == 0 || !trunc_.keeps(m, k, hi)) continue;
      const Field& sg = S_.sigma[m][k];
      const cd* s = sg.at(ix, hi, 0);
      entries.push_back({ci, m, n, s});
      std::copy(s, s + nf, spec.begin());
      g_.forward(spec.data());
      g_.physical_derivative(spec.data(), 1, 0, dt.data());
      if (g_.ny() > 1) g_.physical_derivative(spec.data(), 0, 1, dy.data());
      CMat& B = block(single_phase(M, m, n));
      for (int q = 0; q < nf; ++q) {
        const cd sx = ddx([&](int i, int f) { return sg.at(i, hi, 0)[f]; }, q);
        B.col(q) += r * sx + Ar[0] * dt[q] - Fr * s[q];
        if (sys_.d > 1 && g_.ny() > 1) B.col(q) += Ar[1] * dy[q];
      }
      // Coupling with the mean: Q(vbar, i n sigma r).
      for (int c = 0; c < N; ++c)
        for (int q = 0; q < nf; ++q) B.col(q) += Qe_[c][ci] * (vbar(c, q) * (kI * double(n)) * s[q]);
    }
  }
  // Products of single-phase parts: Q(sigma_a r_a, i n_b sigma_b r_b).
  for (const Entry& a : entries)
    for (const Entry& b : entries) {
      Alpha al(M, 0);
      al[a.m] += a.n;
      al[b.m] += b.n;
      CMat& B = block(al);
      const CVec& Q = Qrr_[a.ci][b.ci];
      const cd in = kI * double(b.n);
      for (int q = 0; q < nf; ++q) B.col(q) += Q * (a.s[q] * in * b.s[q]);
    }
  // Same source cutoff as the profile equations; it also keeps the products away from
  // the late-time samples where the weighted transform amplifies roundoff.
  Eigen::VectorXd cut(nf);
  for (int q = 0; q < nf; ++q) cut(q) = g_.source_cutoff(g_.t(g_.it_of(q)));
  TrigPolynomial H(N, M, nf);
  for (auto& [a, B] : blocks) H.add(a, B * cut.asDiagonal());
  return H;
}

TrigPolynomial CorrectorBuilder::flat_complement(const TrigPolynomial& H) const {
  return H - project_Eflat(H, rs_, mt_);
}

CorrectorResult CorrectorBuilder::solve_slice(const TrigPolynomial& Hf) const {
  CorrectorResult res;
  res.V = TrigPolynomial(Hf.N, Hf.M, Hf.npts);
  const double hmax = Hf.max_abs();
  for (const auto& [alpha, Ha] : Hf.terms) {
    if (Ha.cwiseAbs().maxCoeff() == 0.0) continue;
    auto it = solves_.find(alpha);
    const AlphaSolve as = it != solves_.end() ? it->second : alpha_solve(sys_, mt_, rs_, alpha);
    if (!as.characteristic && as.condition > opt_.cond_cap)
      fail(ErrorKind::NearSingular, "corrector", "symbol is nearly singular at a non-characteristic alpha");
    const CMat V = -(as.S * Ha);
    res.residual = std::max(res.residual, (as.symbol * V + Ha).cwiseAbs().maxCoeff() / (1.0 + hmax));
    res.amplification = std::max(res.amplification, as.gain);
    res.V.add(alpha, V);
  }
  if (res.residual > opt_.residual_tol)
    fail(ErrorKind::NotSolvable, "corrector", "round-trip residual exceeds the tolerance");
  return res;
}

CorrectorResult CorrectorBuilder::corrector_at(int ix) const { return solve_slice(flat_complement(interior_H(ix))); }

Field CorrectorBuilder::corrector_field(double eps, double* amplification, double* residual) const {
  const int nx = g_.nx(), nh = g_.nh(), N = sys_.N, nf = g_.nf(), K = g_.K();
  Field out(nx, nh, N, nf);
  double amp = 0.0, resid = 0.0;
#pragma omp parallel
  {
    double a_loc = 0.0, r_loc = 0.0;
#pragma omp for schedule(static)
    for (int ix = 0; ix < nx; ++ix) {
      const CorrectorResult cr = corrector_at(ix);
      a_loc = std::max(a_loc, cr.amplification);
      r_loc = std::max(r_loc, cr.residual);
      const double xid = g_.x(ix) / eps;
      for (const auto& [alpha, V] : cr.V.terms) {
        const int s = alpha_sum(alpha);
        if (std::abs(s) > K) continue;
        const cd ph = std::exp(kI * alpha_dot(alpha, mt_.omega) * xid);
        for (int c = 0; c < N; ++c) {
          cd* p = out.at(ix, s + K, c);
          for (int q = 0; q < nf; ++q) p[q] += ph * V(c, q);
        }
      }
    }
#pragma omp critical
    {
      amp = std::max(amp, a_loc);
      resid = std::max(resid, r_loc);
    }
  }
  if (amplification) *amplification = amp;
  if (residual) *residual = resid;
  return out;
}

}  // namespace geoptics
