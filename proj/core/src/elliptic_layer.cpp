#include "geoptics/elliptic_layer.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

namespace geoptics {

namespace {

fftw_complex* fc(cd* p) { return reinterpret_cast<fftw_complex*>(p); }

bool window_or_before(const SpectralGrid& g, int f) { return g.t(g.it_of(f)) <= g.spec().T0; }

// Zero every harmonic outside Z_m \ 0 and every sample with t <= 0.
void restrict_support(const SpectralGrid& g, const SpectrumLattice& lat, int m, Field& fld) {
  for (int h = 0; h < fld.nh; ++h) {
    const int n = g.harmonic(h);
    const bool keep = n != 0 && lat.contains(m, n);
    cd* p = fld.at(0, h, 0);
    for (int f = 0; f < fld.nf; ++f)
      if (!keep || g.t(g.it_of(f)) <= 0.0) p[f] = 0.0;
  }
}

}  // namespace

TracePair extract_traces(const ProfileSet& S, const ModeTable& mt, const SpectralGrid& g, int m, int k) {
  if (m >= static_cast<int>(S.trace.size()) || k >= static_cast<int>(S.trace[m].size()) ||
      S.trace[m][k].nx == 0 || k >= static_cast<int>(S.rhs0[m].size()) || S.rhs0[m][k].nx == 0)
    fail(ErrorKind::MissingTrace, "elliptic", "boundary trace of an elliptic component is missing");
  const int nh = g.nh(), nf = g.nf();
  TracePair tp;
  tp.a = S.trace[m][k];
  tp.b = Field(1, nh, 1, nf);
  const SpectrumLattice lat = make_lattice(mt, g.K());
  restrict_support(g, lat, m, tp.a);
  const cd k0 = mt.kappa[m](0);
  const cd k1 = mt.d > 1 ? mt.kappa[m](1) : cd(0.0);
  std::vector<cd> A(nf), Rh(nf), Bs(nf);
  for (int h = 0; h < nh; ++h) {
    std::copy(tp.a.at(0, h, 0), tp.a.at(0, h, 0) + nf, A.begin());
    std::copy(S.rhs0[m][k].at(0, h, 0), S.rhs0[m][k].at(0, h, 0) + nf, Rh.begin());
    g.forward(A.data());
    g.forward(Rh.data());
    for (int f = 0; f < nf; ++f) Bs[f] = Rh[f] - (k0 * g.dt_symbol(f) + k1 * g.dy_symbol(f)) * A[f];
    g.backward(Bs.data());
    std::copy(Bs.begin(), Bs.end(), tp.b.at(0, h, 0));
  }
  restrict_support(g, lat, m, tp.b);
  return tp;
}

void extend_past_T(std::vector<cd>& f, int iT, double h, double taper) {
  const int n = static_cast<int>(f.size());
  auto at = [&](int i) { return i >= 0 && i <= iT ? f[i] : cd(0.0); };
  for (int i = iT + 1; i < n; ++i) {
    const int s = i - iT;
    const double w = 1.0 - smooth_step(s * h / taper);
    f[i] = w > 0.0 ? w * (6.0 * at(iT - s) - 8.0 * at(iT - 2 * s) + 3.0 * at(iT - 3 * s)) : cd(0.0);
  }
}

double cutoff_chi(double x, double D) {
  const double lo = 0.5 * D, hi = 0.9 * D;
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  const double s = (x - lo) / (hi - lo);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double wave_solve(const std::vector<cd>& a, const std::vector<cd>& bt, double ht, double hx, double kappa2,
                  int nsteps, const WaveRowHook& hook) {
  if (hx > ht * (1.0 + 1e-12)) fail(ErrorKind::CFLViolation, "wave", "x_d step exceeds the t spacing");
  const int n = static_cast<int>(a.size());
  if (static_cast<int>(bt.size()) != n) fail(ErrorKind::InvalidInput, "wave", "data length mismatch");
  const double lam2 = (hx / ht) * (hx / ht), iht2 = 1.0 / (ht * ht), c = 0.5 * hx * hx * kappa2;
  auto lap = [n](const std::vector<cd>& u, int i) {
    cd l = -2.0 * u[i];
    if (i > 0) l += u[i - 1];
    if (i + 1 < n) l += u[i + 1];
    return l;
  };
  auto energy = [&](const std::vector<cd>& u0, const std::vector<cd>& u1) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      e += std::norm(u1[i] - u0[i]) / (hx * hx);
      e += (std::conj(u1[i]) * (-lap(u0, i) * iht2)).real();
      e += 0.5 * kappa2 * (std::norm(u1[i]) + std::norm(u0[i]));
    }
    return e;
  };
  std::vector<cd> u0(a), u1(n), u2(n);
  for (int i = 0; i < n; ++i)
    u1[i] = a[i] + hx * bt[i] + 0.5 * hx * hx * (lap(a, i) * iht2 - kappa2 * a[i]) +
            hx * hx * hx / 6.0 * (lap(bt, i) * iht2 - kappa2 * bt[i]);
  if (hook) hook(0, u0);
  if (nsteps >= 1 && hook) hook(1, u1);
  const double e0 = energy(u0, u1);
  double drift = 0.0;
  for (int step = 2; step <= nsteps; ++step) {
    for (int i = 0; i < n; ++i) u2[i] = (2.0 * u1[i] - (1.0 + c) * u0[i] + lam2 * lap(u1, i)) / (1.0 + c);
    std::swap(u0, u1);
    std::swap(u1, u2);
    if (hook) hook(step, u1);
    if (e0 > 0.0) drift = std::max(drift, std::abs(energy(u0, u1) - e0) / e0);
  }
  return drift;
}

Field build_elliptic_profile(const TracePair& tp, const ModeTable& mt, int m, const SpectralGrid& g,
                             const EllipticOptions& opt, EllipticReport* report) {
  if (is_hyperbolic(mt.cls[m])) fail(ErrorKind::InvalidInput, "elliptic", "mode is not elliptic");
  const GridSpec& sp = g.spec();
  const int nt = g.nt(), ny = g.ny(), nf = g.nf(), nh = g.nh(), nx = g.nx(), K = g.K();
  const double h = sp.dx;
  const int r = static_cast<int>(std::lround(sp.dt / h));
  if (r < 1 || std::abs(r * h - sp.dt) > 1e-9 * sp.dt)
    fail(ErrorKind::InvalidInput, "elliptic", "the t spacing must be an integer multiple of the x_d spacing");
  const int nfine = nt * r;
  const double X = (nx - 1) * h, t_end = sp.t_start + g.period();
  const long jlo = static_cast<long>(std::floor((-X - opt.margin - sp.t_start) / h));
  const long jhi =
      static_cast<long>(std::ceil((std::max(t_end, sp.T0 + opt.taper + X) + opt.margin - sp.t_start) / h));
  const int nw = static_cast<int>(jhi - jlo + 1);
  const int iT = static_cast<int>(std::lround((sp.T0 - sp.t_start) / h) - jlo);
  const SpectrumLattice lat = make_lattice(mt, K);

  std::vector<double> chi(nx);
  for (int ix = 0; ix < nx; ++ix) chi[ix] = cutoff_chi(g.x(ix), opt.D);

  Field out(nx, nh, 1, nf);
  std::vector<cd> buf(nfine);
  fftw_plan plan = fftw_plan_dft_1d(nfine, fc(buf.data()), fc(buf.data()), FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  auto fine_values = [&](const std::vector<cd>& spec, int ky, std::vector<cd>& fine) {
    std::fill(buf.begin(), buf.end(), cd(0.0));
    for (int kt = 0; kt < nt; ++kt) {
      if (nt % 2 == 0 && kt == nt / 2) continue;
      const int k = kt <= nt / 2 ? kt : kt - nt;
      buf[(k + nfine) % nfine] = spec[static_cast<size_t>(ky) * nt + kt];
    }
    fftw_execute_dft(plan, fc(buf.data()), fc(buf.data()));
    fine.assign(nw, cd(0.0));
    for (int i = 0; i <= iT && i < nw; ++i) {
      const long j = jlo + i;
      const double tp_ = sp.t_start + j * h;
      if (tp_ <= 0.0) continue;
      fine[i] = buf[static_cast<size_t>(j % nfine)] * std::exp(g.gamma() * tp_);
    }
    extend_past_T(fine, iT, h, opt.taper);
  };

  double drift = 0.0;
  std::vector<cd> A(nf), Bt(nf), wa, wb;
  for (int hi = 0; hi < nh; ++hi) {
    const int n = g.harmonic(hi);
    if (n == 0 || !lat.contains(m, n)) continue;
    std::copy(tp.a.at(0, hi, 0), tp.a.at(0, hi, 0) + nf, A.begin());
    std::copy(tp.b.at(0, hi, 0), tp.b.at(0, hi, 0) + nf, Bt.begin());
    g.forward(A.data());
    g.forward(Bt.data());
    for (int f = 0; f < nf; ++f) Bt[f] += g.dt_symbol(f) * A[f];
    for (int ky = 0; ky < ny; ++ky) {
      fine_values(A, ky, wa);
      fine_values(Bt, ky, wb);
      const double vs = g.varsigma(ky * nt);
      const double kappa2 = vs * vs + double(n) * n;
      const double dr = wave_solve(wa, wb, h, h, kappa2, nx - 1, [&](int step, const std::vector<cd>& row) {
        cd* dst = out.at(step, hi, 0) + static_cast<size_t>(ky) * nt;
        for (int it = 0; it < nt; ++it) {
          const long idx = static_cast<long>(it) * r - step - jlo;
          dst[it] = idx >= 0 && idx < nw ? chi[step] * row[idx] : cd(0.0);
        }
      });
      drift = std::max(drift, dr);
    }
  }
  fftw_destroy_plan(plan);

  if (ny > 1) {
    std::vector<cd> col(ny);
    for (int ix = 0; ix < nx; ++ix)
      for (int hi = 0; hi < nh; ++hi) {
        cd* p = out.at(ix, hi, 0);
        for (int it = 0; it < nt; ++it) {
          for (int iy = 0; iy < ny; ++iy) {
            cd s = 0.0;
            for (int ky = 0; ky < ny; ++ky)
              s += p[static_cast<size_t>(ky) * nt + it] * std::exp(kI * (2.0 * kPi * ky * iy / ny));
            col[iy] = s;
          }
          for (int iy = 0; iy < ny; ++iy) p[static_cast<size_t>(iy) * nt + it] = col[iy];
        }
      }
  }

  double leak = 0.0;
  for (int ix = 0; ix < nx; ++ix)
    for (int hi = 0; hi < nh; ++hi) {
      const cd* p = out.at(ix, hi, 0);
      for (int f = 0; f < nf; ++f)
        if (g.t(g.it_of(f)) <= 0.0) leak = std::max(leak, std::abs(p[f]));
    }
  double scale = 0.0;
  for (const cd& v : tp.a.data) scale = std::max(scale, std::abs(v));
  if (leak > 1e-12 * (1.0 + scale)) fail(ErrorKind::SupportLeak, "elliptic", "profile is nonzero for t <= 0");
  if (report) {
    report->energy_drift = std::max(report->energy_drift, drift);
    report->support_leak = std::max(report->support_leak, leak);
  }
  return out;
}

EllipticReport build_elliptic_profiles(ProfileSet& S, const ModeTable& mt, const SpectralGrid& g,
                                       const EllipticOptions& opt) {
  EllipticReport rep;
  for (int m = 0; m < mt.M(); ++m) {
    if (is_hyperbolic(mt.cls[m])) continue;
    S.sigma[m].clear();
    for (int k = 0; k < mt.mult[m]; ++k) {
      const TracePair tp = extract_traces(S, mt, g, m, k);
      S.sigma[m].push_back(build_elliptic_profile(tp, mt, m, g, opt, &rep));
    }
  }
  return rep;
}

EllipticResidual elliptic_residual(const ProfileSolver& solver, const ModeTable& mt, const SpectralGrid& g,
                                   const ProfileSet& S_prev, const ProfileSet& S, const EllipticOptions& opt) {
  const int nx = g.nx(), nh = g.nh(), nf = g.nf();
  const double h = g.spec().dx;
  EllipticResidual res;
  res.R.resize(mt.M());
  double fscale = 0.0;
  for (int m = 0; m < mt.M(); ++m) {
    if (is_hyperbolic(mt.cls[m])) continue;
    if (!S.has(m)) fail(ErrorKind::MissingTrace, "elliptic", "elliptic profile has not been built");
    const cd k0 = mt.kappa[m](0);
    const cd k1 = mt.d > 1 ? mt.kappa[m](1) : cd(0.0);
    for (int k = 0; k < mt.mult[m]; ++k) {
      const Field& sg = S.sigma[m][k];
      const int gid = solver.coefficients().offset[m] + k;
      Field R(nx, nh, 1, nf);
#pragma omp parallel
      {
        std::vector<cd> f, spec(nf), dt(nf), dy(nf);
        double fmax = 0.0;
#pragma omp for schedule(static)
        for (int ix = 0; ix < nx; ++ix) {
          solver.component_rhs(S_prev, ix, gid, opt.quadratic, f);
          for (int hi = 0; hi < nh; ++hi) {
            const cd* s0 = sg.at(ix, hi, 0);
            std::copy(s0, s0 + nf, spec.begin());
            g.forward(spec.data());
            g.physical_derivative(spec.data(), 1, 0, dt.data());
            if (g.ny() > 1) g.physical_derivative(spec.data(), 0, 1, dy.data());
            cd* out = R.at(ix, hi, 0);
            for (int q = 0; q < nf; ++q) {
              cd dx;
              if (ix == 0)
                dx = (-3.0 * sg.at(0, hi, 0)[q] + 4.0 * sg.at(1, hi, 0)[q] - sg.at(2, hi, 0)[q]) / (2.0 * h);
              else if (ix == nx - 1)
                dx = (3.0 * sg.at(ix, hi, 0)[q] - 4.0 * sg.at(ix - 1, hi, 0)[q] + sg.at(ix - 2, hi, 0)[q]) /
                     (2.0 * h);
              else
                dx = (sg.at(ix + 1, hi, 0)[q] - sg.at(ix - 1, hi, 0)[q]) / (2.0 * h);
              cd v = dx + k0 * dt[q] - f[static_cast<size_t>(hi) * nf + q];
              if (g.ny() > 1) v += k1 * dy[q];
              out[q] = v;
              if (ix == 0 && window_or_before(g, q)) fmax = std::max(fmax, std::abs(f[static_cast<size_t>(hi) * nf + q]));
            }
          }
        }
#pragma omp critical
        fscale = std::max(fscale, fmax);
      }
      for (int ix = 0; ix < nx; ++ix)
        for (int hi = 0; hi < nh; ++hi) {
          const cd* p = R.at(ix, hi, 0);
          for (int q = 0; q < nf; ++q) {
            if (!g.in_window(q)) continue;
            const double v = std::abs(p[q]);
            if (ix == 0) res.boundary_max = std::max(res.boundary_max, v);
            res.interior_max = std::max(res.interior_max, v);
          }
        }
      if (res.R[m].empty()) res.R[m].reserve(mt.mult[m]);
      res.R[m].push_back(std::move(R));
    }
  }
  if (res.boundary_max > opt.residual_tol * (1.0 + fscale))
    fail(ErrorKind::BoundaryResidualNonzero, "elliptic", "complex transport residual does not vanish at x_d = 0");
  return res;
}

}  // namespace geoptics
