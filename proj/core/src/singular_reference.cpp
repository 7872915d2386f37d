#include "geoptics/singular_reference.hpp"

#include <cmath>

namespace geoptics {

std::vector<int> harmonic_list(int K) {
  std::vector<int> h;
  for (int n = -K; n <= K; ++n) h.push_back(n);
  return h;
}

SingularSolver::SingularSolver(const SystemSpec& sys, const SpectralGrid& g, std::vector<double> beta, double eps)
    : sys_(sys), g_(g), beta_(std::move(beta)), eps_(eps), sweeper_(sys, g, beta_, eps, harmonic_list(g.K())) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidInput, "solve-singular", "epsilon must be positive");
  if (static_cast<int>(beta_.size()) != sys.d) fail(ErrorKind::InvalidInput, "solve-singular", "beta length");
  for (int j = 0; j < sys.d; ++j) At0_.push_back(sys.At(j, Vec::Zero(sys.N)));
}

void SingularSolver::nonlinear_source(const Field& Un, Field& R) const {
  const int N = sys_.N, d = sys_.d, nf = g_.nf(), nx = g_.nx(), nh = g_.nh(), K = g_.K(), P = g_.spec().P;
  if (R.nx != nx || R.nh != nh || R.nc != N || R.nf != nf) R = Field(nx, nh, N, nf);
  R.zero();
  const bool has_source = static_cast<bool>(sys_.source);
  std::vector<cd> eth(static_cast<size_t>(P) * nh);
  for (int q = 0; q < P; ++q)
    for (int h = 0; h < nh; ++h) eth[q * nh + h] = std::exp(kI * (2.0 * kPi * q * (h - K) / P));
  std::vector<char> active(nf);
  std::vector<double> cut(nf);
  for (int f = 0; f < nf; ++f) {
    const double t = g_.t(g_.it_of(f));
    cut[f] = g_.source_cutoff(t);
    active[f] = t >= 0.0 && cut[f] > 0.0;
  }
#pragma omp parallel
  {
    const size_t sl = static_cast<size_t>(nh) * N * nf;
    std::vector<cd> u(sl), ut(sl), uy(g_.ny() > 1 ? sl : 0);
    std::vector<cd> tmp(nf);
    Vec uq(N), dq(N), tq(N), yq(N), sq(N);
#pragma omp for schedule(static)
    for (int ix = 0; ix < nx; ++ix) {
      const cd* spec = Un.slice(ix);
      for (int b = 0; b < nh * N; ++b) {
        const cd* blk = spec + static_cast<size_t>(b) * nf;
        g_.physical_derivative(blk, 0, 0, u.data() + static_cast<size_t>(b) * nf);
        g_.physical_derivative(blk, 1, 0, ut.data() + static_cast<size_t>(b) * nf);
        if (g_.ny() > 1) g_.physical_derivative(blk, 0, 1, uy.data() + static_cast<size_t>(b) * nf);
      }
      cd* out = R.slice(ix);
      for (int f = 0; f < nf; ++f) {
        if (!active[f]) continue;
        std::vector<Vec> sv(P, Vec::Zero(N));
        for (int q = 0; q < P; ++q) {
          for (int c = 0; c < N; ++c) {
            cd a = 0.0, at = 0.0, ay = 0.0, ath = 0.0;
            for (int h = 0; h < nh; ++h) {
              const size_t o = (static_cast<size_t>(h) * N + c) * nf + f;
              const cd e = eth[q * nh + h];
              a += u[o] * e;
              at += ut[o] * e;
              if (g_.ny() > 1) ay += uy[o] * e;
              ath += u[o] * (kI * double(h - K)) * e;
            }
            uq(c) = a.real();
            tq(c) = at.real();
            yq(c) = ay.real();
            dq(c) = ath.real();
          }
          const Vec eu = eps_ * uq;
          const Mat Ad = sys_.A(d, eu);
          const Eigen::PartialPivLU<Mat> lu(Ad);
          sq.setZero();
          if (has_source) sq += lu.solve(sys_.source(eu)) * uq;
          for (int j = 0; j < d; ++j) {
            const Mat Aj = j == 0 ? Mat(lu.solve(Mat::Identity(N, N))) : Mat(lu.solve(sys_.A(j, eu)));
            Vec dj = (beta_[j] / eps_) * dq;
            if (j == 0) dj += tq;
            if (j == 1) dj += yq;
            sq -= (Aj - At0_[j]) * dj;
          }
          sv[q] = sq;
        }
        for (int h = 0; h < nh; ++h)
          for (int c = 0; c < N; ++c) {
            cd acc = 0.0;
            for (int q = 0; q < P; ++q) acc += sv[q](c) * std::conj(eth[q * nh + h]);
            out[(static_cast<size_t>(h) * N + c) * nf + f] = cut[f] * acc / double(P);
          }
      }
      for (int b = 0; b < nh * N; ++b) g_.forward(out + static_cast<size_t>(b) * nf);
    }
  }
}

std::vector<cd> SingularSolver::boundary_data(const BoundaryField& G, const Field* Un) const {
  const int p = sys_.p, nf = g_.nf(), nh = g_.nh(), K = g_.K(), N = sys_.N, P = g_.spec().P;
  if (G.nx != 1 || G.nh != nh || G.nc != p || G.nf != nf)
    fail(ErrorKind::InvalidInput, "solve-singular", "boundary data shape");
  std::vector<cd> out(G.data.begin(), G.data.end());
  if (Un && sys_.B) {
    std::vector<cd> u(static_cast<size_t>(nh) * N * nf);
    for (int b = 0; b < nh * N; ++b)
      g_.physical_derivative(Un->slice(0) + static_cast<size_t>(b) * nf, 0, 0, u.data() + static_cast<size_t>(b) * nf);
    for (int f = 0; f < nf; ++f) {
      std::vector<Vec> corr(P);
      for (int q = 0; q < P; ++q) {
        Vec uq(N);
        for (int c = 0; c < N; ++c) {
          cd a = 0.0;
          for (int h = 0; h < nh; ++h)
            a += u[(static_cast<size_t>(h) * N + c) * nf + f] * std::exp(kI * (2.0 * kPi * q * (h - K) / P));
          uq(c) = a.real();
        }
        corr[q] = (sys_.Bu(eps_ * uq) - sys_.B0) * uq;
      }
      for (int h = 0; h < nh; ++h)
        for (int r = 0; r < p; ++r) {
          cd acc = 0.0;
          for (int q = 0; q < P; ++q) acc += corr[q](r) * std::exp(-kI * (2.0 * kPi * q * (h - K) / P));
          out[(static_cast<size_t>(h) * p + r) * nf + f] -= acc / double(P);
        }
    }
  }
  for (int b = 0; b < nh * p; ++b) g_.forward(out.data() + static_cast<size_t>(b) * nf);
  return out;
}

void SingularSolver::solve_linear(const Field& R, const std::vector<cd>& Ghat, Field& U) const {
  sweeper_.solve(R, Ghat, U);
}

void SingularSolver::picard_step(const Field* Un, const BoundaryField& G, Field& Unext) const {
  Field R(g_.nx(), g_.nh(), sys_.N, g_.nf());
  if (Un) nonlinear_source(*Un, R);
  sweeper_.solve(R, boundary_data(G, Un), Unext);
}

SingularResult SingularSolver::solve(const BoundaryField& G, const SingularOptions& opt,
                                     const IterateHook& hook) const {
  SingularResult res;
  res.eps = eps_;
  res.max_condition = sweeper_.max_condition();
  Field cur, next, R(g_.nx(), g_.nh(), sys_.N, g_.nf());
  sweeper_.solve(R, boundary_data(G, nullptr), cur);
  res.iterations = 1;
  if (hook) hook(1, cur);
  for (int n = 1; n < opt.max_iter; ++n) {
    nonlinear_source(cur, R);
    sweeper_.solve(R, boundary_data(G, &cur), next);
    ++res.iterations;
    if (hook) hook(res.iterations, next);
    // Reuse R for the increment.
    for (size_t i = 0; i < R.data.size(); ++i) R.data[i] = next.data[i] - cur.data[i];
    const double dn = es_norm(g_, R).total();
    const double un = es_norm(g_, next).total();
    if (!std::isfinite(un) || un > opt.blowup_cap)
      fail(ErrorKind::BlowUp, "solve-singular", "iterate norm exceeded the cap");
    const double rel = un > 0.0 ? dn / un : 0.0;
    res.increments.push_back(rel);
    std::swap(cur, next);
    if (rel < opt.tol) {
      res.U = std::move(cur);
      res.norm = es_norm(g_, res.U);
      return res;
    }
  }
  fail(ErrorKind::NoConvergence, "solve-singular",
       "Picard iteration did not reach the tolerance; shrink T0 or the data amplitude");
}

}  // namespace geoptics
