#include "geoptics/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

namespace geoptics {

void Field::zero() { std::fill(data.begin(), data.end(), cd(0.0)); }

double Field::max_abs() const {
  double m = 0.0;
  for (const auto& v : data) m = std::max(m, std::abs(v));
  return m;
}

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

cd phi1(cd z) {
  if (std::abs(z) < 1e-3) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
  return (std::exp(z) - 1.0) / z;
}

cd phi2(cd z) {
  if (std::abs(z) < 1e-3) return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0;
  return (std::exp(z) - 1.0 - z) / (z * z);
}

namespace {
fftw_complex* fc(cd* p) { return reinterpret_cast<fftw_complex*>(p); }

double angular(int k, int n, double period) {
  int kk = (k <= n / 2) ? k : k - n;
  if (n % 2 == 0 && k == n / 2) kk = 0;  // drop the unpaired Nyquist mode in derivatives
  return 2.0 * kPi * kk / period;
}
}  // namespace

SpectralGrid::SpectralGrid(const GridSpec& spec) : s_(spec) {
  if (s_.nt < 4 || s_.ny < 1 || s_.nx < 3 || s_.dt <= 0 || s_.dx <= 0 || s_.K < 0)
    fail(ErrorKind::InvalidInput, "grid", "grid sizes and steps must be positive");
  if (s_.P < 3 * s_.K + 1) fail(ErrorKind::InvalidInput, "grid", "theta collocation count must be >= 3K+1");
  gamma_ = s_.gamma_L / period();
  sig_.resize(s_.nt);
  for (int k = 0; k < s_.nt; ++k) sig_[k] = angular(k, s_.nt, period());
  vsig_.resize(s_.ny);
  for (int k = 0; k < s_.ny; ++k) vsig_[k] = s_.ny == 1 ? 0.0 : angular(k, s_.ny, s_.Ly);
  wfwd_.resize(s_.nt);
  wbwd_.resize(s_.nt);
  for (int it = 0; it < s_.nt; ++it) {
    wfwd_[it] = std::exp(-gamma_ * t(it)) / double(nf());
    wbwd_[it] = std::exp(gamma_ * t(it));
  }
  std::vector<cd> tmp(nf());
  plan_fwd_ = fftw_plan_dft_2d(s_.ny, s_.nt, fc(tmp.data()), fc(tmp.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_bwd_ = fftw_plan_dft_2d(s_.ny, s_.nt, fc(tmp.data()), fc(tmp.data()), FFTW_BACKWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
}

SpectralGrid::~SpectralGrid() {
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

double SpectralGrid::source_cutoff(double tt) const {
  if (s_.T1 <= s_.T0) return tt <= s_.T0 ? 1.0 : 0.0;
  return 1.0 - smooth_step((tt - s_.T0) / (s_.T1 - s_.T0));
}

bool SpectralGrid::in_window(int f) const {
  const double tt = t(it_of(f));
  return tt >= -1e-12 && tt <= s_.T0 + 1e-12;
}

void SpectralGrid::forward(cd* block) const {
  for (int f = 0; f < nf(); ++f) block[f] *= wfwd_[it_of(f)];
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), fc(block), fc(block));
}

void SpectralGrid::backward(cd* block) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), fc(block), fc(block));
  for (int f = 0; f < nf(); ++f) block[f] *= wbwd_[it_of(f)];
}

void SpectralGrid::forward_field(Field& fld) const {
  const long nb = static_cast<long>(fld.nx) * fld.nh * fld.nc;
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) forward(fld.data.data() + b * fld.nf);
}

void SpectralGrid::backward_field(Field& fld) const {
  const long nb = static_cast<long>(fld.nx) * fld.nh * fld.nc;
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) backward(fld.data.data() + b * fld.nf);
}

void SpectralGrid::physical_derivative(const cd* spec, int a, int b, cd* out) const {
  for (int f = 0; f < nf(); ++f) {
    cd m = 1.0;
    for (int i = 0; i < a; ++i) m *= dt_symbol(f);
    for (int i = 0; i < b; ++i) m *= dy_symbol(f);
    out[f] = m * spec[f];
  }
  backward(out);
}

LinearSweeper::LinearSweeper(const SystemSpec& sys, const SpectralGrid& g, const std::vector<double>& beta,
                             double eps, std::vector<int> harmonics)
    : g_(g), N_(sys.N), p_(sys.p), harm_(std::move(harmonics)) {
  const int N = N_;
  const int d = sys.d;
  const Mat Ad = sys.A0(d);
  const Eigen::PartialPivLU<Mat> lu(Ad);
  std::vector<CMat> At(d);
  for (int j = 0; j < d; ++j) At[j] = lu.solve(j == 0 ? Mat::Identity(N, N) : sys.A0(j)).cast<cd>();
  const CMat B0 = sys.B0.cast<cd>();
  const double h = g.spec().dx;
  blocks_.resize(harm_.size() * g.nf());
  for (size_t hi = 0; hi < harm_.size(); ++hi) {
    const double kf = harm_[hi] == 0 ? 0.0 : harm_[hi] / eps;
    for (int f = 0; f < g.nf(); ++f) {
      const cd tau = kf * beta[0] + cd(g.sigma(f), -g.gamma());
      CMat A = tau * At[0];
      for (int j = 1; j < d; ++j) {
        const double vs = (j == 1) ? g.varsigma(f) : 0.0;
        A += (kf * beta[j] + vs) * At[j];
      }
      A *= -kI;
      Eigen::ComplexEigenSolver<CMat> es(A);
      if (es.info() != Eigen::Success) fail(ErrorKind::NearSingular, "sweep", "eigen-decomposition failed");
      const CMat V = es.eigenvectors();
      const CVec mu = es.eigenvalues();
      Eigen::JacobiSVD<CMat> svd(V);
      const double cond = svd.singularValues()(0) / svd.singularValues()(N - 1);
      if (!(cond < 1e12)) fail(ErrorKind::NearSingular, "sweep", "eigenvector basis is ill-conditioned");
      max_cond_ = std::max(max_cond_, cond);
      const CMat Vinv = V.inverse();
      Block& b = blocks_[hi * g.nf() + f];
      b.V.resize(N * N);
      b.Vinv.resize(N * N);
      for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
          b.V[r * N + c] = V(r, c);
          b.Vinv[r * N + c] = Vinv(r, c);
        }
      b.E.resize(N);
      b.P1.resize(N);
      b.P2.resize(N);
      b.stable.resize(N);
      for (int c = 0; c < N; ++c) {
        const bool st = mu(c).real() < 0.0;
        b.stable[c] = st;
        const cd z = st ? mu(c) * h : -mu(c) * h;
        b.E[c] = std::exp(z);
        b.P1[c] = h * phi1(z);
        b.P2[c] = h * phi2(z);
        (st ? b.s_idx : b.u_idx).push_back(c);
      }
      if (static_cast<int>(b.s_idx.size()) != p_)
        fail(ErrorKind::GlancingOrSingular, "sweep", "stable subspace dimension differs from p");
      CMat Vs(N, p_), Vu(N, N - p_);
      for (int i = 0; i < p_; ++i) Vs.col(i) = V.col(b.s_idx[i]);
      for (int i = 0; i < N - p_; ++i) Vu.col(i) = V.col(b.u_idx[i]);
      if (p_ > 0) {
        CMat BV = B0 * Vs;
        Eigen::JacobiSVD<CMat> sb(BV);
        if (sb.singularValues()(p_ - 1) < 1e-12 * std::max(1.0, sb.singularValues()(0)))
          fail(ErrorKind::StabilityFail, "sweep", "boundary matrix singular on the stable subspace");
        b.bnd_inv = BV.inverse();
        b.BVu = B0 * Vu;
      }
    }
  }
}

void LinearSweeper::solve(const Field& R, const std::vector<cd>& G, Field& U) const {
  const int N = N_, nf = g_.nf(), nx = g_.nx(), nh = this->nh();
  if (R.nx != nx || R.nh != nh || R.nc != N || R.nf != nf) fail(ErrorKind::InvalidInput, "sweep", "source shape");
  if (U.nx != nx || U.nh != nh || U.nc != N || U.nf != nf) U = Field(nx, nh, N, nf);
  // Source in eigen-coordinates, written into U.
#pragma omp parallel for schedule(static)
  for (int ix = 0; ix < nx; ++ix)
    for (int hi = 0; hi < nh; ++hi)
      for (int f = 0; f < nf; ++f) {
        const Block& b = blocks_[hi * nf + f];
        cd r[8];
        for (int c = 0; c < N; ++c) r[c] = R.at(ix, hi, c)[f];
        for (int c = 0; c < N; ++c) {
          cd s = 0.0;
          for (int k = 0; k < N; ++k) s += b.Vinv[c * N + k] * r[k];
          U.at(ix, hi, c)[f] = s;
        }
      }
  // Unstable components, swept from x_d = X toward the boundary.
  std::vector<cd> g0(static_cast<size_t>(nh) * N * nf);
#pragma omp parallel for schedule(static)
  for (int hi = 0; hi < nh; ++hi)
    for (int f = 0; f < nf; ++f) {
      const Block& b = blocks_[hi * nf + f];
      for (int c = 0; c < N; ++c) g0[(static_cast<size_t>(hi) * N + c) * nf + f] = U.at(0, hi, c)[f];
      for (int c : b.u_idx) {
        cd gnext = U.at(nx - 1, hi, c)[f];
        cd w = 0.0;
        U.at(nx - 1, hi, c)[f] = w;
        for (int ix = nx - 2; ix >= 0; --ix) {
          cd& slot = U.at(ix, hi, c)[f];
          const cd gcur = slot;
          w = b.E[c] * w - (b.P1[c] * gnext + b.P2[c] * (gcur - gnext));
          slot = w;
          gnext = gcur;
        }
      }
      // Boundary solve for the stable components, then forward sweep.
      if (p_ > 0) {
        CVec rhs(p_);
        for (int r = 0; r < p_; ++r) rhs(r) = G[(static_cast<size_t>(hi) * p_ + r) * nf + f];
        CVec wu(N - p_);
        for (int i = 0; i < N - p_; ++i) wu(i) = U.at(0, hi, b.u_idx[i])[f];
        if (N - p_ > 0) rhs -= b.BVu * wu;
        CVec ws = b.bnd_inv * rhs;
        for (int i = 0; i < p_; ++i) {
          const int c = b.s_idx[i];
          cd w = ws(i);
          cd gprev = g0[(static_cast<size_t>(hi) * N + c) * nf + f];
          U.at(0, hi, c)[f] = w;
          for (int ix = 1; ix < nx; ++ix) {
            cd& slot = U.at(ix, hi, c)[f];
            const cd gcur = slot;
            w = b.E[c] * w + b.P1[c] * gprev + b.P2[c] * (gcur - gprev);
            slot = w;
            gprev = gcur;
          }
        }
      }
    }
  // Back to state coordinates.
#pragma omp parallel for schedule(static)
  for (int ix = 0; ix < nx; ++ix)
    for (int hi = 0; hi < nh; ++hi)
      for (int f = 0; f < nf; ++f) {
        const Block& b = blocks_[hi * nf + f];
        cd w[8];
        for (int c = 0; c < N; ++c) w[c] = U.at(ix, hi, c)[f];
        for (int r = 0; r < N; ++r) {
          cd s = 0.0;
          for (int k = 0; k < N; ++k) s += b.V[r * N + k] * w[k];
          U.at(ix, hi, r)[f] = s;
        }
      }
}

double hr_slice(const SpectralGrid& g, const cd* slice, int nh, int nc, int r) {
  const int nf = g.nf();
  const int K = (nh - 1) / 2;
  std::vector<cd> buf(nf);
  double sum = 0.0;
  const double cell = g.spec().dt * g.dy();
  for (int h = 0; h < nh; ++h) {
    const double wn = 1.0 + std::abs(h - K);
    for (int c = 0; c < nc; ++c) {
      const cd* blk = slice + (static_cast<size_t>(h) * nc + c) * nf;
      bool nonzero = false;
      for (int f = 0; f < nf && !nonzero; ++f) nonzero = blk[f] != cd(0.0);
      if (!nonzero) continue;
      for (int a = 0; a <= r; ++a)
        for (int b = 0; a + b <= r; ++b) {
          if (b > 0 && g.ny() == 1) continue;
          g.physical_derivative(blk, a, b, buf.data());
          double s = 0.0;
          for (int f = 0; f < nf; ++f)
            if (g.in_window(f)) s += std::norm(buf[f]);
          sum += std::pow(wn, 2.0 * (r - a - b)) * s * cell;
        }
    }
  }
  return std::sqrt(sum);
}

NormReport es_norm(const SpectralGrid& g, const Field& fld, int s) {
  NormReport rep;
  std::vector<double> sup(fld.nx), l2(fld.nx);
#pragma omp parallel for schedule(static)
  for (int ix = 0; ix < fld.nx; ++ix) {
    sup[ix] = hr_slice(g, fld.slice(ix), fld.nh, fld.nc, s - 1);
    const double v = hr_slice(g, fld.slice(ix), fld.nh, fld.nc, s);
    l2[ix] = v * v;
  }
  double acc = 0.0;
  for (int ix = 0; ix < fld.nx; ++ix) {
    rep.sup_part = std::max(rep.sup_part, sup[ix]);
    const double w = (ix == 0 || ix == fld.nx - 1) ? 0.5 : 1.0;
    acc += w * l2[ix] * g.spec().dx;
  }
  rep.l2_part = std::sqrt(acc);
  return rep;
}

double trace_norm(const SpectralGrid& g, const Field& fld, int s) {
  return hr_slice(g, fld.slice(0), fld.nh, fld.nc, s + 1);
}

double linf_physical(const SpectralGrid& g, const Field& fld, const std::vector<double>& beta, double eps,
                     int nshift) {
  const int nf = g.nf(), nh = fld.nh, nc = fld.nc;
  const int K = (nh - 1) / 2;
  std::vector<double> best(fld.nx, 0.0);
#pragma omp parallel for schedule(static)
  for (int ix = 0; ix < fld.nx; ++ix) {
    std::vector<cd> phys(static_cast<size_t>(nh) * nc * nf);
    const cd* sl = fld.slice(ix);
    std::copy(sl, sl + phys.size(), phys.begin());
    for (int b = 0; b < nh * nc; ++b) g.backward(phys.data() + static_cast<size_t>(b) * nf);
    double m = 0.0;
    for (int f = 0; f < nf; ++f) {
      if (!g.in_window(f)) continue;
      const double th = (beta[0] * g.t(g.it_of(f)) + (beta.size() > 1 ? beta[1] * g.y(g.iy_of(f)) : 0.0)) / eps;
      for (int j = 0; j < nshift; ++j) {
        const double theta = th + 2.0 * kPi * j / nshift;
        cd ph[64];
        for (int h = 0; h < nh; ++h) ph[h] = std::exp(kI * (double(h - K) * theta));
        for (int c = 0; c < nc; ++c) {
          cd v = 0.0;
          for (int h = 0; h < nh; ++h) v += phys[(static_cast<size_t>(h) * nc + c) * nf + f] * ph[h];
          m = std::max(m, std::abs(v));
        }
      }
    }
    best[ix] = m;
  }
  return *std::max_element(best.begin(), best.end());
}

}  // namespace geoptics
