#pragma once

#include "geoptics/common.hpp"
#include "geoptics/hyperbolic_system.hpp"

#include <memory>
#include <vector>

namespace geoptics {

// Discretization shared by the profile and singular solvers.  Time is a
// periodic grid carrying the Laplace weight exp(-gamma t), y is periodic, x_d
// is a uniform grid on [0, X], and theta is truncated to harmonics |n| <= K.
struct GridSpec {
  int nt = 256;
  double dt = 0.025;
  double t_start = -0.8;
  int ny = 1;
  double Ly = 2.0 * kPi;
  int nx = 2001;
  double dx = 5e-4;
  int K = 3;
  int P = 12;             // theta collocation points for products, P >= 3K + 1
  double gamma_L = 35.0;  // gamma * period
  double T0 = 2.0;        // end of the error window
  double T1 = 2.5;        // sources are switched off smoothly on [T0, T1]
};

// Contiguous complex array indexed [ix][h][c][f], with f = iy * nt + it.
struct Field {
  int nx = 0, nh = 0, nc = 0, nf = 0;
  std::vector<cd> data;

  Field() = default;
  Field(int nx_, int nh_, int nc_, int nf_)
      : nx(nx_), nh(nh_), nc(nc_), nf(nf_), data(static_cast<size_t>(nx_) * nh_ * nc_ * nf_) {}

  size_t offset(int ix, int h, int c) const {
    return ((static_cast<size_t>(ix) * nh + h) * nc + c) * static_cast<size_t>(nf);
  }
  cd* at(int ix, int h, int c) { return data.data() + offset(ix, h, c); }
  const cd* at(int ix, int h, int c) const { return data.data() + offset(ix, h, c); }
  size_t slice_size() const { return static_cast<size_t>(nh) * nc * nf; }
  cd* slice(int ix) { return data.data() + ix * slice_size(); }
  const cd* slice(int ix) const { return data.data() + ix * slice_size(); }
  void zero();
  double max_abs() const;
};

// Smooth step: 0 for s <= 0, 1 for s >= 1, C-infinity in between.
double smooth_step(double s);

// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2 with series near 0.
cd phi1(cd z);
cd phi2(cd z);

class SpectralGrid {
 public:
  explicit SpectralGrid(const GridSpec& spec);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  const GridSpec& spec() const { return s_; }
  int nt() const { return s_.nt; }
  int ny() const { return s_.ny; }
  int nf() const { return s_.nt * s_.ny; }
  int nx() const { return s_.nx; }
  int K() const { return s_.K; }
  int nh() const { return 2 * s_.K + 1; }
  int harmonic(int h) const { return h - s_.K; }
  double period() const { return s_.nt * s_.dt; }
  double gamma() const { return gamma_; }
  double t(int it) const { return s_.t_start + it * s_.dt; }
  double y(int iy) const { return iy * s_.Ly / s_.ny; }
  double x(int ix) const { return ix * s_.dx; }
  int it_of(int f) const { return f % s_.nt; }
  int iy_of(int f) const { return f / s_.nt; }
  double dy() const { return s_.Ly / s_.ny; }

  // Angular frequencies of spectral index f: sigma (time) and varsigma (y).
  double sigma(int f) const { return sig_[it_of(f)]; }
  double varsigma(int f) const { return vsig_[iy_of(f)]; }
  // d_t of the physical field acts on the weighted transform as i (sigma - i gamma).
  cd dt_symbol(int f) const { return kI * cd(sigma(f), -gamma_); }
  cd dy_symbol(int f) const { return kI * varsigma(f); }

  // Source cutoff chi_T(t): 1 for t <= T0, 0 for t >= T1.
  double source_cutoff(double t) const;
  bool in_window(int f) const;  // 0 <= t <= T0

  // Physical (t, y) block of length nf -> weighted normalized spectrum, in place.
  void forward(cd* block) const;
  void backward(cd* block) const;
  void forward_field(Field& f) const;
  void backward_field(Field& f) const;
  // Spectral block -> physical values of d_t^a d_y^b u (out may alias nothing).
  void physical_derivative(const cd* spec, int a, int b, cd* out) const;

 private:
  GridSpec s_;
  double gamma_ = 0.0;
  std::vector<double> sig_, vsig_, wfwd_, wbwd_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

// Constant-coefficient x_d-march for the Laplace/Fourier transformed system
//   dU/dx_d = Acal U + R,  Acal = -i A_d^{-1}(tau~ I + sum_j eta~_j A_j),
// tau~ = n beta_0/eps + sigma - i gamma, eta~_j = n beta_j/eps + varsigma_j,
// with B0 U(0) = G on the stable subspace and the unstable components
// entering from x_d = X with zero data.  Harmonic h carries n = harmonics[h].
class LinearSweeper {
 public:
  LinearSweeper(const SystemSpec& sys, const SpectralGrid& g, const std::vector<double>& beta, double eps,
                std::vector<int> harmonics);

  // R: spectral source [ix][h][c][f]; G: spectral boundary data [h][row][f].
  void solve(const Field& R, const std::vector<cd>& G, Field& U) const;
  double max_condition() const { return max_cond_; }
  int nh() const { return static_cast<int>(harm_.size()); }

 private:
  struct Block {
    std::vector<cd> V, Vinv;        // N x N, row-major
    std::vector<cd> E, P1, P2;      // per component step coefficients
    std::vector<char> stable;
    std::vector<int> s_idx, u_idx;
    CMat bnd_inv;                   // (B0 V_s)^{-1}
    CMat BVu;                       // B0 V_u
  };
  const SpectralGrid& g_;
  int N_, p_;
  std::vector<int> harm_;
  std::vector<Block> blocks_;  // [h][f]
  double max_cond_ = 1.0;
};

struct NormReport {
  double sup_part = 0.0;  // sup_x H^{s-1}
  double l2_part = 0.0;   // (int |.|_{H^s}^2 dx_d)^{1/2}
  double total() const { return sup_part + l2_part; }
};

// H^r(t, y, theta0) norm of one spectral x-slice over the window 0 <= t <= T0,
// with theta-derivatives through the weights (1 + |n|)^{r - |a|}.
double hr_slice(const SpectralGrid& g, const cd* slice, int nh, int nc, int r);
// Discrete E^{s-1}: sup_x H^{s-1} + L^2_x H^s.
NormReport es_norm(const SpectralGrid& g, const Field& spectral, int s = 2);
// Boundary trace proxy: H^{s+1} norm of the x_d = 0 slice.
double trace_norm(const SpectralGrid& g, const Field& spectral, int s = 2);
// Max over the window, x_d, and nshift theta0 offsets of the evaluation at
// theta0 = beta.x'/eps + 2 pi j / nshift (max-abs over components).
double linf_physical(const SpectralGrid& g, const Field& spectral, const std::vector<double>& beta, double eps,
                     int nshift = 16);

}  // namespace geoptics
