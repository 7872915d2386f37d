#include "fixtures.hpp"

#include "geoptics/singular_reference.hpp"

#include <doctest.h>

using namespace geoptics;

namespace {

double window(double t) { return smooth_step(t / 1.2) * std::exp(-std::pow((t - 1.3) / 0.4, 2)); }

}  // namespace

TEST_SUITE("singular_reference") {
  TEST_CASE("zero data gives the zero solution") {
    GridSpec gs;
    gs.nt = 64;
    gs.dt = 0.1;
    gs.nx = 51;
    gs.dx = 0.01;
    gs.K = 2;
    gs.P = 8;
    SpectralGrid g(gs);
    SystemSpec sys = fixtures::euler2d();
    SingularSolver s(sys, g, {2.0, 1.0}, 0.1);
    BoundaryField G(1, g.nh(), 1, g.nf());
    SingularResult r = s.solve(G, {});
    CHECK(r.U.max_abs() == 0.0);
  }

  TEST_CASE("scalar transport matches the method of characteristics") {
    const double a1 = 0.3, a2 = 2.0, tau = 1.0, eta = 0.5, eps = 0.1, amp = 0.05;
    Mat A1(1, 1), A2(1, 1), B0(1, 1);
    A1 << a1;
    A2 << a2;
    B0 << 1.0;
    SystemSpec sys = make_affine_system({A1, A2}, {}, Mat::Zero(1, 1), B0, "scalar");
    GridSpec gs;
    gs.nt = 256;
    gs.dt = 0.025;
    gs.nx = 101;
    gs.dx = 0.005;
    gs.K = 2;
    gs.P = 8;
    SpectralGrid g(gs);
    BoundaryField G(1, g.nh(), 1, g.nf());
    for (int f = 0; f < g.nf(); ++f) {
      const double w = 0.5 * amp * window(g.t(g.it_of(f)));
      G.at(0, g.K() + 1, 0)[f] = w;
      G.at(0, g.K() - 1, 0)[f] = w;
    }
    SingularSolver s(sys, g, {tau, eta}, eps);
    SingularResult r = s.solve(G, {});
    std::vector<cd> buf(g.nf());
    double err = 0.0;
    for (int ix = 0; ix < g.nx(); ix += 5) {
      std::copy(r.U.at(ix, g.K() + 1, 0), r.U.at(ix, g.K() + 1, 0) + g.nf(), buf.begin());
      g.backward(buf.data());
      const double x = g.x(ix);
      const cd rot = std::exp(-kI * ((tau + a1 * eta) * x / (a2 * eps)));
      for (int f = 0; f < g.nf(); ++f) {
        if (!g.in_window(f)) continue;
        err = std::max(err, std::abs(buf[f] - 0.5 * amp * window(g.t(f) - x / a2) * rot));
      }
    }
    CHECK(err < 1e-6 * amp);
  }

  TEST_CASE("norms vanish on zero and satisfy the triangle inequality") {
    GridSpec gs;
    gs.nt = 32;
    gs.dt = 0.2;
    gs.nx = 11;
    gs.dx = 0.1;
    gs.K = 1;
    gs.P = 4;
    SpectralGrid g(gs);
    Field a(g.nx(), g.nh(), 2, g.nf()), b = a;
    CHECK(es_norm(g, a).total() == 0.0);
    for (size_t i = 0; i < a.data.size(); ++i) {
      a.data[i] = cd(std::sin(0.37 * i), std::cos(0.11 * i));
      b.data[i] = cd(std::cos(0.73 * i), 0.2);
    }
    Field c = a;
    for (size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    CHECK(es_norm(g, c).total() <= es_norm(g, a).total() + es_norm(g, b).total() + 1e-12);
  }
}
