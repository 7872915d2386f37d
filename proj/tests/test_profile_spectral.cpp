#include "fixtures.hpp"
#include "oracles.hpp"

#include "geoptics/profile_spectral.hpp"

#include <doctest.h>

#include <random>

using namespace geoptics;

namespace {

// Scalar transport d_t u + a1 d_y u + a2 d_x u = 0 with one incoming boundary condition.
SystemSpec scalar_transport(double a1, double a2) {
  Mat A1(1, 1), A2(1, 1), B0(1, 1);
  A1 << a1;
  A2 << a2;
  B0 << 1.0;
  return make_affine_system({A1, A2}, {}, Mat::Zero(1, 1), B0, "scalar");
}

GridSpec small_grid() {
  GridSpec gs;
  gs.nt = 256;
  gs.dt = 0.025;
  gs.nx = 101;
  gs.dx = 0.005;
  gs.K = 2;
  gs.P = 8;
  return gs;
}

double window(double t) { return smooth_step(t / 1.2) * std::exp(-std::pow((t - 1.3) / 0.4, 2)); }

}  // namespace

TEST_SUITE("profile_spectral") {
  TEST_CASE("preparation keeps multiples of n_q") {
    Series f{1.0, 2.0, 3.0, 4.0, 5.0};  // n = -2..2
    Series p = prepare(f, 2);
    CHECK(p[0] == cd(1.0));
    CHECK(p[1] == cd(0.0));
    CHECK(p[2] == cd(3.0));
    CHECK(p[3] == cd(0.0));
    CHECK(p[4] == cd(5.0));
  }

  TEST_CASE("single harmonics with (2,1,1) give i e^{2 i theta}") {
    Series f(7, 0.0), g(7, 0.0);
    f[3 + 1] = 1.0;
    g[3 + 1] = 1.0;
    Series J = interaction_integral(f, g, 2, 1, 1, 3);
    for (int n = -3; n <= 3; ++n) CHECK(std::abs(J[n + 3] - (n == 2 ? cd(0.0, 1.0) : cd(0.0))) < 1e-15);
  }

  TEST_CASE("spectral interaction integral matches direct quadrature") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n01;
    const int K = 4;
    for (auto [np, nq, nr] : {std::tuple{2, 1, 1}, std::tuple{3, 1, 2}, std::tuple{1, 2, -1}}) {
      Series f(2 * K + 1), g(2 * K + 1);
      for (auto& z : f) z = cd(n01(rng), n01(rng));
      for (auto& z : g) z = cd(n01(rng), n01(rng));
      Series J = interaction_integral(f, g, np, nq, nr, 12);
      for (double th : {0.0, 0.7, 2.1, 4.4}) {
        cd series = 0.0;
        for (int n = -12; n <= 12; ++n) series += J[n + 12] * std::exp(kI * (double(n) * th));
        const cd quad = oracles::prepared_integral_quadrature(f, g, np, nq, nr, th, 64);
        CHECK(std::abs(series - quad) < 1e-10 * (1.0 + std::abs(quad)));
      }
    }
  }

  TEST_CASE("linear scalar profile is the boundary data transported along characteristics") {
    const double a1 = 0.3, a2 = 2.0;
    SystemSpec sys = scalar_transport(a1, a2);
    ModeTable mt = compute_modes(sys, {1.0, 0.5});
    REQUIRE(mt.M() == 1);
    ResonanceSet rs = find_resonances(mt, make_lattice(mt, 4));
    SpectralGrid g(small_grid());
    BoundaryField G(1, g.nh(), 1, g.nf());
    const double amp = 0.05;
    for (int f = 0; f < g.nf(); ++f) {
      const double w = 0.5 * amp * window(g.t(g.it_of(f)));
      G.at(0, g.K() + 1, 0)[f] = w;
      G.at(0, g.K() - 1, 0)[f] = w;
    }
    ProfileSolver ps(sys, mt, rs, g);
    HyperbolicOptions ho;
    ho.quadratic = false;
    HyperbolicResult hr = ps.picard_solve_hyperbolic(G, ho);
    const cd r = mt.r[0](0, 0);
    double err = 0.0;
    for (int ix = 0; ix < g.nx(); ix += 10)
      for (int f = 0; f < g.nf(); ++f) {
        if (!g.in_window(f)) continue;
        const cd v = hr.profiles.sigma[0][0].at(ix, g.K() + 1, 0)[f] * r;
        err = std::max(err, std::abs(v - 0.5 * amp * window(g.t(g.it_of(f)) - g.x(ix) / a2)));
      }
    CHECK(err < 1e-6 * amp);
  }
}
