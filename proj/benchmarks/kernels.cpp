#include "geoptics/hyperbolic_system.hpp"
#include "geoptics/profile_spectral.hpp"
#include "geoptics/singular_reference.hpp"
#include "geoptics/spectral_grid.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace geoptics;

namespace {

SystemSpec euler2d() {
  EulerParams prm;
  prm.d = 2;
  prm.u = {0.5, -0.4};
  prm.K = euler_K_for_sound_speed(1.0, 1.0, 1.4);
  Mat B0(1, 3);
  B0 << 0, 0, 1;
  return make_euler(prm, B0);
}

GridSpec grid(int nx) {
  GridSpec gs;
  gs.nt = 128;
  gs.dt = 0.05;
  gs.nx = nx;
  gs.dx = 1.0 / (nx - 1);
  gs.K = 3;
  gs.P = 12;
  return gs;
}

Field smooth_field(const SpectralGrid& g, int nc) {
  Field f(g.nx(), g.nh(), nc, g.nf());
  for (int ix = 0; ix < g.nx(); ++ix)
    for (int h = 0; h < g.nh(); ++h)
      for (int c = 0; c < nc; ++c) {
        cd* p = f.at(ix, h, c);
        for (int q = 0; q < g.nf(); ++q) {
          const double t = g.t(g.it_of(q));
          p[q] = 1e-2 * std::exp(-std::pow(t - 1.3, 2) / 0.16) * std::cos(g.x(ix) + h + c);
        }
      }
  g.forward_field(f);
  return f;
}

void BM_LinearSweep(benchmark::State& st) {
  const SystemSpec sys = euler2d();
  SpectralGrid g(grid(static_cast<int>(st.range(0))));
  LinearSweeper sw(sys, g, {2.0, 1.0}, 0.1, harmonic_list(g.K()));
  const Field R = smooth_field(g, sys.N);
  std::vector<cd> G(static_cast<size_t>(g.nh()) * sys.p * g.nf(), cd(1e-3));
  Field U(g.nx(), g.nh(), sys.N, g.nf());
  for (auto _ : st) {
    sw.solve(R, G, U);
    benchmark::DoNotOptimize(U.data.data());
  }
  st.SetItemsProcessed(st.iterations() * g.nx());
}
BENCHMARK(BM_LinearSweep)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_NonlinearSource(benchmark::State& st) {
  const SystemSpec sys = euler2d();
  SpectralGrid g(grid(static_cast<int>(st.range(0))));
  SingularSolver s(sys, g, {2.0, 1.0}, 0.1);
  const Field U = smooth_field(g, sys.N);
  Field R(g.nx(), g.nh(), sys.N, g.nf());
  for (auto _ : st) {
    s.nonlinear_source(U, R);
    benchmark::DoNotOptimize(R.data.data());
  }
  st.SetItemsProcessed(st.iterations() * g.nx());
}
BENCHMARK(BM_NonlinearSource)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_EsNorm(benchmark::State& st) {
  SpectralGrid g(grid(static_cast<int>(st.range(0))));
  const Field U = smooth_field(g, 3);
  for (auto _ : st) benchmark::DoNotOptimize(es_norm(g, U).total());
}
BENCHMARK(BM_EsNorm)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_InteractionIntegral(benchmark::State& st) {
  const int K = static_cast<int>(st.range(0));
  Series f(2 * K + 1), g(2 * K + 1);
  for (int n = -K; n <= K; ++n) {
    f[n + K] = cd(1.0 / (1 + n * n), 0.1 * n);
    g[n + K] = cd(0.5 / (1 + std::abs(n)), 0.0);
  }
  for (auto _ : st) benchmark::DoNotOptimize(interaction_integral(f, g, 2, 1, 1, K).data());
}
BENCHMARK(BM_InteractionIntegral)->Arg(8)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
