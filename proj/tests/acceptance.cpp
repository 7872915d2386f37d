// Acceptance report: one PASS/FAIL line per criterion with the tolerances pinned below.
// The exit status counts failures outside kKnownFailures.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "geoptics/assembly_error.hpp"
#include "geoptics/config.hpp"
#include "geoptics/corrector.hpp"
#include "geoptics/elliptic_layer.hpp"
#include "geoptics/pipeline.hpp"
#include "geoptics/profile_spectral.hpp"
#include "geoptics/trig_polynomial.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace geoptics;
namespace fs = std::filesystem;

namespace {

namespace tol {
constexpr double eig = 1e-10;
constexpr double decomposition = 1e-10;
constexpr double classifier_band = 1e-2;
constexpr double interaction = 1e-8;
constexpr double corrector = 1e-10;
constexpr double substitution = 1e-10;
constexpr double trace_order = 1.8;
constexpr double support = 1e-13;
constexpr double energy = 1e-6;
constexpr double decay_slope = 0.5, decay_slope_tol = 0.1;
constexpr double c1_s = 1.0, c2_s = 1.0, c3_s = 10.0, c4_s = 30.0, c5_s = 5.0, c8_s = 60.0,
                 c9_s = 1800.0;
}  // namespace tol

// Criterion 8 asks for an L2 slope of 1/2 for a residual of the form x_d e^{i theta_p} b(t).
// Substituting x_d = eps xi_d gives eps * xi_d e^{-c xi_d}, whose L2 norm in x_d scales like
// eps^{3/2}, so the target is not reachable for this residual.
const std::map<int, std::string> kKnownFailures = {
    {8, "a residual linear in x_d decays like eps^1.5 in L2, not eps^0.5"}};

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit = 0.0;  // 0: no runtime bound
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt("%.4g", v[i]);
  return s + "]";
}

double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

int rank_of(const CMat& m, double rel) {
  Eigen::JacobiSVD<CMat> svd(m);
  svd.setThreshold(rel);
  return static_cast<int>(svd.rank());
}

// ---------------------------------------------------------------------------

Outcome c1_multiplicity() {
  Outcome o{1, "3D Euler multiplicities (1,2,1) and eigenvalues u.xi +- c|xi|, u.xi"};
  const auto t0 = Clock::now();
  EulerParams prm;
  prm.d = 3;
  prm.u = {0.3, -0.2, -0.5};
  prm.K = euler_K_for_sound_speed(1.0, 1.0, 1.4);
  Mat B0(1, 4);
  B0 << 0, 0, 0, 1;
  const SystemSpec sys = make_euler(prm, B0);
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n01;
  std::vector<Sample> samples(100);
  for (auto& s : samples) {
    s.u = Vec(4);
    for (int i = 0; i < 4; ++i) s.u(i) = 0.1 * n01(rng);
    s.xi = Vec(3);
    for (int j = 0; j < 3; ++j) s.xi(j) = n01(rng);
  }
  const MultiplicityReport r = check_constant_multiplicity(sys, samples);
  double err = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const double rho = prm.rho + s.u(0);
    const double c = std::sqrt(prm.K * prm.gamma_exp * std::pow(rho, prm.gamma_exp - 1.0));
    double uxi = 0.0;
    for (int j = 0; j < 3; ++j) uxi += (prm.u[j] + s.u(1 + j)) * s.xi(j);
    const double nx = s.xi.norm();
    std::vector<double> want{uxi - c * nx, uxi, uxi, uxi + c * nx};
    const std::vector<double>& got = r.eigenvalues[i];
    if (got.size() != 4) {
      err = INFINITY;
      continue;
    }
    for (int k = 0; k < 4; ++k) err = std::max(err, std::abs(got[k] - want[k]) / (1.0 + std::abs(want[k])));
  }
  o.seconds = since(t0);
  o.limit = tol::c1_s;
  const bool mult = r.pass && r.multiplicities == std::vector<int>{1, 2, 1};
  o.pass = mult && err < tol::eig && o.seconds < o.limit;
  o.detail = std::string("multiplicities ") + (mult ? "(1,2,1)" : "wrong") + ", max eigenvalue error " +
             fmt("%.2e", err) + " over 100 samples";
  return o;
}

// ---------------------------------------------------------------------------

struct FixtureTable {
  std::string name;
  SystemSpec sys;
  ModeTable mt;
};

std::vector<FixtureTable> fixture_tables() {
  std::vector<FixtureTable> out;
  auto add = [&](const std::string& name, SystemSpec sys, std::vector<double> beta) {
    ModeTable mt = compute_modes(sys, beta);
    out.push_back({name, std::move(sys), std::move(mt)});
  };
  add("euler2d beta=(2,1)", fixtures::euler2d(), {2.0, 1.0});
  add("euler2d beta=(0,1)", fixtures::euler2d(), {0.0, 1.0});
  add("euler3d outflow beta=(1,0.3,0.2)", fixtures::euler3d_outflow(), {1.0, 0.3, 0.2});
  add("euler3d outflow beta=(0,1,0.5)", fixtures::euler3d_outflow(), {0.0, 1.0, 0.5});
  add("resonant diagonal beta=(-6,0)", fixtures::resonant_diagonal(), {-6.0, 0.0});
  const RunConfig sup = load_config(fixtures::config_path("euler3d_supersonic_inflow.json"));
  add("euler3d supersonic inflow", build_system(sup), sup.beta);
  return out;
}

Outcome c2_decomposition() {
  Outcome o{2, "mode decomposition identities on every fixture table"};
  const auto t0 = Clock::now();
  double e_sum = 0, e_orth = 0, e_lr = 0, e_img = 0, e_real = 0;
  int rank_bad = 0, tables = 0;
  for (const FixtureTable& ft : fixture_tables()) {
    ++tables;
    const ModeTable& mt = ft.mt;
    const int N = mt.N;
    CMat S = CMat::Zero(N, N);
    for (int m = 0; m < mt.M(); ++m) {
      S += mt.P[m];
      for (int m2 = 0; m2 < mt.M(); ++m2) {
        const CMat want = m == m2 ? mt.P[m] : CMat::Zero(N, N);
        e_orth = std::max(e_orth, max_abs(mt.P[m] * mt.P[m2] - want));
      }
      e_lr = std::max(e_lr, max_abs(mt.l[m] * mt.r[m] - CMat::Identity(mt.mult[m], mt.mult[m])));
      // Image of A_d^{-1} L(d phi_m) equals the kernel of P_m.
      const CMat Lt = Ltilde_of(ft.sys, mt.beta, mt.omega[m]);
      e_img = std::max(e_img, max_abs(mt.P[m] * Lt) / (1.0 + max_abs(Lt)));
      const int rk = rank_of(Lt, 1e-9);
      const int rk_ker = rank_of(CMat::Identity(N, N) - mt.P[m], 1e-9);
      if (rk != N - mt.mult[m] || rk_ker != rk) ++rank_bad;
      if (is_hyperbolic(mt.cls[m])) e_real = std::max(e_real, mt.r[m].imag().cwiseAbs().maxCoeff());
    }
    e_sum = std::max(e_sum, max_abs(S - CMat::Identity(N, N)));
  }
  o.seconds = since(t0);
  o.limit = tol::c2_s;
  const double worst = std::max({e_sum, e_orth, e_lr, e_img, e_real});
  o.pass = worst < tol::decomposition && rank_bad == 0 && o.seconds < o.limit;
  o.detail = std::to_string(tables) + " tables; |sum P - I| " + fmt("%.1e", e_sum) + ", |P P' - delta P| " +
             fmt("%.1e", e_orth) + ", |l r - I| " + fmt("%.1e", e_lr) + ", |P_m A_d^-1 L_m| " + fmt("%.1e", e_img) +
             ", rank mismatches " + std::to_string(rank_bad) + ", |Im r| on I u O " + fmt("%.1e", e_real);
  return o;
}

// ---------------------------------------------------------------------------

Outcome c3_classifier() {
  Outcome o{3, "regular-frequency classifier vs the analytic elliptic/hyperbolic boundary"};
  const auto t0 = Clock::now();
  const SystemSpec sys = fixtures::euler2d();
  const double u1 = 0.5, u2 = -0.4, c = 1.0;
  int checked = 0, wrong = 0, skipped = 0, errors = 0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const double tau = -2.0 + 4.0 * i / 49.0, eta = -2.0 + 4.0 * j / 49.0;
      const double gap = std::abs(tau + u1 * eta) - std::sqrt(c * c - u2 * u2) * std::abs(eta);
      if (std::abs(gap) < tol::classifier_band) {
        ++skipped;
        continue;
      }
      ++checked;
      try {
        const ModeTable mt = compute_modes(sys, {tau, eta});
        int elliptic = 0;
        for (ModeClass k : mt.cls) elliptic += is_elliptic(k);
        if ((gap > 0) != (elliptic == 0)) ++wrong;
      } catch (const Error&) {
        ++errors;
      }
    }
  o.seconds = since(t0);
  o.limit = tol::c3_s;
  o.pass = wrong == 0 && errors == 0 && o.seconds < o.limit;
  o.detail = std::to_string(checked) + " grid points checked, " + std::to_string(skipped) + " inside the band, " +
             std::to_string(wrong) + " misclassified, " + std::to_string(errors) + " rejected as irregular";
  return o;
}

// ---------------------------------------------------------------------------

Outcome c4_resonances() {
  Outcome o{4, "resonance search equals brute force for bounds {4,6,8}"};
  const auto t0 = Clock::now();
  struct Set {
    std::string name;
    std::vector<cd> w;
    std::vector<ModeClass> cls;
  };
  std::vector<Set> sets{
      {"(1,2,3)", {1.0, 2.0, 3.0}, fixtures::all_outgoing(3)},
      {"(1,sqrt2,pi)", {1.0, std::sqrt(2.0), kPi}, fixtures::all_outgoing(3)},
      {"(1,2,3,5)", {1.0, 2.0, 3.0, 5.0}, fixtures::all_outgoing(4)},
      {"elliptic (1,1+2i,1+i)",
       {1.0, cd(1.0, 2.0), cd(1.0, 1.0)},
       {ModeClass::Incoming, ModeClass::Positive, ModeClass::Positive}},
  };
  for (std::vector<double> beta : {std::vector<double>{2.0, 1.0}, std::vector<double>{0.0, 1.0}}) {
    const ModeTable mt = compute_modes(fixtures::euler2d(), beta);
    sets.push_back({"euler2d beta=(" + fmt("%g", beta[0]) + "," + fmt("%g", beta[1]) + ")", mt.omega, mt.cls});
  }
  int mismatches = 0;
  bool unique_123 = false, empty_irr = false;
  for (const Set& s : sets)
    for (int B : {4, 6, 8}) {
      const ResonanceSet rs = find_resonances(s.w, s.cls, make_lattice(s.cls, B));
      const int M = static_cast<int>(s.w.size());
      const bool same = oracles::library_families(rs, M) == oracles::brute_families(s.w, s.cls, B, 1e-10) &&
                        oracles::library_characteristic(rs) == oracles::brute_characteristic(s.w, s.cls, B, 1e-10);
      if (!same) ++mismatches;
      if (s.name == "(1,2,3)" && B == 8)
        unique_123 = rs.triples.size() == 1 && family_key(rs.triples[0], 3) == std::vector<int>{1, -2, 1};
      if (s.name == "(1,sqrt2,pi)" && B == 8) empty_irr = rs.triples.empty();
    }
  o.seconds = since(t0);
  o.limit = tol::c4_s;
  o.pass = mismatches == 0 && unique_123 && empty_irr && o.seconds < o.limit;
  o.detail = std::to_string(sets.size()) + " mode sets x 3 bounds, " + std::to_string(mismatches) +
             " mismatches; (1,2,3) unique family " + (unique_123 ? "yes" : "no") + "; (1,sqrt2,pi) empty " +
             (empty_irr ? "yes" : "no");
  return o;
}

// ---------------------------------------------------------------------------

Outcome c5_interaction() {
  Outcome o{5, "interaction integral vs quadrature"};
  const auto t0 = Clock::now();
  std::mt19937_64 rng(55);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> pick(-3, 3);
  std::uniform_real_distribution<double> th(0.0, 2.0 * kPi);
  const int K = 4, Kout = 24;
  double err = 0.0;
  int pairs = 0;
  while (pairs < 50) {
    const int nq = pick(rng), nr = pick(rng), np = nq + nr;
    if (nq == 0 || nr == 0 || np == 0) continue;
    ++pairs;
    Series f(2 * K + 1), g(2 * K + 1);
    for (auto& z : f) z = cd(n01(rng), n01(rng));
    for (auto& z : g) z = cd(n01(rng), n01(rng));
    const Series J = interaction_integral(f, g, np, nq, nr, Kout);
    for (int s = 0; s < 4; ++s) {
      const double t = th(rng);
      cd series = 0.0;
      for (int n = -Kout; n <= Kout; ++n) series += J[n + Kout] * std::exp(kI * (double(n) * t));
      const cd quad = oracles::prepared_integral_quadrature(f, g, np, nq, nr, t, 96);
      err = std::max(err, std::abs(series - quad) / (1.0 + std::abs(quad)));
    }
  }
  Series f(5, 0.0), g(5, 0.0);
  f[3] = g[3] = 1.0;
  const Series J = interaction_integral(f, g, 2, 1, 1, 2);
  double e211 = 0.0;
  for (int n = -2; n <= 2; ++n) e211 = std::max(e211, std::abs(J[n + 2] - (n == 2 ? kI : cd(0.0))));
  o.seconds = since(t0);
  o.limit = tol::c5_s;
  o.pass = err < tol::interaction && e211 < 1e-15 && o.seconds < o.limit;
  o.detail = "50 random pairs, max relative error " + fmt("%.2e", err) + "; (2,1,1) single harmonics error " +
             fmt("%.1e", e211);
  return o;
}

// ---------------------------------------------------------------------------

Outcome c6_corrector() {
  Outcome o{6, "corrector exactness on pipeline forcing and substitution of E-flat"};
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(fixtures::config_path("golden.json"));
  const SystemSpec sys = build_system(cfg);
  const ModeTable mt = compute_modes(sys, cfg.beta);
  const SpectrumLattice lat = make_lattice(mt, cfg.resonance_bound);
  const ResonanceSet rs = find_resonances(mt, lat, cfg.tol.resonance);
  SpectralGrid g(cfg.grid);
  const BoundaryField G = build_boundary_data(cfg, g, sys.p);
  ProfileSolver ps(sys, mt, rs, g);
  HyperbolicOptions ho;
  ho.tol = cfg.tol.profile;
  ho.max_iter = cfg.tol.profile_max_iter;
  const HyperbolicResult prof = ps.picard_solve_hyperbolic(G, ho);
  CorrectorBuilder cb(sys, mt, rs, g, prof.profiles);
  double res = 0.0, hmax = 0.0, sub = 0.0;
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> th(0.0, 2.0 * kPi), xi(0.0, 5.0);
  int points = 0;
  for (int ix = 0; ix < g.nx(); ix += 10) {
    const TrigPolynomial H = cb.interior_H(ix);
    hmax = std::max(hmax, H.max_abs());
    const CorrectorResult c = cb.corrector_at(ix);
    res = std::max(res, (apply_L_theta(sys, mt, c.V) + cb.flat_complement(H)).max_abs());
    const TrigPolynomial a = H - project_Eflat(H, rs, mt), b = H - project_E(H, rs, mt);
    for (int s = 0; s < 10 && points < 100; ++s, ++points) {
      const double t = th(rng), x = xi(rng);
      sub = std::max(sub, max_abs(substitute(a, rs.omega, lat, t, x) - substitute(b, rs.omega, lat, t, x)));
    }
  }
  // The same identity where a genuine three-phase resonance is present.
  {
    const SystemSpec rsys = fixtures::resonant_diagonal();
    const ModeTable rmt = compute_modes(rsys, {-6.0, 0.0});
    const SpectrumLattice rlat = make_lattice(rmt, 4);
    const ResonanceSet rrs = find_resonances(rmt, rlat);
    std::normal_distribution<double> n01;
    TrigPolynomial V(3, 3);
    for (const Alpha& al : std::vector<Alpha>{{1, 0, 1}, {2, 0, -1}, {0, 2, 0}, {1, 1, 0}, {0, 0, 0}}) {
      CMat v(3, 1);
      for (int i = 0; i < 3; ++i) v(i, 0) = cd(n01(rng), n01(rng));
      V.add(al, v);
    }
    const TrigPolynomial a = V - project_Eflat(V, rrs, rmt), b = V - project_E(V, rrs, rmt);
    for (int s = 0; s < 100; ++s) {
      const double t = th(rng), x = xi(rng);
      sub = std::max(sub, max_abs(substitute(a, rrs.omega, rlat, t, x) - substitute(b, rrs.omega, rlat, t, x)));
    }
  }
  o.seconds = since(t0);
  o.pass = res < tol::corrector && sub < tol::substitution && hmax > 0.0;
  o.detail = "max |L V1 + (I - E-flat) H| " + fmt("%.2e", res) + " (|H| up to " + fmt("%.2e", hmax) +
             "), max |Phi(I - E-flat) - Phi(I - E)| " + fmt("%.2e", sub) + " at 200 points";
  return o;
}

// ---------------------------------------------------------------------------

double window(double t) { return smooth_step(t / 1.2) * std::exp(-std::pow((t - 1.3) / 0.4, 2)); }

Outcome c7_elliptic() {
  Outcome o{7, "elliptic layer trace order, support and energy"};
  const auto t0 = Clock::now();
  const SystemSpec sys = fixtures::euler2d();
  const ModeTable mt = compute_modes(sys, {0.0, 1.0});
  int pe = -1;
  for (int m = 0; m < mt.M(); ++m)
    if (mt.cls[m] == ModeClass::Positive) pe = m;
  std::vector<double> errs, hs;
  double leak = 0.0, drift = 0.0;
  for (int r : {4, 8, 16}) {
    GridSpec gs;
    gs.nt = 128;
    gs.dt = 0.05;
    gs.dx = gs.dt / r;
    gs.nx = static_cast<int>(std::lround(0.2 / gs.dx)) + 1;
    gs.K = 2;
    gs.P = 8;
    SpectralGrid g(gs);
    TracePair tp{Field(1, g.nh(), 1, g.nf()), Field(1, g.nh(), 1, g.nf())};
    for (int f = 0; f < g.nf(); ++f) {
      const double t = g.t(g.it_of(f));
      tp.a.at(0, g.K() + 1, 0)[f] = window(t);
      tp.b.at(0, g.K() + 1, 0)[f] = cd(0.3, -0.5) * window(t - 0.2);
      tp.a.at(0, g.K() + 2, 0)[f] = 0.5 * window(t + 0.1);
    }
    EllipticOptions eo;
    EllipticReport rep;
    const Field s = build_elliptic_profile(tp, mt, pe, g, eo, &rep);
    leak = std::max(leak, rep.support_leak);
    drift = std::max(drift, rep.energy_drift);
    // d_x sigma at x_d = 0 must reproduce b, since d_x varsigma = b + d_t a there.
    const double h = gs.dx;
    double e = 0.0;
    for (int f = 0; f < g.nf(); ++f) {
      if (!g.in_window(f)) continue;
      const cd dx = (-3.0 * s.at(0, g.K() + 1, 0)[f] + 4.0 * s.at(1, g.K() + 1, 0)[f] - s.at(2, g.K() + 1, 0)[f]) /
                    (2.0 * h);
      e = std::max(e, std::abs(dx - tp.b.at(0, g.K() + 1, 0)[f]));
      e = std::max(e, std::abs(s.at(0, g.K() + 1, 0)[f] - tp.a.at(0, g.K() + 1, 0)[f]));
    }
    errs.push_back(e);
    hs.push_back(h);
  }
  double order = INFINITY;
  for (size_t i = 1; i < errs.size(); ++i) order = std::min(order, std::log(errs[i - 1] / errs[i]) / std::log(2.0));
  o.seconds = since(t0);
  o.pass = order >= tol::trace_order && leak < tol::support && drift < tol::energy;
  o.detail = "derivative-trace errors " + list(errs) + " for h " + list(hs) + ", observed order " +
             fmt("%.2f", order) + "; max |sigma| for t <= 0 " + fmt("%.1e", leak) + "; energy drift " +
             fmt("%.1e", drift);
  return o;
}

// ---------------------------------------------------------------------------

Outcome c8_decay() {
  Outcome o{8, "decay law of the substituted elliptic residual"};
  const auto t0 = Clock::now();
  const SystemSpec sys = fixtures::euler2d();
  const ModeTable mt = compute_modes(sys, {0.0, 1.0});
  int pe = -1;
  for (int m = 0; m < mt.M(); ++m)
    if (mt.cls[m] == ModeClass::Positive) pe = m;
  GridSpec gs;
  gs.nt = 64;
  gs.dt = 0.1;
  gs.nx = 401;
  gs.dx = 0.005;
  gs.K = 2;
  gs.P = 8;
  SpectralGrid g(gs);
  Field R(g.nx(), g.nh(), 1, g.nf());
  for (int ix = 0; ix < g.nx(); ++ix)
    for (int f = 0; f < g.nf(); ++f) R.at(ix, g.K() + 1, 0)[f] = g.x(ix) * window(g.t(g.it_of(f)));
  const DecayReport d = decay_check(mt, g, {ComponentRef{pe, 0, &R}}, {0.2, 0.1, 0.05, 0.025});
  o.seconds = since(t0);
  o.limit = tol::c8_s;
  o.pass = std::abs(d.l2_slope - tol::decay_slope) <= tol::decay_slope_tol && d.sup_decreasing &&
           o.seconds < o.limit;
  o.detail = "L2 part " + list(d.l2) + " slope " + fmt("%.3f", d.l2_slope) + " (target 0.5 +- 0.1); sup part " +
             list(d.sup) + (d.sup_decreasing ? " strictly decreasing" : " not strictly decreasing");
  return o;
}

// ---------------------------------------------------------------------------

using Table = std::map<std::string, std::vector<double>>;

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::string> header;
  Table t;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ls(s);
    std::string c;
    while (std::getline(ls, c, ',')) out.push_back(c);
    return out;
  };
  if (std::getline(in, line)) header = split(line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    for (size_t i = 0; i < cells.size() && i < header.size(); ++i) t[header[i]].push_back(std::stod(cells[i]));
  }
  return t;
}

struct FixtureRun {
  std::string name;
  Table table;
  double seconds = 0.0;
  std::string error;
};

FixtureRun run_fixture(const std::string& config, const fs::path& dir) {
  FixtureRun fr;
  fr.name = config;
  const auto t0 = Clock::now();
  try {
    const RunConfig cfg = load_config(fixtures::config_path(config));
    fs::remove_all(dir);
    PipelineOptions po;
    po.out_dir = dir.string();
    po.cache_dir = (dir / ".cache").string();
    run_pipeline(cfg, Stage::Run, po);
    fr.table = read_csv(dir / "convergence.csv");
  } catch (const std::exception& e) {
    fr.error = e.what();
  }
  fr.seconds = since(t0);
  return fr;
}

Outcome c9_convergence(const std::vector<FixtureRun>& runs) {
  Outcome o{9, "main convergence on both Euler fixtures"};
  o.limit = tol::c9_s;
  bool ok = true;
  for (const FixtureRun& r : runs) {
    o.seconds += r.seconds;
    if (!r.error.empty()) {
      ok = false;
      o.detail += r.name + ": " + r.error + "; ";
      continue;
    }
    const auto& es = r.table.at("error_es");
    const auto& li = r.table.at("error_linf");
    const bool d1 = strictly_decreasing(es), d2 = strictly_decreasing(li);
    ok = ok && d1 && d2 && es.size() == 3;
    o.detail += r.name + ": E^{s-1} " + list(es) + (d1 ? " decreasing" : " NOT decreasing") + ", L^inf " +
                list(li) + (d2 ? " decreasing" : " NOT decreasing") + "; ";
  }
  o.pass = ok && o.seconds < o.limit;
  return o;
}

Outcome c10_picard(const std::vector<FixtureRun>& runs) {
  Outcome o{10, "Picard iterate diagnostic n = 1..3"};
  bool ok = true;
  for (const FixtureRun& r : runs) {
    if (!r.error.empty()) {
      ok = false;
      continue;
    }
    const auto& eps = r.table.at("eps");
    o.detail += r.name + ":";
    for (int n = 1; n <= 3; ++n) {
      const auto it = r.table.find("picard_" + std::to_string(n));
      if (it == r.table.end()) {
        ok = false;
        o.detail += " n=" + std::to_string(n) + " missing;";
        continue;
      }
      const bool dec = strictly_decreasing(it->second);
      const LinearFit fit = fit_affine(eps, it->second);
      ok = ok && dec;
      o.detail += " n=" + std::to_string(n) + " " + list(it->second) + (dec ? " decreasing" : " NOT decreasing") +
                  ", fit a " + fmt("%.3g", fit.a) + " b " + fmt("%.3g", fit.b) + " residual " +
                  fmt("%.2g", fit.residual) + ";";
    }
    o.detail += " ";
  }
  o.pass = ok;
  return o;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> artifacts(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel.rfind(".cache", 0) == 0 || !e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[rel] = ss.str();
  }
  return out;
}

Outcome c11_determinism(const fs::path& root) {
  Outcome o{11, "golden configuration gives byte-identical artifacts"};
  const auto t0 = Clock::now();
  std::vector<std::map<std::string, std::string>> got;
  try {
    const RunConfig cfg = load_config(fixtures::config_path("golden.json"));
    for (const char* tag : {"golden_a", "golden_b"}) {
      const fs::path dir = root / tag;
      fs::remove_all(dir);
      PipelineOptions po;
      po.out_dir = dir.string();
      po.cache_dir = (dir / ".cache").string();
      run_pipeline(cfg, Stage::Run, po);
      got.push_back(artifacts(dir));
    }
  } catch (const std::exception& e) {
    o.detail = e.what();
    return o;
  }
  int differ = 0;
  for (const auto& [k, v] : got[0]) {
    const auto it = got[1].find(k);
    if (it == got[1].end() || it->second != v) ++differ;
  }
  if (got[0].size() != got[1].size()) ++differ;
  o.seconds = since(t0);
  o.pass = differ == 0 && !got[0].empty();
  o.detail = std::to_string(got[0].size()) + " artifacts compared, " + std::to_string(differ) + " differ";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "geoptics_acceptance";
  fs::create_directories(root);

  std::vector<std::function<Outcome()>> quick{c1_multiplicity, c2_decomposition, c3_classifier, c4_resonances,
                                              c5_interaction,  c6_corrector,     c7_elliptic,   c8_decay};
  std::vector<Outcome> outcomes;
  auto guarded = [](int id, const std::function<Outcome()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      Outcome o{id, "criterion " + std::to_string(id)};
      o.detail = std::string("raised: ") + e.what();
      return o;
    }
  };
  for (size_t i = 0; i < quick.size(); ++i) outcomes.push_back(guarded(static_cast<int>(i) + 1, quick[i]));

  std::vector<FixtureRun> runs{run_fixture("euler2d_hyperbolic.json", root / "hyperbolic"),
                               run_fixture("euler2d_elliptic.json", root / "elliptic")};
  outcomes.push_back(guarded(9, [&] { return c9_convergence(runs); }));
  outcomes.push_back(guarded(10, [&] { return c10_picard(runs); }));
  outcomes.push_back(guarded(11, [&] { return c11_determinism(root); }));

  int unexpected = 0, passed = 0;
  std::ostringstream rep;
  auto line = [&rep](const std::string& s) { rep << s << '\n'; };
  for (const Outcome& o : outcomes) {
    char head[256];
    std::snprintf(head, sizeof head, "C%-2d %s  ", o.id, o.pass ? "PASS" : "FAIL");
    line(head + o.name);
    line("      " + o.detail);
    line("      runtime " + fmt("%.2f s", o.seconds) + (o.limit > 0 ? " (limit " + fmt("%.0f s", o.limit) + ")" : ""));
    passed += o.pass;
    if (!o.pass) {
      const auto k = kKnownFailures.find(o.id);
      if (k != kKnownFailures.end())
        line("      known failure: " + k->second);
      else
        ++unexpected;
    }
  }
  line(std::to_string(passed) + "/" + std::to_string(outcomes.size()) + " criteria pass, " +
       std::to_string(unexpected) + " unexpected failures");
  std::fputs(rep.str().c_str(), stdout);
  std::ofstream(root / "report.txt") << rep.str();
  return unexpected == 0 ? 0 : 1;
}
