#include "geoptics/assembly_error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace geoptics {

Field substituted_field(const ModeTable& mt, const SpectralGrid& g, const std::vector<ComponentRef>& comps,
                        double eps) {
  const int nx = g.nx(), nh = g.nh(), nf = g.nf(), K = g.K(), N = mt.N;
  Field out(nx, nh, N, nf);
#pragma omp parallel for schedule(static)
  for (int ix = 0; ix < nx; ++ix) {
    const double xid = g.x(ix) / eps;
    for (const ComponentRef& c : comps) {
      const CVec r = mt.r[c.m].col(c.k);
      for (int h = 0; h < nh; ++h) {
        const int n = h - K;
        if (n == 0 && !is_hyperbolic(mt.cls[c.m])) continue;
        const cd ph = std::exp(kI * (double(n) * mt.omega[c.m] * xid));
        const cd* s = c.f->at(ix, h, 0);
        for (int row = 0; row < N; ++row) {
          const cd w = ph * r(row);
          if (w == cd(0.0)) continue;
          cd* p = out.at(ix, h, row);
          for (int f = 0; f < nf; ++f) p[f] += w * s[f];
        }
      }
    }
  }
  return out;
}

Field assemble_leading(const ProfileSet& S, const ModeTable& mt, const SpectralGrid& g, double eps) {
  std::vector<ComponentRef> comps;
  for (int m = 0; m < S.M; ++m) {
    if (!S.has(m)) continue;
    for (int k = 0; k < static_cast<int>(S.sigma[m].size()); ++k) comps.push_back({m, k, &S.sigma[m][k]});
  }
  Field out = substituted_field(mt, g, comps, eps);
  const int K = g.K(), nf = g.nf();
  for (int ix = 0; ix < g.nx(); ++ix)
    for (int c = 0; c < S.N; ++c) {
      const cd* v = S.vbar.at(ix, 0, c);
      cd* p = out.at(ix, K, c);
      for (int f = 0; f < nf; ++f) p[f] += v[f];
    }
  return out;
}

DecayReport decay_check(const ModeTable& mt, const SpectralGrid& g, const std::vector<ComponentRef>& R,
                        const std::vector<double>& epsilons) {
  DecayReport rep;
  for (double eps : epsilons) {
    Field f = substituted_field(mt, g, R, eps);
    g.forward_field(f);
    const NormReport n = es_norm(g, f);
    rep.eps.push_back(eps);
    rep.sup.push_back(n.sup_part);
    rep.l2.push_back(n.l2_part);
  }
  rep.l2_slope = log_slope(rep.eps, rep.l2);
  std::vector<double> by_eps = rep.sup;
  rep.sup_decreasing = strictly_decreasing(by_eps);
  return rep;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return !v.empty();
}

LinearFit fit_affine(const std::vector<double>& eps, const std::vector<double>& err) {
  LinearFit fit;
  const int n = static_cast<int>(eps.size());
  if (n == 0) return fit;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = eps[i];
    b(i) = err[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  fit.a = c(0);
  fit.b = n > 1 ? c(1) : 0.0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = (A.row(i).dot(c) - b(i)) / std::max(std::abs(b(i)), 1e-300);
    s += e * e;
  }
  fit.residual = std::sqrt(s / n);
  return fit;
}

double physical_error(const SpectralGrid& g, const Field& U_spec, const Field& approx_phys,
                      const std::vector<double>& beta, double eps) {
  Field d = approx_phys;
  g.forward_field(d);
  for (size_t i = 0; i < d.data.size(); ++i) d.data[i] = U_spec.data[i] - d.data[i];
  return linf_physical(g, d, beta, eps);
}

std::vector<CorrectorBuilder> iterate_correctors(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                                 const SpectralGrid& g, const HyperbolicResult& prof,
                                                 const ConvergenceOptions& opt) {
  const int levels = std::min<int>(opt.picard_levels, static_cast<int>(prof.iterates.size()));
  std::vector<CorrectorBuilder> out;
  out.reserve(levels);
  for (int n = 0; n < levels; ++n) out.emplace_back(sys, mt, rs, g, prof.iterates[n], opt.corrector);
  return out;
}

EpsilonRun solve_epsilon(const SystemSpec& sys, const ModeTable& mt, const SpectralGrid& g, const BoundaryField& G,
                         const HyperbolicResult& prof, const std::vector<CorrectorBuilder>& iterate_cb, double eps,
                         const ConvergenceOptions& opt) {
  EpsilonRun run;
  run.eps = eps;
  const int levels = static_cast<int>(iterate_cb.size());
  run.picard_err.assign(levels, NAN);
  SingularSolver solver(sys, g, mt.beta, eps);
  auto hook = [&](int n, const Field& Un) {
    if (n < 1 || n > levels) return;
    Field approx = assemble_leading(prof.iterates[n - 1], mt, g, eps);
    const Field U1 = iterate_cb[n - 1].corrector_field(eps);
    for (size_t i = 0; i < approx.data.size(); ++i) approx.data[i] += eps * U1.data[i];
    g.forward_field(approx);
    for (size_t i = 0; i < approx.data.size(); ++i) approx.data[i] = Un.data[i] - approx.data[i];
    run.picard_err[n - 1] = es_norm(g, approx).total();
  };
  run.result = solver.solve(G, opt.singular, hook);
  return run;
}

ConvergenceReport convergence_report(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                     const SpectralGrid& g, const HyperbolicResult& prof,
                                     std::vector<EpsilonRun> runs, const ConvergenceOptions& opt) {
  ConvergenceReport rep;
  const int levels = runs.empty() ? 0 : static_cast<int>(runs.front().picard_err.size());
  rep.picard.resize(levels);
  for (int n = 0; n < levels; ++n) rep.picard[n].n = n + 1;
  CorrectorBuilder cb(sys, mt, rs, g, prof.profiles, opt.corrector);
  for (EpsilonRun& run : runs) {
    const double eps = run.eps;
    Field approx = assemble_leading(prof.profiles, mt, g, eps);
    const double linf = physical_error(g, run.result.U, approx, mt.beta, eps);
    g.forward_field(approx);
    for (size_t i = 0; i < approx.data.size(); ++i) approx.data[i] = run.result.U.data[i] - approx.data[i];
    rep.error.push_back(es_norm(g, approx));
    rep.linf.push_back(linf);
    rep.norm_U.push_back(run.result.norm.total());
    rep.iterations.push_back(run.result.iterations);
    double amp = 0.0;
    cb.corrector_field(eps, &amp);
    rep.corrector_amplification.push_back(amp);
    for (int n = 0; n < levels; ++n) rep.picard[n].err.push_back(run.picard_err[n]);
    rep.eps.push_back(eps);
    rep.U.push_back(std::move(run.result.U));
  }
  for (auto& pd : rep.picard) {
    pd.fit = fit_affine(rep.eps, pd.err);
    pd.decreasing = strictly_decreasing(pd.err);
  }
  return rep;
}

ConvergenceReport convergence_study(const SystemSpec& sys, const ModeTable& mt, const ResonanceSet& rs,
                                    const SpectralGrid& g, const BoundaryField& G, const HyperbolicResult& prof,
                                    const ConvergenceOptions& opt) {
  const std::vector<CorrectorBuilder> cbs = iterate_correctors(sys, mt, rs, g, prof, opt);
  std::vector<EpsilonRun> runs;
  std::vector<double> seconds;
  for (double eps : opt.epsilons) {
    const auto t0 = std::chrono::steady_clock::now();
    runs.push_back(solve_epsilon(sys, mt, g, G, prof, cbs, eps, opt));
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  ConvergenceReport rep = convergence_report(sys, mt, rs, g, prof, std::move(runs), opt);
  rep.seconds = seconds;
  return rep;
}

}  // namespace geoptics
