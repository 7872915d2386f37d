#include "geoptics/pipeline.hpp"

#include "geoptics/assembly_error.hpp"
#include "geoptics/corrector.hpp"
#include "geoptics/elliptic_layer.hpp"
#include "geoptics/mode_analysis.hpp"
#include "geoptics/profile_spectral.hpp"
#include "geoptics/resonance_lattice.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

namespace geoptics {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(Stage s) {
  switch (s) {
    case Stage::Run: return "run";
    case Stage::CheckAssumptions: return "check-assumptions";
    case Stage::AnalyzeModes: return "analyze-modes";
    case Stage::FindResonances: return "find-resonances";
    case Stage::SolveProfiles: return "solve-profiles";
    case Stage::SolveSingular: return "solve-singular";
    case Stage::ConvergenceStudy: return "convergence-study";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::Run, Stage::CheckAssumptions, Stage::AnalyzeModes, Stage::FindResonances,
                  Stage::SolveProfiles, Stage::SolveSingular, Stage::ConvergenceStudy})
    if (name == to_string(s)) return s;
  fail(ErrorKind::ConfigError, "cli", "unknown stage '" + name + "'");
}

std::vector<Stage> expand(Stage s) {
  if (s != Stage::Run) return {s};
  return {Stage::CheckAssumptions, Stage::AnalyzeModes, Stage::FindResonances, Stage::SolveProfiles,
          Stage::SolveSingular, Stage::ConvergenceStudy};
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoConvergence:
    case ErrorKind::BlowUp:
    case ErrorKind::NearSingular:
    case ErrorKind::NotSolvable:
    case ErrorKind::CFLViolation:
    case ErrorKind::SupportLeak:
    case ErrorKind::BoundaryResidualNonzero:
    case ErrorKind::MissingTrace:
      return 3;
    default:
      return 2;
  }
}

std::string resolve_cache_dir(const PipelineOptions& opt) {
  if (!opt.cache_dir.empty()) return opt.cache_dir;
  if (const char* env = std::getenv("GEOPTICS_CACHE_DIR"); env && *env) return env;
  return (fs::path(opt.out_dir) / ".cache").string();
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string eps_tag(double eps) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "eps_%g", eps);
  return buf;
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
  if (!out) fail(ErrorKind::InvalidInput, "io", "cannot write " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Binary cache records.  Layout is native-endian and only read back by the
// same build, so no portability header is kept.
class Writer {
 public:
  explicit Writer(const fs::path& p) : out_(p, std::ios::binary) {
    if (!out_) fail(ErrorKind::InvalidInput, "cache", "cannot write " + p.string());
  }
  void i(long long v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void d(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void dv(const std::vector<double>& v) {
    i(static_cast<long long>(v.size()));
    for (double x : v) d(x);
  }
  void field(const Field& f) {
    i(f.nx), i(f.nh), i(f.nc), i(f.nf);
    out_.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(cd)));
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const fs::path& p) : in_(p, std::ios::binary) {
    if (!in_) fail(ErrorKind::MissingUpstream, "cache", "cannot read " + p.string());
  }
  long long i() {
    long long v = 0;
    get(&v, sizeof v);
    return v;
  }
  double d() {
    double v = 0;
    get(&v, sizeof v);
    return v;
  }
  std::vector<double> dv() {
    std::vector<double> v(static_cast<size_t>(i()));
    for (double& x : v) x = d();
    return v;
  }
  Field field() {
    const int nx = static_cast<int>(i()), nh = static_cast<int>(i()), nc = static_cast<int>(i()),
              nf = static_cast<int>(i());
    Field f;
    if (nx * nh * nc * nf > 0) f = Field(nx, nh, nc, nf);
    else f.nx = nx, f.nh = nh, f.nc = nc, f.nf = nf;
    get(f.data.data(), f.data.size() * sizeof(cd));
    return f;
  }

 private:
  std::ifstream in_;
  void get(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) fail(ErrorKind::MissingUpstream, "cache", "truncated cache record");
  }
};

void put_profiles(Writer& w, const ProfileSet& S) {
  w.i(S.M), w.i(S.N), w.i(S.iteration);
  w.field(S.vbar);
  for (const auto* group : {&S.sigma, &S.trace, &S.rhs0}) {
    w.i(static_cast<long long>(group->size()));
    for (const auto& per_mode : *group) {
      w.i(static_cast<long long>(per_mode.size()));
      for (const Field& f : per_mode) w.field(f);
    }
  }
}

ProfileSet get_profiles(Reader& r) {
  ProfileSet S;
  S.M = static_cast<int>(r.i());
  S.N = static_cast<int>(r.i());
  S.iteration = static_cast<int>(r.i());
  S.vbar = r.field();
  for (auto* group : {&S.sigma, &S.trace, &S.rhs0}) {
    group->resize(static_cast<size_t>(r.i()));
    for (auto& per_mode : *group) {
      per_mode.resize(static_cast<size_t>(r.i()));
      for (Field& f : per_mode) f = r.field();
    }
  }
  return S;
}

// Everything a stage needs, rebuilt on demand from the configuration.  The
// cheap upstream objects are recomputed (they are deterministic) once the
// cache confirms the upstream stage ran.
struct Context {
  const RunConfig& cfg;
  const PipelineOptions& opt;
  fs::path out, cache;
  std::string hash;
  SystemSpec sys;
  std::unique_ptr<ModeTable> mt;
  std::unique_ptr<ResonanceSet> rs;
  std::unique_ptr<SpectralGrid> grid;
  std::unique_ptr<HyperbolicResult> prof;

  Context(const RunConfig& c, const PipelineOptions& o) : cfg(c), opt(o) {
    out = o.out_dir;
    hash = config_hash(c);
    cache = fs::path(resolve_cache_dir(o)) / hash;
    sys = build_system(c);
  }

  void log(const std::string& s) const {
    if (opt.verbose) (opt.log ? *opt.log : std::cerr) << "[geoptics] " << s << std::endl;
  }
  fs::path entry(const std::string& name) const { return cache / name; }
  void require(Stage upstream, const std::string& name) const {
    if (!fs::exists(entry(name)))
      fail(ErrorKind::MissingUpstream, to_string(upstream),
           "cache entry '" + name + "' is absent; run stage " + to_string(upstream) + " first");
  }
  void section(Stage s, const std::string& text) const { write_text(entry(std::string("summary_") + to_string(s) + ".txt"), text); }

  const ModeTable& modes() {
    if (!mt) mt = std::make_unique<ModeTable>(compute_modes(sys, cfg.beta));
    return *mt;
  }
  const ResonanceSet& resonances() {
    if (!rs) rs = std::make_unique<ResonanceSet>(
                 find_resonances(modes(), make_lattice(modes(), cfg.resonance_bound), cfg.tol.resonance));
    return *rs;
  }
  const SpectralGrid& g() {
    if (!grid) {
      if (sys.d != 2)
        fail(ErrorKind::InvalidInput, "solve-profiles",
             "the spectral solvers carry one tangential direction (d = 2 systems)");
      grid = std::make_unique<SpectralGrid>(cfg.grid);
    }
    return *grid;
  }
  HyperbolicResult& profiles() {
    if (!prof) {
      require(Stage::SolveProfiles, "profiles.bin");
      Reader r(entry("profiles.bin"));
      prof = std::make_unique<HyperbolicResult>();
      prof->iterations = static_cast<int>(r.i());
      prof->increments = r.dv();
      prof->profiles = get_profiles(r);
      prof->iterates.resize(static_cast<size_t>(r.i()));
      for (ProfileSet& S : prof->iterates) S = get_profiles(r);
    }
    return *prof;
  }
  ConvergenceOptions conv_options() const {
    ConvergenceOptions co;
    co.epsilons = cfg.epsilons;
    co.singular.tol = cfg.tol.singular;
    co.singular.max_iter = cfg.tol.singular_max_iter;
    co.singular.blowup_cap = cfg.tol.blowup_cap;
    co.corrector.cond_cap = cfg.tol.cond_cap;
    co.picard_levels = cfg.picard_levels;
    return co;
  }
  EllipticOptions elliptic_options() const {
    EllipticOptions eo;
    eo.D = cfg.D;
    eo.taper = cfg.taper;
    eo.residual_tol = cfg.tol.boundary_residual;
    return eo;
  }
};

// ---------------------------------------------------------------- stages

void stage_check_assumptions(Context& c) {
  const SystemSpec& sys = c.sys;
  NoncharacteristicReport nc = check_noncharacteristic(sys);
  if (!nc.pass)
    fail(ErrorKind::InvalidInput, "check-assumptions",
         "rank(B0) = " + std::to_string(nc.rankB) + " must equal the positive eigenvalue count p = " +
             std::to_string(nc.p));
  std::mt19937_64 rng(c.cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Sample> samples(c.cfg.multiplicity_samples);
  for (Sample& s : samples) {
    s.u = Vec(sys.N);
    for (int i = 0; i < sys.N; ++i) s.u(i) = 1e-2 * gauss(rng);
    s.xi = Vec(sys.d);
    for (int j = 0; j < sys.d; ++j) s.xi(j) = gauss(rng);
    s.xi /= s.xi.norm();
  }
  MultiplicityReport mr = check_constant_multiplicity(sys, samples);
  StabilityReport sr = check_uniform_stability(sys, c.cfg.stability_samples, c.cfg.tol.stability_margin);
  if (!sr.pass) fail(ErrorKind::StabilityFail, "check-assumptions", "uniform stability margin not met");

  json j;
  j["system"] = sys.name;
  j["N"] = sys.N;
  j["d"] = sys.d;
  j["p"] = sys.p;
  j["noncharacteristic"] = {{"pass", nc.pass}, {"p", nc.p}, {"rank_B0", nc.rankB},
                            {"eigenvalues_Ad", nc.eigenvalues}, {"condition", nc.cond}};
  j["multiplicity"] = {{"pass", mr.pass}, {"q", mr.q}, {"multiplicities", mr.multiplicities},
                       {"samples", samples.size()}};
  json sj = {{"pass", sr.pass}, {"vacuous", sr.vacuous}, {"trivial", sys.p == sys.N}, {"samples", sr.n_samples}, {"used", sr.n_used},
             {"min_sigma", sr.min_sigma}};
  if (!sr.vacuous) sj["argmin"] = {{"tau", sr.argmin.tau}, {"gamma", sr.argmin.gamma}, {"eta", sr.argmin.eta}};
  j["uniform_stability"] = sj;
  const std::string text = j.dump(2) + "\n";
  write_text(c.out / "assumptions.json", text);
  write_text(c.entry("assumptions.json"), text);

  std::ostringstream s;
  s << "check-assumptions\n  system " << sys.name << "  N " << sys.N << "  d " << sys.d << "  p " << sys.p << "\n"
    << "  multiplicities";
  for (int v : mr.multiplicities) s << ' ' << v;
  s << "\n  uniform stability " << (sr.vacuous ? "vacuous" : sys.p == sys.N ? "trivial (p = N)" : "pass") << ", min sigma " << num(sr.min_sigma) << "\n";
  c.section(Stage::CheckAssumptions, s.str());
}

void stage_analyze_modes(Context& c) {
  c.require(Stage::CheckAssumptions, "assumptions.json");
  const ModeTable& mt = c.modes();
  BoundaryBasisReport bb = boundary_basis_check(mt, c.sys);
  json j;
  j["beta"] = mt.beta;
  j["M"] = mt.M();
  json modes = json::array();
  for (int m = 0; m < mt.M(); ++m) {
    json e;
    e["omega"] = cjson(mt.omega[m]);
    e["class"] = to_string(mt.cls[m]);
    e["multiplicity"] = mt.mult[m];
    json kap = json::array();
    for (int i = 0; i < mt.kappa[m].size(); ++i) kap.push_back(cjson(mt.kappa[m](i)));
    e["kappa"] = kap;
    if (is_hyperbolic(mt.cls[m])) {
      e["group_velocity"] = std::vector<double>(mt.v[m].data(), mt.v[m].data() + mt.v[m].size());
      e["dlambda_dxid"] = mt.dlambda_dxid[m];
    }
    json r = json::array();
    for (int k = 0; k < mt.r[m].cols(); ++k) {
      json col = json::array();
      for (int i = 0; i < mt.r[m].rows(); ++i) col.push_back(cjson(mt.r[m](i, k)));
      r.push_back(col);
    }
    e["r"] = r;
    modes.push_back(e);
  }
  j["modes"] = modes;
  j["boundary_basis"] = {{"pass", bb.pass},
                         {"n_plus", bb.n_plus},
                         {"n_minus", bb.n_minus},
                         {"cond_plus", bb.cond_plus},
                         {"cond_minus", bb.cond_minus}};
  const std::string text = j.dump(2) + "\n";
  write_text(c.out / "modes.json", text);
  write_text(c.entry("modes.json"), text);

  std::ostringstream s;
  s << "analyze-modes\n  beta";
  for (double b : mt.beta) s << ' ' << num(b);
  s << "\n  M " << mt.M() << "\n";
  for (int m = 0; m < mt.M(); ++m)
    s << "  mode " << m << "  omega " << num(mt.omega[m].real()) << " " << num(mt.omega[m].imag()) << "i  "
      << to_string(mt.cls[m]) << "  multiplicity " << mt.mult[m] << "\n";
  c.section(Stage::AnalyzeModes, s.str());
}

void stage_find_resonances(Context& c) {
  c.require(Stage::AnalyzeModes, "modes.json");
  const ResonanceSet& rs = c.resonances();
  const ModeTable& mt = c.modes();
  json j;
  j["bound"] = rs.bound;
  j["tol"] = rs.tol;
  json tr = json::array();
  for (const Triple& t : rs.triples)
    tr.push_back({{"p", t.p},
                  {"q", t.q},
                  {"r", t.r},
                  {"n_p", t.np},
                  {"n_q", t.nq},
                  {"n_r", t.nr},
                  {"defect", t.defect},
                  {"kind", classify_resonance(t, mt.cls) == ResonanceKind::Hyperbolic ? "hyperbolic" : "elliptic"},
                  {"family", family_key(t, mt.M())}});
  j["triples"] = tr;
  json cm = json::array();
  for (int m = 0; m < static_cast<int>(rs.charmodes.size()); ++m)
    for (const CharMode& ch : rs.charmodes[m])
      cm.push_back({{"target", m}, {"alpha", ch.alpha}, {"n", ch.n_alpha}, {"defect", ch.defect}});
  j["characteristic"] = cm;
  j["warnings"] = rs.warnings;
  const std::string text = j.dump(2) + "\n";
  write_text(c.out / "resonances.json", text);
  write_text(c.entry("resonances.json"), text);

  std::ostringstream s;
  s << "find-resonances\n  bound " << rs.bound << "  families " << rs.triples.size() << "  characteristic alphas "
    << cm.size() << "\n";
  for (const Triple& t : rs.triples)
    s << "  " << t.np << " phi_" << t.p << " = " << t.nq << " phi_" << t.q << " + " << t.nr << " phi_" << t.r << "\n";
  for (const std::string& w : rs.warnings) s << "  warning: " << w << "\n";
  c.section(Stage::FindResonances, s.str());
}

// CSV of a scalar or vector field over the window 0 <= t <= T0 at every
// `stride`-th x_d index; values are physical in (t, y).
void write_field_csv(const fs::path& p, const SpectralGrid& g, const Field& f, int stride, bool spectral) {
  std::ostringstream o;
  o << "x_d,t,y,n,component,re,im\n";
  std::vector<cd> buf(g.nf());
  for (int ix = 0; ix < f.nx; ix += stride) {
    for (int h = 0; h < f.nh; ++h)
      for (int comp = 0; comp < f.nc; ++comp) {
        const cd* src = f.at(ix, h, comp);
        std::copy(src, src + g.nf(), buf.begin());
        if (spectral) g.backward(buf.data());
        for (int q = 0; q < g.nf(); ++q) {
          if (!g.in_window(q)) continue;
          o << num(g.x(ix)) << ',' << num(g.t(g.it_of(q))) << ',' << num(g.y(g.iy_of(q))) << ','
            << (f.nh == 1 ? 0 : g.harmonic(h)) << ',' << comp << ',' << num(buf[q].real()) << ','
            << num(buf[q].imag()) << '\n';
        }
      }
    if (ix + stride >= f.nx && ix != f.nx - 1) ix = f.nx - 1 - stride;
  }
  write_text(p, o.str());
}

void stage_solve_profiles(Context& c) {
  c.require(Stage::FindResonances, "resonances.json");
  const ModeTable& mt = c.modes();
  const ResonanceSet& rs = c.resonances();
  const SpectralGrid& g = c.g();
  const BoundaryField G = build_boundary_data(c.cfg, g, c.sys.p);

  const auto t0 = std::chrono::steady_clock::now();
  ProfileSolver ps(c.sys, mt, rs, g);
  HyperbolicOptions ho;
  ho.tol = c.cfg.tol.profile;
  ho.max_iter = c.cfg.tol.profile_max_iter;
  ho.keep_iterates = std::max(1, c.cfg.picard_levels);
  auto prof = std::make_unique<HyperbolicResult>(ps.picard_solve_hyperbolic(G, ho));
  c.log("hyperbolic profiles: " + std::to_string(prof->iterations) + " iterations");

  bool elliptic = false;
  for (int m = 0; m < mt.M(); ++m) elliptic = elliptic || is_elliptic(mt.cls[m]);
  const EllipticOptions eo = c.elliptic_options();
  EllipticReport er;
  EllipticResidual eres;
  if (elliptic) {
    er = build_elliptic_profiles(prof->profiles, mt, g, eo);
    for (ProfileSet& S : prof->iterates) build_elliptic_profiles(S, mt, g, eo);
    eres = elliptic_residual(ps, mt, g, prof->profiles, prof->profiles, eo);
    c.log("elliptic layer built");
  }

  CorrectorBuilder cb(c.sys, mt, rs, g, prof->profiles, c.conv_options().corrector);
  std::ostringstream cc;
  cc << "x_d,terms,amplification,residual\n";
  double amp = 0.0, res = 0.0;
  for (int ix = 0; ix < g.nx(); ix += c.cfg.slice_stride) {
    CorrectorResult cr = cb.corrector_at(ix);
    amp = std::max(amp, cr.amplification);
    res = std::max(res, cr.residual);
    cc << num(g.x(ix)) << ',' << cr.V.terms.size() << ',' << num(cr.amplification) << ',' << num(cr.residual)
       << '\n';
  }
  c.log("profiles stage " +
        std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");

  {
    Writer w(c.entry("profiles.bin.tmp"));
    w.i(prof->iterations);
    w.dv(prof->increments);
    put_profiles(w, prof->profiles);
    w.i(static_cast<long long>(prof->iterates.size()));
    for (const ProfileSet& S : prof->iterates) put_profiles(w, S);
  }
  fs::rename(c.entry("profiles.bin.tmp"), c.entry("profiles.bin"));

  const fs::path dir = c.out / "profiles";
  fs::create_directories(dir);
  for (int m = 0; m < mt.M(); ++m)
    for (int k = 0; k < static_cast<int>(prof->profiles.sigma[m].size()); ++k)
      write_field_csv(dir / ("sigma_m" + std::to_string(m) + "_k" + std::to_string(k) + ".csv"), g,
                      prof->profiles.sigma[m][k], c.cfg.slice_stride, false);
  write_field_csv(dir / "vbar.csv", g, prof->profiles.vbar, c.cfg.slice_stride, false);
  write_text(dir / "corrector.csv", cc.str());
  std::ostringstream it;
  it << "iteration,increment\n";
  for (size_t i = 0; i < prof->increments.size(); ++i) it << i + 1 << ',' << num(prof->increments[i]) << '\n';
  write_text(dir / "iterations.csv", it.str());

  std::ostringstream s;
  s << "solve-profiles\n  hyperbolic Picard iterations " << prof->iterations << "\n";
  if (elliptic)
    s << "  elliptic layer: energy drift " << num(er.energy_drift) << ", support leak " << num(er.support_leak)
      << ", boundary residual " << num(eres.boundary_max) << "\n";
  s << "  corrector: max amplification " << num(amp) << ", max round-trip residual " << num(res) << "\n";
  c.section(Stage::SolveProfiles, s.str());
  c.prof = std::move(prof);
}

void stage_solve_singular(Context& c) {
  HyperbolicResult& prof = c.profiles();
  const ModeTable& mt = c.modes();
  const ResonanceSet& rs = c.resonances();
  const SpectralGrid& g = c.g();
  const BoundaryField G = build_boundary_data(c.cfg, g, c.sys.p);
  const ConvergenceOptions co = c.conv_options();
  const std::vector<CorrectorBuilder> cbs = iterate_correctors(c.sys, mt, rs, g, prof, co);

  std::ostringstream s;
  s << "solve-singular\n";
  for (size_t e = 0; e < co.epsilons.size(); ++e) {
    const double eps = co.epsilons[e];
    const auto t0 = std::chrono::steady_clock::now();
    EpsilonRun run = solve_epsilon(c.sys, mt, g, G, prof, cbs, eps, co);
    c.log("singular solve " + eps_tag(eps) + ": " + std::to_string(run.result.iterations) + " iterations, " +
          std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    const fs::path dir = c.out / "singular" / eps_tag(eps);
    fs::create_directories(dir);
    write_field_csv(dir / "U.csv", g, run.result.U, c.cfg.slice_stride, true);
    std::ostringstream h;
    h << "iteration,increment\n";
    for (size_t i = 0; i < run.result.increments.size(); ++i) h << i + 1 << ',' << num(run.result.increments[i]) << '\n';
    write_text(dir / "iterations.csv", h.str());
    {
      Writer w(c.entry("singular_" + std::to_string(e) + ".bin.tmp"));
      w.d(eps);
      w.i(run.result.iterations);
      w.dv(run.result.increments);
      w.d(run.result.norm.sup_part);
      w.d(run.result.norm.l2_part);
      w.d(run.result.max_condition);
      w.dv(run.picard_err);
      w.field(run.result.U);
    }
    fs::rename(c.entry("singular_" + std::to_string(e) + ".bin.tmp"), c.entry("singular_" + std::to_string(e) + ".bin"));
    s << "  eps " << num(eps) << "  iterations " << run.result.iterations << "  |U| " << num(run.result.norm.total())
      << "  sweep condition " << num(run.result.max_condition)
      << "  boundary trace H^{s+1} (proxy for the trace norm) " << num(trace_norm(g, run.result.U)) << "\n";
  }
  c.section(Stage::SolveSingular, s.str());
}

void stage_convergence(Context& c) {
  const ConvergenceOptions co = c.conv_options();
  for (size_t e = 0; e < co.epsilons.size(); ++e)
    c.require(Stage::SolveSingular, "singular_" + std::to_string(e) + ".bin");
  HyperbolicResult& prof = c.profiles();
  const ModeTable& mt = c.modes();
  const ResonanceSet& rs = c.resonances();
  const SpectralGrid& g = c.g();
  std::vector<EpsilonRun> runs;
  for (size_t e = 0; e < co.epsilons.size(); ++e) {
    Reader r(c.entry("singular_" + std::to_string(e) + ".bin"));
    EpsilonRun run;
    run.eps = r.d();
    run.result.eps = run.eps;
    run.result.iterations = static_cast<int>(r.i());
    run.result.increments = r.dv();
    run.result.norm.sup_part = r.d();
    run.result.norm.l2_part = r.d();
    run.result.max_condition = r.d();
    run.picard_err = r.dv();
    run.result.U = r.field();
    runs.push_back(std::move(run));
  }
  ConvergenceReport rep = convergence_report(c.sys, mt, rs, g, prof, std::move(runs), co);

  std::ostringstream csv;
  csv << "eps,error_es,error_sup,error_l2,error_linf,norm_U,iterations,corrector_amplification";
  for (const PicardDiagnostic& pd : rep.picard) csv << ",picard_" << pd.n;
  csv << '\n';
  for (size_t i = 0; i < rep.eps.size(); ++i) {
    csv << num(rep.eps[i]) << ',' << num(rep.error[i].total()) << ',' << num(rep.error[i].sup_part) << ','
        << num(rep.error[i].l2_part) << ',' << num(rep.linf[i]) << ',' << num(rep.norm_U[i]) << ','
        << rep.iterations[i] << ',' << num(rep.corrector_amplification[i]);
    for (const PicardDiagnostic& pd : rep.picard) csv << ',' << num(pd.err[i]);
    csv << '\n';
  }
  write_text(c.out / "convergence.csv", csv.str());

  std::vector<double> es;
  for (const NormReport& n : rep.error) es.push_back(n.total());
  std::ostringstream s;
  s << "convergence-study\n";
  for (size_t i = 0; i < rep.eps.size(); ++i)
    s << "  eps " << num(rep.eps[i]) << "  E^{s-1} error " << num(es[i]) << "  L^inf error " << num(rep.linf[i])
      << "\n";
  s << "  E^{s-1} error strictly decreasing: " << (strictly_decreasing(es) ? "yes" : "no") << "\n";
  s << "  L^inf error strictly decreasing: " << (strictly_decreasing(rep.linf) ? "yes" : "no") << "\n";
  for (const PicardDiagnostic& pd : rep.picard)
    s << "  iterate " << pd.n << ": decreasing " << (pd.decreasing ? "yes" : "no") << ", fit a + b eps with a "
      << num(pd.fit.a) << ", b " << num(pd.fit.b) << ", relative residual " << num(pd.fit.residual) << "\n";
  c.section(Stage::ConvergenceStudy, s.str());
}

std::string fnv_file(const fs::path& p) {
  const std::string data = read_text(p);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_summary_and_manifest(Context& c) {
  std::ostringstream s;
  s << "geoptics run '" << c.cfg.name << "'  config " << c.hash << "\n\n";
  json stages = json::array();
  for (Stage st : expand(Stage::Run)) {
    const fs::path p = c.entry(std::string("summary_") + to_string(st) + ".txt");
    if (!fs::exists(p)) continue;
    s << read_text(p) << "\n";
    stages.push_back(to_string(st));
  }
  write_text(c.out / "summary.txt", s.str());

  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(c.out)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), c.out).generic_string();
    if (rel == "manifest.json" || rel.rfind(".cache", 0) == 0) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json art = json::array();
  for (const std::string& f : files) art.push_back({{"path", f}, {"fnv1a64", fnv_file(c.out / f)}});
  json m;
  m["name"] = c.cfg.name;
  m["config_hash"] = c.hash;
  m["config"] = json::parse(canonical_json(c.cfg));
  m["stages"] = stages;
  m["artifacts"] = art;
  write_text(c.out / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

void run_pipeline(const RunConfig& cfg, Stage stage, const PipelineOptions& opt) {
  set_threads(opt.threads);
  Context c(cfg, opt);
  fs::create_directories(c.out);
  fs::create_directories(c.cache);
  write_text(c.entry("config.json"), canonical_json(cfg) + "\n");
  for (Stage s : expand(stage)) {
    c.log(std::string("stage ") + to_string(s));
    switch (s) {
      case Stage::CheckAssumptions: stage_check_assumptions(c); break;
      case Stage::AnalyzeModes: stage_analyze_modes(c); break;
      case Stage::FindResonances: stage_find_resonances(c); break;
      case Stage::SolveProfiles: stage_solve_profiles(c); break;
      case Stage::SolveSingular: stage_solve_singular(c); break;
      case Stage::ConvergenceStudy: stage_convergence(c); break;
      case Stage::Run: break;
    }
  }
  write_summary_and_manifest(c);
}

}  // namespace geoptics
