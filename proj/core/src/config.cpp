#include "geoptics/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace geoptics {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::ConfigError, "config", msg); }

Mat to_mat(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad(what + " must be a non-empty array of rows");
  const int r = static_cast<int>(j.size()), c = static_cast<int>(j[0].size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) bad(what + " has ragged rows");
    for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json from_mat(const Mat& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    a.push_back(row);
  }
  return a;
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      bad("unknown key '" + it.key() + "' in " + where);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const std::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) bad("config root must be an object");
  RunConfig cfg;
  try {
    check_keys(j,
               {"name", "system", "beta", "G", "grid", "D", "taper", "epsilons", "resonance_bound", "picard_levels",
                "stability_samples", "multiplicity_samples", "slice_stride", "tolerances", "seed"},
               "config");
    take(j, "name", cfg.name);
    if (j.contains("system")) {
      const json& s = j["system"];
      check_keys(s, {"kind", "K", "gamma_exp", "sound_speed", "rho", "u", "A", "dA", "source", "B0"}, "system");
      SystemConfig& sc = cfg.system;
      take(s, "kind", sc.kind);
      take(s, "K", sc.K);
      take(s, "gamma_exp", sc.gamma_exp);
      take(s, "sound_speed", sc.sound_speed);
      take(s, "rho", sc.rho);
      take(s, "u", sc.u);
      if (s.contains("A"))
        for (const auto& a : s["A"]) sc.A.push_back(to_mat(a, "system.A"));
      if (s.contains("dA"))
        for (const auto& dj : s["dA"]) {
          sc.dA.emplace_back();
          for (const auto& a : dj) sc.dA.back().push_back(to_mat(a, "system.dA"));
        }
      if (s.contains("source")) sc.source = to_mat(s["source"], "system.source");
      if (s.contains("B0")) sc.B0 = to_mat(s["B0"], "system.B0");
    }
    take(j, "beta", cfg.beta);
    if (j.contains("G")) {
      if (!j["G"].is_array()) bad("G must be a list of boundary terms");
      for (const auto& t : j["G"]) {
        check_keys(t, {"row", "harmonic", "amplitude", "center", "width", "ramp", "phase", "y_harmonic"}, "G term");
        BoundaryTerm b;
        take(t, "row", b.row);
        take(t, "harmonic", b.harmonic);
        take(t, "amplitude", b.amplitude);
        take(t, "center", b.center);
        take(t, "width", b.width);
        take(t, "ramp", b.ramp);
        take(t, "phase", b.phase);
        take(t, "y_harmonic", b.y_harmonic);
        cfg.G.push_back(b);
      }
    }
    if (j.contains("grid")) {
      const json& g = j["grid"];
      check_keys(g, {"nt", "dt", "t_start", "ny", "Ly", "nx", "dx", "K", "P", "gamma_L", "T0", "T1"}, "grid");
      GridSpec& gs = cfg.grid;
      take(g, "nt", gs.nt);
      take(g, "dt", gs.dt);
      take(g, "t_start", gs.t_start);
      take(g, "ny", gs.ny);
      take(g, "Ly", gs.Ly);
      take(g, "nx", gs.nx);
      take(g, "dx", gs.dx);
      take(g, "K", gs.K);
      take(g, "P", gs.P);
      take(g, "gamma_L", gs.gamma_L);
      take(g, "T0", gs.T0);
      take(g, "T1", gs.T1);
    }
    take(j, "D", cfg.D);
    take(j, "taper", cfg.taper);
    take(j, "epsilons", cfg.epsilons);
    take(j, "resonance_bound", cfg.resonance_bound);
    take(j, "picard_levels", cfg.picard_levels);
    take(j, "stability_samples", cfg.stability_samples);
    take(j, "multiplicity_samples", cfg.multiplicity_samples);
    take(j, "slice_stride", cfg.slice_stride);
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      check_keys(t,
                 {"profile", "profile_max_iter", "singular", "singular_max_iter", "blowup_cap", "resonance",
                  "amplitude_cap", "stability_margin", "cond_cap", "boundary_residual"},
                 "tolerances");
      Tolerances& tl = cfg.tol;
      take(t, "profile", tl.profile);
      take(t, "profile_max_iter", tl.profile_max_iter);
      take(t, "singular", tl.singular);
      take(t, "singular_max_iter", tl.singular_max_iter);
      take(t, "blowup_cap", tl.blowup_cap);
      take(t, "resonance", tl.resonance);
      take(t, "amplitude_cap", tl.amplitude_cap);
      take(t, "stability_margin", tl.stability_margin);
      take(t, "cond_cap", tl.cond_cap);
      take(t, "boundary_residual", tl.boundary_residual);
    }
    take(j, "seed", cfg.seed);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    bad(std::string("config type error: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  const SystemConfig& s = c.system;
  int d = 0, N = 0;
  if (s.kind == "euler2d" || s.kind == "euler3d") {
    d = s.kind == "euler2d" ? 2 : 3;
    N = d + 1;
    if (static_cast<int>(s.u.size()) != d) bad("system.u must have one velocity per spatial direction");
    if (!(s.rho > 0.0)) bad("system.rho must be positive");
    if (!(s.gamma_exp > 0.0)) bad("system.gamma_exp must be positive");
    if (s.sound_speed < 0.0 || (s.sound_speed == 0.0 && !(s.K > 0.0))) bad("pressure law needs K > 0 or a sound speed");
  } else if (s.kind == "custom") {
    d = static_cast<int>(s.A.size());
    if (d < 1) bad("custom system needs at least one matrix in A");
    N = static_cast<int>(s.A[0].rows());
  } else {
    bad("system.kind must be euler2d, euler3d or custom");
  }
  if (s.B0.size() == 0 || s.B0.cols() != N) bad("system.B0 must be a p x N matrix");
  if (static_cast<int>(c.beta.size()) != d) bad("beta must have d entries (tau, eta_1..eta_{d-1})");
  if (std::all_of(c.beta.begin(), c.beta.end(), [](double b) { return b == 0.0; })) bad("beta must be nonzero");
  const GridSpec& g = c.grid;
  if (g.nt < 4 || g.nt % 2 != 0) bad("grid.nt must be an even count >= 4");
  if (!(g.dt > 0.0) || !(g.dx > 0.0) || !(g.Ly > 0.0)) bad("grid steps must be positive");
  if (g.ny < 1 || g.nx < 3) bad("grid.ny >= 1 and grid.nx >= 3 required");
  if (g.K < 1 || g.P < 3 * g.K + 1) bad("grid.K >= 1 and grid.P >= 3K + 1 required");
  if (!(g.gamma_L > 0.0)) bad("grid.gamma_L must be positive");
  if (!(g.T0 > 0.0) || !(g.T1 > g.T0)) bad("need 0 < T0 < T1");
  if (!(g.t_start < 0.0) || g.t_start + g.nt * g.dt <= g.T1) bad("the time grid must cover (t_start < 0, T1]");
  if (!(c.D > 0.0) || !(c.taper > 0.0)) bad("D and taper must be positive");
  if (c.epsilons.empty()) bad("epsilons must not be empty");
  for (size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0)) bad("epsilons must be positive");
    if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) bad("epsilons must be sorted descending");
  }
  if (c.resonance_bound < 1) bad("resonance_bound must be positive");
  if (c.picard_levels < 0 || c.stability_samples < 1 || c.multiplicity_samples < 1 || c.slice_stride < 1)
    bad("counts must be positive");
  const int p = static_cast<int>(s.B0.rows());
  double amp = 0.0;
  for (const BoundaryTerm& b : c.G) {
    if (b.row < 0 || b.row >= p) bad("G term row outside the boundary rows");
    if (std::abs(b.harmonic) > g.K) bad("G term harmonic exceeds grid.K");
    if (!(b.width > 0.0) || !(b.ramp > 0.0)) bad("G term width and ramp must be positive");
    amp += std::abs(b.amplitude);
  }
  if (amp > c.tol.amplitude_cap) bad("G amplitude exceeds the weakly nonlinear cap");
  const Tolerances& t = c.tol;
  if (!(t.profile > 0.0) || !(t.singular > 0.0) || !(t.resonance > 0.0) || !(t.blowup_cap > 0.0) ||
      !(t.cond_cap > 0.0) || !(t.boundary_residual > 0.0) || t.profile_max_iter < 1 || t.singular_max_iter < 1)
    bad("tolerances must be positive");
}

std::string canonical_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  json s;
  s["kind"] = c.system.kind;
  if (c.system.kind == "custom") {
    json A = json::array();
    for (const Mat& m : c.system.A) A.push_back(from_mat(m));
    s["A"] = A;
    json dA = json::array();
    for (const auto& dj : c.system.dA) {
      json row = json::array();
      for (const Mat& m : dj) row.push_back(from_mat(m));
      dA.push_back(row);
    }
    s["dA"] = dA;
    if (c.system.source.size() > 0) s["source"] = from_mat(c.system.source);
  } else {
    s["K"] = c.system.K;
    s["gamma_exp"] = c.system.gamma_exp;
    s["sound_speed"] = c.system.sound_speed;
    s["rho"] = c.system.rho;
    s["u"] = c.system.u;
  }
  s["B0"] = from_mat(c.system.B0);
  j["system"] = s;
  j["beta"] = c.beta;
  json G = json::array();
  for (const BoundaryTerm& b : c.G)
    G.push_back({{"row", b.row},
                 {"harmonic", b.harmonic},
                 {"amplitude", b.amplitude},
                 {"center", b.center},
                 {"width", b.width},
                 {"ramp", b.ramp},
                 {"phase", b.phase},
                 {"y_harmonic", b.y_harmonic}});
  j["G"] = G;
  const GridSpec& g = c.grid;
  j["grid"] = {{"nt", g.nt},   {"dt", g.dt}, {"t_start", g.t_start}, {"ny", g.ny}, {"Ly", g.Ly},
               {"nx", g.nx},   {"dx", g.dx}, {"K", g.K},             {"P", g.P},   {"gamma_L", g.gamma_L},
               {"T0", g.T0},   {"T1", g.T1}};
  j["D"] = c.D;
  j["taper"] = c.taper;
  j["epsilons"] = c.epsilons;
  j["resonance_bound"] = c.resonance_bound;
  j["picard_levels"] = c.picard_levels;
  j["stability_samples"] = c.stability_samples;
  j["multiplicity_samples"] = c.multiplicity_samples;
  j["slice_stride"] = c.slice_stride;
  const Tolerances& t = c.tol;
  j["tolerances"] = {{"profile", t.profile},
                     {"profile_max_iter", t.profile_max_iter},
                     {"singular", t.singular},
                     {"singular_max_iter", t.singular_max_iter},
                     {"blowup_cap", t.blowup_cap},
                     {"resonance", t.resonance},
                     {"amplitude_cap", t.amplitude_cap},
                     {"stability_margin", t.stability_margin},
                     {"cond_cap", t.cond_cap},
                     {"boundary_residual", t.boundary_residual}};
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = canonical_json(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SystemSpec build_system(const RunConfig& cfg) {
  const SystemConfig& s = cfg.system;
  if (s.kind == "custom") {
    Mat src = s.source.size() > 0 ? s.source : Mat::Zero(s.A[0].rows(), s.A[0].rows());
    return make_affine_system(s.A, s.dA, src, s.B0, cfg.name);
  }
  EulerParams prm;
  prm.d = s.kind == "euler2d" ? 2 : 3;
  prm.rho = s.rho;
  prm.u = s.u;
  prm.gamma_exp = s.gamma_exp;
  prm.K = s.sound_speed > 0.0 ? euler_K_for_sound_speed(s.sound_speed, s.rho, s.gamma_exp) : s.K;
  return make_euler(prm, s.B0);
}

BoundaryField build_boundary_data(const RunConfig& cfg, const SpectralGrid& g, int p) {
  BoundaryField G(1, g.nh(), p, g.nf());
  const int K = g.K();
  for (const BoundaryTerm& b : cfg.G) {
    const cd ph = std::exp(kI * b.phase);
    for (int f = 0; f < g.nf(); ++f) {
      const double t = g.t(g.it_of(f));
      const double z = (t - b.center) / b.width;
      double w = b.amplitude * smooth_step(t / b.ramp) * std::exp(-z * z);
      if (b.y_harmonic != 0.0) w *= std::cos(b.y_harmonic * g.y(g.iy_of(f)));
      if (b.harmonic == 0) {
        G.at(0, K, b.row)[f] += w * ph.real();
      } else {
        const int n = std::abs(b.harmonic);
        const cd c = b.harmonic > 0 ? ph : std::conj(ph);
        G.at(0, K + n, b.row)[f] += 0.5 * w * c;
        G.at(0, K - n, b.row)[f] += 0.5 * w * std::conj(c);
      }
    }
  }
  return G;
}

}  // namespace geoptics
