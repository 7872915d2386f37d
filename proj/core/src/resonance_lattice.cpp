#include "geoptics/resonance_lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace geoptics {

bool SpectrumLattice::contains(int m, int n) const {
  switch (Z.at(m)) {
    case LatticeSign::All: return true;
    case LatticeSign::Positive: return n >= 0;
    case LatticeSign::Negative: return n <= 0;
  }
  return false;
}

SpectrumLattice make_lattice(const std::vector<ModeClass>& cls, int bound) {
  SpectrumLattice lat;
  lat.bound = bound;
  for (auto c : cls) {
    if (c == ModeClass::Positive)
      lat.Z.push_back(LatticeSign::Positive);
    else if (c == ModeClass::Negative)
      lat.Z.push_back(LatticeSign::Negative);
    else
      lat.Z.push_back(LatticeSign::All);
  }
  return lat;
}

SpectrumLattice make_lattice(const ModeTable& mt, int bound) { return make_lattice(mt.cls, bound); }

namespace {

double omega_scale(const std::vector<cd>& omega) {
  double s = 0.0;
  for (const auto& w : omega) s = std::max(s, std::abs(w));
  return s > 0 ? s : 1.0;
}

// Target test for a two-component alpha (entries a at i, b at j).
CharLookup pair_target(const std::vector<cd>& omega, int i, int a, int j, int b, double tol, double scale,
                       double* defect) {
  CharLookup out;
  const int n = a + b;
  if (n == 0) return out;
  const cd s = double(a) * omega[i] + double(b) * omega[j];
  double best = 1e300;
  int arg = -1;
  for (int m = 0; m < static_cast<int>(omega.size()); ++m) {
    if (m == i || m == j) continue;
    double dist = std::abs(s - double(n) * omega[m]) / scale;
    if (dist < best) {
      best = dist;
      arg = m;
    }
  }
  if (arg >= 0 && best <= tol) {
    out.m = arg;
    out.n = n;
    if (defect) *defect = best;
  }
  return out;
}

std::vector<int> primitive_up_to_sign(std::vector<int> c) {
  int g = 0;
  for (int v : c) g = std::gcd(g, std::abs(v));
  if (g > 1)
    for (int& v : c) v /= g;
  for (int v : c) {
    if (v == 0) continue;
    if (v < 0)
      for (int& w : c) w = -w;
    break;
  }
  return c;
}

}  // namespace

CharLookup test_characteristic(const std::vector<cd>& omega, const Alpha& alpha, double tol) {
  std::vector<int> nz;
  for (int i = 0; i < static_cast<int>(alpha.size()); ++i)
    if (alpha[i] != 0) nz.push_back(i);
  CharLookup out;
  if (nz.size() == 1) {
    out.m = nz[0];
    out.n = alpha[nz[0]];
  } else if (nz.size() == 2) {
    out = pair_target(omega, nz[0], alpha[nz[0]], nz[1], alpha[nz[1]], tol, omega_scale(omega), nullptr);
  }
  return out;
}

std::vector<std::vector<CharMode>> find_characteristic_modes(const std::vector<cd>& omega,
                                                             const SpectrumLattice& lat, double tol) {
  const int M = static_cast<int>(omega.size());
  if (lat.M() != M) fail(ErrorKind::InvalidInput, "find-resonances", "lattice and mode counts differ");
  const int B = lat.bound;
  const double scale = omega_scale(omega);
  std::vector<std::vector<CharMode>> out(M);
  for (int m = 0; m < M; ++m)
    for (int n = -B; n <= B; ++n) {
      if (n == 0 || !lat.contains(m, n)) continue;
      CharMode c;
      c.alpha.assign(M, 0);
      c.alpha[m] = n;
      c.n_alpha = n;
      out[m].push_back(c);
    }
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j)
      for (int a = -B; a <= B; ++a) {
        if (a == 0 || !lat.contains(i, a)) continue;
        for (int b = -B; b <= B; ++b) {
          if (b == 0 || !lat.contains(j, b)) continue;
          double defect = 0.0;
          CharLookup t = pair_target(omega, i, a, j, b, tol, scale, &defect);
          if (t.m < 0) continue;
          CharMode c;
          c.alpha.assign(M, 0);
          c.alpha[i] = a;
          c.alpha[j] = b;
          c.n_alpha = t.n;
          c.defect = defect;
          out[t.m].push_back(c);
        }
      }
  return out;
}

std::vector<int> family_key(const Triple& t, int M) {
  std::vector<int> c(M, 0);
  c[t.p] += t.np;
  c[t.q] -= t.nq;
  c[t.r] -= t.nr;
  return primitive_up_to_sign(c);
}

namespace {

// Among the arrangements n_p phi_p = n_q phi_q + n_r phi_r of a relation
// vector, pick the normalized one with the fewest negative coefficients, then
// the lexicographically smallest (p, q, r).
bool representative(const std::vector<int>& c, const std::vector<ModeClass>& cls, const SpectrumLattice& lat,
                    Triple& best) {
  std::vector<int> supp;
  for (int i = 0; i < static_cast<int>(c.size()); ++i)
    if (c[i] != 0) supp.push_back(i);
  if (supp.size() != 3) return false;
  bool found = false;
  std::tuple<int, int, int, int, int> best_key{};
  const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (const auto& pr : perms) {
    int p = supp[pr[0]], q = supp[pr[1]], r = supp[pr[2]];
    for (int s : {1, -1}) {
      int np = s * c[p], nq = -s * c[q], nr = -s * c[r];
      if (!lat.contains(p, np) || !lat.contains(q, nq) || !lat.contains(r, nr)) continue;
      if (is_hyperbolic(cls[p]) && np <= 0) continue;
      int neg = (np < 0) + (nq < 0) + (nr < 0);
      auto key = std::make_tuple(neg, p, q, r, -np);
      if (!found || key < best_key) {
        found = true;
        best_key = key;
        best.p = p;
        best.q = q;
        best.r = r;
        best.np = np;
        best.nq = nq;
        best.nr = nr;
      }
    }
  }
  return found;
}

}  // namespace

ResonanceSet find_resonances(const std::vector<cd>& omega, const std::vector<ModeClass>& cls,
                             const SpectrumLattice& lat, double tol) {
  const int M = static_cast<int>(omega.size());
  if (static_cast<int>(cls.size()) != M) fail(ErrorKind::InvalidInput, "find-resonances", "class list size");
  ResonanceSet rs;
  rs.bound = lat.bound;
  rs.tol = tol;
  rs.omega = omega;
  rs.charmodes = find_characteristic_modes(omega, lat, tol);
  std::map<std::vector<int>, Triple> families;
  for (int m = 0; m < M; ++m) {
    for (const auto& cm : rs.charmodes[m]) {
      std::vector<int> nz;
      for (int i = 0; i < M; ++i)
        if (cm.alpha[i] != 0) nz.push_back(i);
      if (nz.size() != 2) continue;
      std::vector<int> c(M, 0);
      c[m] = cm.n_alpha;
      c[nz[0]] = -cm.alpha[nz[0]];
      c[nz[1]] = -cm.alpha[nz[1]];
      auto key = primitive_up_to_sign(c);
      auto it = families.find(key);
      if (it == families.end()) {
        Triple t;
        if (!representative(key, cls, lat, t)) {
          // No arrangement satisfies the sign constraints; keep the raw one.
          t.p = m;
          t.q = nz[0];
          t.r = nz[1];
          int g = std::abs(std::gcd(std::gcd(cm.n_alpha, cm.alpha[nz[0]]), cm.alpha[nz[1]]));
          t.np = cm.n_alpha / g;
          t.nq = cm.alpha[nz[0]] / g;
          t.nr = cm.alpha[nz[1]] / g;
          rs.warnings.push_back("family without a sign-admissible arrangement at mode " + std::to_string(m));
        }
        it = families.emplace(key, t).first;
      }
      it->second.defect = std::max(it->second.defect, cm.defect);
      it->second.generated.push_back({m, cm});
    }
  }
  for (auto& kv : families) rs.triples.push_back(kv.second);
  std::sort(rs.triples.begin(), rs.triples.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.p, a.q, a.r, a.np, a.nq, a.nr) < std::tie(b.p, b.q, b.r, b.np, b.nq, b.nr);
  });
  if (rs.triples.size() > 1)
    rs.warnings.push_back("MultipleTripleFamilies: " + std::to_string(rs.triples.size()) +
                          " families found; interaction terms are summed over all of them");
  for (const auto& t : rs.triples)
    if (t.defect > 1e-13)
      rs.warnings.push_back("near-resonance accepted within tolerance (defect " + std::to_string(t.defect) + ")");
  return rs;
}

ResonanceSet find_resonances(const ModeTable& mt, const SpectrumLattice& lat, double tol) {
  return find_resonances(mt.omega, mt.cls, lat, tol);
}

ResonanceKind classify_resonance(const Triple& t, const std::vector<ModeClass>& cls) {
  if (is_hyperbolic(cls.at(t.p))) {
    if (!is_hyperbolic(cls.at(t.q)) || !is_hyperbolic(cls.at(t.r)))
      fail(ErrorKind::ClassificationContradiction, "find-resonances",
           "hyperbolic target paired with an elliptic phase");
    return ResonanceKind::Hyperbolic;
  }
  if (is_hyperbolic(cls.at(t.q)) && is_hyperbolic(cls.at(t.r)))
    fail(ErrorKind::ClassificationContradiction, "find-resonances", "elliptic target from two hyperbolic phases");
  return ResonanceKind::Elliptic;
}

CharLookup lookup_characteristic(const ResonanceSet& rs, const Alpha& alpha) {
  int amax = 0;
  std::vector<int> nz;
  for (int i = 0; i < static_cast<int>(alpha.size()); ++i) {
    amax = std::max(amax, std::abs(alpha[i]));
    if (alpha[i] != 0) nz.push_back(i);
  }
  if (nz.size() > 2) fail(ErrorKind::SpectrumViolation, "lookup", "alpha has more than two nonzero entries");
  CharLookup out;
  if (nz.size() == 1) {
    out.m = nz[0];
    out.n = alpha[nz[0]];
    return out;
  }
  if (amax > rs.bound) {
    if (rs.omega.empty() || test_characteristic(rs.omega, alpha, rs.tol).m >= 0)
      fail(ErrorKind::UnindexedMode, "lookup", "characteristic alpha outside the resonance search bound");
    return out;
  }
  for (int m = 0; m < static_cast<int>(rs.charmodes.size()); ++m)
    for (const auto& cm : rs.charmodes[m])
      if (cm.alpha == alpha) {
        out.m = m;
        out.n = cm.n_alpha;
        return out;
      }
  return out;
}

}  // namespace geoptics
