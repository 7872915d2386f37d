#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "geoptics/resonance_lattice.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

namespace oracles {

using geoptics::cd;
using geoptics::ModeClass;

inline bool in_Z(ModeClass c, int n) {
  if (c == ModeClass::Positive) return n >= 0;
  if (c == ModeClass::Negative) return n <= 0;
  return true;
}

inline double unit_scale(const std::vector<cd>& w) {
  double s = 0.0;
  for (cd z : w) s = std::max(s, std::abs(z));
  return s > 0.0 ? s : 1.0;
}

// (target m, alpha, n) for every two-component alpha with entries in the sign
// lattices and |alpha|_inf <= B that satisfies alpha.omega = n omega_m.
using CharEntry = std::tuple<int, std::vector<int>, int>;

inline std::set<CharEntry> brute_characteristic(const std::vector<cd>& w, const std::vector<ModeClass>& cls, int B,
                                               double tol) {
  const int M = static_cast<int>(w.size());
  const double s = unit_scale(w);
  std::set<CharEntry> out;
  std::vector<int> a(M, 0);
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j)
      for (int ai = -B; ai <= B; ++ai)
        for (int aj = -B; aj <= B; ++aj) {
          if (ai == 0 || aj == 0 || !in_Z(cls[i], ai) || !in_Z(cls[j], aj)) continue;
          const int n = ai + aj;
          if (n == 0) continue;
          for (int m = 0; m < M; ++m) {
            if (m == i || m == j) continue;
            if (std::abs(double(ai) * w[i] + double(aj) * w[j] - double(n) * w[m]) / s > tol) continue;
            std::fill(a.begin(), a.end(), 0);
            a[i] = ai;
            a[j] = aj;
            out.insert({m, a, n});
          }
        }
  return out;
}

// Primitive relation vectors c (sum c_i omega_i = 0, sum c_i = 0, three nonzero
// entries), sign-normalized so the first nonzero entry is positive, found by
// scanning every (p, q, r, n_q, n_r) with |n_q|, |n_r| <= B.
inline std::set<std::vector<int>> brute_families(const std::vector<cd>& w, const std::vector<ModeClass>& cls, int B,
                                                 double tol) {
  const int M = static_cast<int>(w.size());
  const double s = unit_scale(w);
  std::set<std::vector<int>> out;
  for (int p = 0; p < M; ++p)
    for (int q = 0; q < M; ++q)
      for (int r = q + 1; r < M; ++r) {
        if (p == q || p == r) continue;
        for (int nq = -B; nq <= B; ++nq)
          for (int nr = -B; nr <= B; ++nr) {
            const int np = nq + nr;
            if (nq == 0 || nr == 0 || np == 0) continue;
            if (!in_Z(cls[q], nq) || !in_Z(cls[r], nr)) continue;
            if (std::abs(double(np) * w[p] - double(nq) * w[q] - double(nr) * w[r]) / s > tol) continue;
            std::vector<int> c(M, 0);
            c[p] = np;
            c[q] = -nq;
            c[r] = -nr;
            int g = 0;
            for (int v : c) g = std::gcd(g, std::abs(v));
            for (int& v : c) v /= g;
            for (int v : c)
              if (v != 0) {
                if (v < 0)
                  for (int& x : c) x = -x;
                break;
              }
            out.insert(c);
          }
      }
  return out;
}

inline std::set<CharEntry> library_characteristic(const geoptics::ResonanceSet& rs) {
  std::set<CharEntry> out;
  for (int m = 0; m < static_cast<int>(rs.charmodes.size()); ++m)
    for (const auto& c : rs.charmodes[m]) {
      int nz = 0;
      for (int v : c.alpha) nz += v != 0;
      if (nz == 2) out.insert({m, c.alpha, c.n_alpha});
    }
  return out;
}

inline std::set<std::vector<int>> library_families(const geoptics::ResonanceSet& rs, int M) {
  std::set<std::vector<int>> out;
  for (const auto& t : rs.triples) out.insert(geoptics::family_key(t, M));
  return out;
}

// Direct trapezoidal quadrature of the prepared integral
//   (1/2pi) int f_nq(np/nq th - nr/nq s) d_s g(s) ds
// at th, with f and g given by coefficients at -K..K.
inline cd prepared_integral_quadrature(const std::vector<cd>& f, const std::vector<cd>& g, int np, int nq, int nr,
                                       double th, int nodes) {
  const int Kf = (static_cast<int>(f.size()) - 1) / 2, Kg = (static_cast<int>(g.size()) - 1) / 2;
  const cd I(0.0, 1.0);
  cd acc = 0.0;
  for (int q = 0; q < nodes; ++q) {
    const double s = 2.0 * M_PI * q / nodes;
    const double z = (double(np) * th - double(nr) * s) / double(nq);
    cd fv = 0.0;
    for (int k = -Kf; k <= Kf; ++k)
      if (k % nq == 0) fv += f[k + Kf] * std::exp(I * (double(k) * z));
    cd dg = 0.0;
    for (int k = -Kg; k <= Kg; ++k) dg += I * double(k) * g[k + Kg] * std::exp(I * (double(k) * s));
    acc += fv * dg;
  }
  return acc / double(nodes);
}

}  // namespace oracles
