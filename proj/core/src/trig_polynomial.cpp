#include "geoptics/trig_polynomial.hpp"

#include <cmath>

namespace geoptics {

void TrigPolynomial::add(const Alpha& a, const CMat& v) {
  if (static_cast<int>(a.size()) != M) fail(ErrorKind::InvalidInput, "trig", "alpha length differs from M");
  if (v.rows() != N || v.cols() != npts) fail(ErrorKind::InvalidInput, "trig", "coefficient block shape");
  auto it = terms.find(a);
  if (it == terms.end())
    terms.emplace(a, v);
  else
    it->second += v;
}

CMat TrigPolynomial::coeff(const Alpha& a) const {
  auto it = terms.find(a);
  if (it == terms.end()) return CMat::Zero(N, npts);
  return it->second;
}

double TrigPolynomial::max_abs() const {
  double m = 0.0;
  for (const auto& kv : terms) m = std::max(m, kv.second.cwiseAbs().maxCoeff());
  return m;
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& o) const {
  TrigPolynomial r = *this;
  for (const auto& kv : o.terms) r.add(kv.first, kv.second);
  return r;
}

TrigPolynomial TrigPolynomial::operator-(const TrigPolynomial& o) const {
  TrigPolynomial r = *this;
  for (const auto& kv : o.terms) r.add(kv.first, -kv.second);
  return r;
}

Alpha single_phase(int M, int m, int n) {
  Alpha a(M, 0);
  a[m] = n;
  return a;
}

int alpha_sum(const Alpha& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

cd alpha_dot(const Alpha& a, const std::vector<cd>& omega) {
  cd s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += double(a[i]) * omega[i];
  return s;
}

namespace {

bool is_zero(const Alpha& a) {
  for (int v : a)
    if (v != 0) return false;
  return true;
}

bool keep_mode(ProjectorPart part, ModeClass c) {
  switch (part) {
    case ProjectorPart::All: return true;
    case ProjectorPart::Hyperbolic: return is_hyperbolic(c);
    case ProjectorPart::Elliptic: return is_elliptic(c);
  }
  return false;
}

template <class Emit>
TrigPolynomial project_impl(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt,
                            ProjectorPart part, Emit emit) {
  TrigPolynomial out(v.N, v.M, v.npts);
  for (const auto& [alpha, V] : v.terms) {
    if (is_zero(alpha)) {
      if (part != ProjectorPart::Elliptic) out.add(alpha, V);
      continue;
    }
    CharLookup c = lookup_characteristic(rs, alpha);
    if (c.m < 0 || !keep_mode(part, mt.cls[c.m])) continue;
    emit(out, alpha, c, mt.P[c.m] * V);
  }
  return out;
}

}  // namespace

TrigPolynomial project_E(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt, ProjectorPart part) {
  return project_impl(v, rs, mt, part, [&](TrigPolynomial& out, const Alpha&, const CharLookup& c, const CMat& PV) {
    out.add(single_phase(v.M, c.m, c.n), PV);
  });
}

TrigPolynomial project_Eflat(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt) {
  return project_impl(v, rs, mt, ProjectorPart::All,
                      [](TrigPolynomial& out, const Alpha& a, const CharLookup&, const CMat& PV) { out.add(a, PV); });
}

TrigPolynomial project_Emk(const TrigPolynomial& v, const ResonanceSet& rs, const ModeTable& mt, int m, int k) {
  TrigPolynomial out(v.N, v.M, v.npts);
  const CVec r = mt.r[m].col(k);
  const CMat l = mt.l[m].row(k);
  for (const auto& [alpha, V] : v.terms) {
    if (is_zero(alpha)) continue;
    CharLookup c = lookup_characteristic(rs, alpha);
    if (c.m != m) continue;
    out.add(single_phase(v.M, m, c.n), r * (l * V));
  }
  return out;
}

void check_spectrum(const TrigPolynomial& v, const SpectrumLattice& lat) {
  for (const auto& kv : v.terms) {
    int nz = 0;
    for (int i = 0; i < v.M; ++i) {
      if (kv.first[i] == 0) continue;
      ++nz;
      if (!lat.contains(i, kv.first[i]))
        fail(ErrorKind::SpectrumViolation, "substitute", "alpha entry outside the sign lattice of its mode");
    }
    if (nz > 2) fail(ErrorKind::SpectrumViolation, "substitute", "alpha has more than two nonzero entries");
  }
}

CMat substitute(const TrigPolynomial& v, const std::vector<cd>& omega, const SpectrumLattice& lat, double theta0,
                double xid) {
  check_spectrum(v, lat);
  CMat out = CMat::Zero(v.N, v.npts);
  for (const auto& [alpha, V] : v.terms) {
    const cd phase = kI * (double(alpha_sum(alpha)) * theta0 + alpha_dot(alpha, omega) * xid);
    out += std::exp(phase) * V;
  }
  return out;
}

CMat corrector_symbol(const SystemSpec& sys, const ModeTable& mt, const Alpha& alpha) {
  const double s = alpha_sum(alpha);
  std::vector<double> b(mt.beta.size());
  for (size_t j = 0; j < b.size(); ++j) b[j] = s * mt.beta[j];
  return kI * Ltilde_of(sys, b, alpha_dot(alpha, mt.omega));
}

TrigPolynomial apply_L_theta(const SystemSpec& sys, const ModeTable& mt, const TrigPolynomial& v) {
  TrigPolynomial out(v.N, v.M, v.npts);
  for (const auto& [alpha, V] : v.terms) out.add(alpha, corrector_symbol(sys, mt, alpha) * V);
  return out;
}

}  // namespace geoptics
