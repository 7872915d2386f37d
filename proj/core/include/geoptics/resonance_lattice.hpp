#pragma once

#include "geoptics/common.hpp"
#include "geoptics/mode_analysis.hpp"

#include <string>
#include <vector>

namespace geoptics {

// Sign constraint on the spectrum of a profile attached to one mode.
enum class LatticeSign { All, Positive, Negative };

struct SpectrumLattice {
  std::vector<LatticeSign> Z;  // one per mode
  int bound = 12;              // search radius on |alpha|_inf

  int M() const { return static_cast<int>(Z.size()); }
  bool contains(int m, int n) const;
};

SpectrumLattice make_lattice(const std::vector<ModeClass>& cls, int bound);
SpectrumLattice make_lattice(const ModeTable& mt, int bound);

// Sparse lattice vector with at most two nonzero entries.
using Alpha = std::vector<int>;

struct CharMode {
  Alpha alpha;
  int n_alpha = 0;
  double defect = 0.0;  // |alpha.omega - n omega_m| after unit scaling
};

struct Triple {
  int p = 0, q = 0, r = 0;
  int np = 0, nq = 0, nr = 0;
  double defect = 0.0;
  // Characteristic alphas generated by this family, as (target mode, CharMode).
  std::vector<std::pair<int, CharMode>> generated;
};

struct ResonanceSet {
  int bound = 0;
  double tol = 1e-10;
  std::vector<cd> omega;
  std::vector<Triple> triples;                   // one normalized representative per family
  std::vector<std::vector<CharMode>> charmodes;  // indexed by target mode m
  std::vector<std::string> warnings;
  bool multiple_families() const { return triples.size() > 1; }
};

// alpha.phi = n_alpha phi_m test over Z^{M;2} within the bound.
std::vector<std::vector<CharMode>> find_characteristic_modes(const std::vector<cd>& omega,
                                                             const SpectrumLattice& lat, double tol = 1e-10);

ResonanceSet find_resonances(const std::vector<cd>& omega, const std::vector<ModeClass>& cls,
                             const SpectrumLattice& lat, double tol = 1e-10);
ResonanceSet find_resonances(const ModeTable& mt, const SpectrumLattice& lat, double tol = 1e-10);

enum class ResonanceKind { Hyperbolic, Elliptic };
ResonanceKind classify_resonance(const Triple& t, const std::vector<ModeClass>& cls);

// Primitive relation vector c (c_p n_p - ... = 0 form, c . omega = 0, sum c = 0)
// normalized up to sign; used as the family key.
std::vector<int> family_key(const Triple& t, int M);

// Lookup of the characteristic target for alpha: returns m and n_alpha, or
// m = -1 when alpha is not characteristic.  alpha must lie within the bound.
struct CharLookup {
  int m = -1;
  int n = 0;
};
CharLookup lookup_characteristic(const ResonanceSet& rs, const Alpha& alpha);

// Direct characteristic test that does not consult the enumeration.
CharLookup test_characteristic(const std::vector<cd>& omega, const Alpha& alpha, double tol = 1e-10);

}  // namespace geoptics
