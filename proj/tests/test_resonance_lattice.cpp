#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace geoptics;

TEST_SUITE("resonance_lattice") {
  TEST_CASE("lattices follow the mode classes") {
    SpectrumLattice lat = make_lattice({ModeClass::Incoming, ModeClass::Positive, ModeClass::Negative}, 4);
    CHECK(lat.contains(0, -3));
    CHECK(lat.contains(1, 2));
    CHECK_FALSE(lat.contains(1, -2));
    CHECK(lat.contains(2, -2));
    CHECK_FALSE(lat.contains(2, 1));
  }

  TEST_CASE("two distinct modes only have singleton characteristic alphas") {
    const std::vector<cd> w{1.0, 2.5};
    auto cm = find_characteristic_modes(w, make_lattice(fixtures::all_outgoing(2), 5));
    for (const auto& per : cm)
      for (const auto& c : per) {
        int nz = 0;
        for (int v : c.alpha) nz += v != 0;
        CHECK(nz == 1);
      }
  }

  TEST_CASE("omega = (1,2,3) has the single family 2 phi_2 = phi_1 + phi_3") {
    const std::vector<cd> w{1.0, 2.0, 3.0};
    ResonanceSet rs = find_resonances(w, fixtures::all_outgoing(3), make_lattice(fixtures::all_outgoing(3), 6));
    REQUIRE(rs.triples.size() == 1);
    CHECK(family_key(rs.triples[0], 3) == std::vector<int>{1, -2, 1});
    CharLookup l = lookup_characteristic(rs, {1, 0, 1});
    CHECK(l.m == 1);
    CHECK(l.n == 2);
    CHECK(test_characteristic(w, {1, 0, 1}).m == 1);
  }

  TEST_CASE("rationally independent phases have no triples") {
    const std::vector<cd> w{1.0, std::sqrt(2.0), M_PI};
    ResonanceSet rs = find_resonances(w, fixtures::all_outgoing(3), make_lattice(fixtures::all_outgoing(3), 8));
    CHECK(rs.triples.empty());
    CHECK(oracles::brute_families(w, fixtures::all_outgoing(3), 8, 1e-10).empty());
  }

  TEST_CASE("brute-force equivalence on the elliptic-pair fixture") {
    ModeTable mt = compute_modes(fixtures::euler2d(), {0.0, 1.0});
    ResonanceSet rs = find_resonances(mt, make_lattice(mt, 8));
    CHECK(oracles::library_characteristic(rs) == oracles::brute_characteristic(mt.omega, mt.cls, 8, 1e-10));
    CHECK(oracles::library_families(rs, mt.M()) == oracles::brute_families(mt.omega, mt.cls, 8, 1e-10));
  }

  TEST_CASE("elliptic targets pair with an elliptic phase") {
    const std::vector<cd> w{1.0, cd(1.0, 2.0), cd(1.0, 1.0)};
    const std::vector<ModeClass> cls{ModeClass::Incoming, ModeClass::Positive, ModeClass::Positive};
    ResonanceSet rs = find_resonances(w, cls, make_lattice(cls, 6));
    REQUIRE_FALSE(rs.triples.empty());
    for (const Triple& t : rs.triples) {
      CHECK(std::abs(double(t.np) * w[t.p] - double(t.nq) * w[t.q] - double(t.nr) * w[t.r]) < 1e-10);
      CHECK(t.np == t.nq + t.nr);
      if (is_elliptic(cls[t.p])) CHECK((is_elliptic(cls[t.q]) || is_elliptic(cls[t.r])));
      CHECK(classify_resonance(t, cls) == (is_elliptic(cls[t.p]) ? ResonanceKind::Elliptic : ResonanceKind::Hyperbolic));
    }
  }

  TEST_CASE("contradictory classification is reported") {
    Triple t;
    t.p = 0, t.q = 1, t.r = 2;
    t.np = 2, t.nq = 1, t.nr = 1;
    const std::vector<ModeClass> cls{ModeClass::Incoming, ModeClass::Positive, ModeClass::Outgoing};
    CHECK_THROWS_AS(classify_resonance(t, cls), Error);
  }

  TEST_CASE("relabeling the modes permutes the families") {
    const std::vector<cd> w{1.0, 2.0, 3.0, 5.0};
    const std::vector<cd> v{w[2], w[0], w[3], w[1]};  // v[i] = w[perm[i]]
    const int perm[4] = {2, 0, 3, 1};
    auto cls = fixtures::all_outgoing(4);
    ResonanceSet a = find_resonances(w, cls, make_lattice(cls, 6));
    ResonanceSet b = find_resonances(v, cls, make_lattice(cls, 6));
    REQUIRE(a.triples.size() == b.triples.size());
    std::set<std::vector<int>> ka = oracles::library_families(a, 4), kb;
    for (const auto& key : oracles::library_families(b, 4)) {
      std::vector<int> c(4);
      for (int i = 0; i < 4; ++i) c[perm[i]] = key[i];
      for (int x : c)
        if (x != 0) {
          if (x < 0)
            for (int& y : c) y = -y;
          break;
        }
      kb.insert(c);
    }
    CHECK(ka == kb);
  }

  TEST_CASE("characteristic alpha past the bound is flagged") {
    const std::vector<cd> w{1.0, 2.0, 3.0};
    ResonanceSet rs = find_resonances(w, fixtures::all_outgoing(3), make_lattice(fixtures::all_outgoing(3), 2));
    CHECK_THROWS_AS(lookup_characteristic(rs, {3, 0, 3}), Error);
    CHECK(lookup_characteristic(rs, {3, 0, 1}).m == -1);
  }

  TEST_CASE("a smaller bound finds a subset") {
    for (std::vector<double> beta : {std::vector<double>{2.0, 1.0}, std::vector<double>{0.0, 1.0}}) {
      ModeTable mt = compute_modes(fixtures::euler2d(), beta);
      const ResonanceSet r4 = find_resonances(mt, make_lattice(mt, 4));
      const ResonanceSet r8 = find_resonances(mt, make_lattice(mt, 8));
      const auto c4 = oracles::library_characteristic(r4), c8 = oracles::library_characteristic(r8);
      CHECK(std::includes(c8.begin(), c8.end(), c4.begin(), c4.end()));
      const auto f4 = oracles::library_families(r4, mt.M()), f8 = oracles::library_families(r8, mt.M());
      CHECK(std::includes(f8.begin(), f8.end(), f4.begin(), f4.end()));
    }
    const std::vector<cd> w{1.0, 2.0, 3.0, 5.0};
    const auto c4 = oracles::library_characteristic(
        find_resonances(w, fixtures::all_outgoing(4), make_lattice(fixtures::all_outgoing(4), 4)));
    const auto c8 = oracles::library_characteristic(
        find_resonances(w, fixtures::all_outgoing(4), make_lattice(fixtures::all_outgoing(4), 8)));
    CHECK_FALSE(c4.empty());
    CHECK(c4.size() < c8.size());
    CHECK(std::includes(c8.begin(), c8.end(), c4.begin(), c4.end()));
  }
}
