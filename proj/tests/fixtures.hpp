#pragma once

#include "geoptics/config.hpp"
#include "geoptics/hyperbolic_system.hpp"
#include "geoptics/mode_analysis.hpp"
#include "geoptics/resonance_lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fixtures {

using namespace geoptics;

inline std::string config_path(const std::string& name) { return std::string(GEOPTICS_CONFIG_DIR) + "/" + name; }

// 2D Euler at (rho, u1, u2) = (1, 0.5, -0.4), c = 1, boundary row B0 = [0 0 1].
inline SystemSpec euler2d() {
  EulerParams prm;
  prm.d = 2;
  prm.u = {0.5, -0.4};
  prm.K = euler_K_for_sound_speed(1.0, 1.0, 1.4);
  Mat B0(1, 3);
  B0 << 0, 0, 1;
  return make_euler(prm, B0);
}

// 3D Euler, subsonic outflow through x_3 = 0 with one boundary row.
inline SystemSpec euler3d_outflow() {
  EulerParams prm;
  prm.d = 3;
  prm.u = {0.3, -0.2, -0.5};
  prm.K = euler_K_for_sound_speed(1.0, 1.0, 1.4);
  Mat B0(1, 4);
  B0 << 0, 0, 0, 1;
  return make_euler(prm, B0);
}

// Decoupled transport system whose phases at beta = (-6, 0) are omega = (1, 2, 3),
// so 2 phi_2 = phi_1 + phi_3 is resonant.
inline SystemSpec resonant_diagonal() {
  Mat A1 = Mat::Zero(3, 3);
  A1.diagonal() << 0.1, 0.2, 0.3;
  Mat A2 = Mat::Zero(3, 3);
  A2.diagonal() << 6.0, 3.0, 2.0;
  return make_affine_system({A1, A2}, {}, Mat::Zero(3, 3), Mat::Identity(3, 3), "resonant_diagonal");
}

// Kind of the library error raised by fn, or nothing when it returns normally.
template <class Fn>
std::optional<ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline std::vector<ModeClass> all_outgoing(int M) { return std::vector<ModeClass>(M, ModeClass::Outgoing); }

}  // namespace fixtures
