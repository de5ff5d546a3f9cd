#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "oamjrc/constants.hpp"
#include "oamjrc/linalg.hpp"
#include "oamjrc/scenario.hpp"

namespace oamjrc::testing {

// Three radar states, 3x3 elements, two targets. Small enough for the
// explicit D^2 x D^2 weighting and for 1e5-snapshot averages.
inline Scene small_scene() {
  Scene s = reference_scene(0.5);
  s.array.M = 3;
  s.array.N = 3;
  s.oam = OamPlan(2, 2, 0.5);  // l = -2, 0, 2: distinct curvatures keep r observable
  s.targets = {
      {deg2rad(10.0), deg2rad(40.0), 12.0, 0.212, 1.0, 8.0},
      {deg2rad(-25.0), deg2rad(15.0), 30.0, 0.218, 2.0, 3.0},
  };
  s.set_snr_db(10.0);
  return s;
}

using ld = long double;
using cld = std::complex<long double>;

// Independent evaluation of the radar-state response in long double,
// straight from the channel phase: range + curvature - helical + DoA.
inline std::vector<cld> steering_ld(const Scene& s, const Scatterer& t) {
  const ld c = kSpeedOfLight;
  const ld pi = 3.141592653589793238462643383279502884L;
  const ld lam0 = c / s.array.f0;
  const ld ring = s.ring_radius();
  std::vector<cld> a;
  for (int u : s.oam.radar_states()) {
    const int l = s.oam.l(u);
    const ld curv = s.curvature(l);
    for (int m = 0; m < s.array.M; ++m)
      for (int n = 0; n < s.array.N; ++n) {
        const ld ph = 2 * pi * m * ld(s.array.delta_f) * ld(t.R) / c -
                      pi * (ld(t.r) * t.r - ring * ring) / (lam0 * curv) - l * ld(t.phi) -
                      2 * pi * ld(s.array.d) * std::sin(ld(t.psi)) * n * ld(s.array.f0) / c;
        a.emplace_back(std::cos(ph), std::sin(ph));
      }
  }
  return a;
}

// vec(R) in column-major order for the long-double model.
inline std::vector<cld> vec_cov_ld(const Scene& s) {
  std::vector<std::vector<cld>> cols;
  for (const auto& t : s.targets) cols.push_back(steering_ld(s, t));
  const std::size_t D = cols.front().size();
  std::vector<cld> v(D * D, cld(0));
  for (std::size_t q = 0; q < cols.size(); ++q)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t i = 0; i < D; ++i) v[j * D + i] += ld(s.targets[q].sigma2) * cols[q][i] * std::conj(cols[q][j]);
  for (std::size_t i = 0; i < D; ++i) v[i * D + i] += ld(s.noise_power);
  return v;
}

inline double rel_err(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace oamjrc::testing
