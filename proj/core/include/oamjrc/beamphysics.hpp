#pragma once

#include <complex>

namespace oamjrc {

/// How the waist of the OAM state l derives from the reference waist.
enum class WaistPolicy {
  /// w_l = w_ref / sqrt(|l|) for l != 0 and w_ref for l = 0.
  EqualRing,
  /// w_l = w_ref for every state.
  Fixed,
};

struct BeamConfig {
  double wavelength0 = 0.0;  ///< carrier wavelength c / f0 (m)
  double w_ref = 0.0;        ///< waist of the |l| = 1 beam (m)
  WaistPolicy waist_policy = WaistPolicy::EqualRing;
  double z_ref = 0.0;        ///< transmitter to target-plane distance (m)

  /// Throws std::invalid_argument when any length is non-positive.
  void validate() const;
};

/// Beam quantities of one OAM state in a transverse plane at distance z.
struct BeamGeometry {
  double w_z = 0.0;    ///< spot size w_l(z)
  double R_z = 0.0;    ///< wavefront curvature radius R_l(z)
  double r_max = 0.0;  ///< radius of the intensity ring
  double d_ref = 0.0;  ///< origin to ring distance sqrt(z^2 + r_max^2)
};

/// Waist radius at z = 0 of state l under the configured policy.
double waist(int l, const BeamConfig& cfg);

/// Rayleigh distance pi w_l^2 / lambda0 of state l.
double rayleigh_distance(int l, const BeamConfig& cfg);

/// Spot size, curvature, and ring radius of state l at distance z.
/// Depends on |l| only. Throws std::domain_error for z <= 0.
BeamGeometry beam_geometry(int l, double z, const BeamConfig& cfg);

/// Laguerre-Gaussian field with radial index zero and unit normalization
/// constant, including the curvature, Gouy, and helical phase terms.
/// Throws std::domain_error for r < 0 or z <= 0.
std::complex<double> lg_field(double r, double phi, double z, int l, const BeamConfig& cfg);

}  // namespace oamjrc
