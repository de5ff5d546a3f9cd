#include "oamjrc/beamphysics.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "oamjrc/constants.hpp"

namespace oamjrc {

void BeamConfig::validate() const {
  if (!(wavelength0 > 0.0)) throw std::invalid_argument("beam: wavelength0 must be positive");
  if (!(w_ref > 0.0)) throw std::invalid_argument("beam: w_ref must be positive");
  if (!(z_ref > 0.0)) throw std::invalid_argument("beam: z_ref must be positive");
}

double waist(int l, const BeamConfig& cfg) {
  const int al = std::abs(l);
  if (cfg.waist_policy == WaistPolicy::Fixed || al == 0) return cfg.w_ref;
  return cfg.w_ref / std::sqrt(static_cast<double>(al));
}

double rayleigh_distance(int l, const BeamConfig& cfg) {
  const double w = waist(l, cfg);
  return kPi * w * w / cfg.wavelength0;
}

BeamGeometry beam_geometry(int l, double z, const BeamConfig& cfg) {
  if (!(z > 0.0)) throw std::domain_error("beam_geometry: z must be positive");
  const double w0 = waist(l, cfg);
  const double zr = rayleigh_distance(l, cfg);
  const double ratio = z / zr;
  const double spread = 1.0 + ratio * ratio;

  BeamGeometry g;
  g.w_z = w0 * std::sqrt(spread);
  const double inv = zr / z;  // pi w^2 / (lambda z)
  g.R_z = z * (1.0 + inv * inv);
  g.r_max = w0 * std::sqrt(std::abs(l) * spread / 2.0);
  g.d_ref = std::hypot(z, g.r_max);
  return g;
}

std::complex<double> lg_field(double r, double phi, double z, int l, const BeamConfig& cfg) {
  if (r < 0.0) throw std::domain_error("lg_field: r must be non-negative");
  const BeamGeometry g = beam_geometry(l, z, cfg);
  const int al = std::abs(l);
  const double zr = rayleigh_distance(l, cfg);

  // sqrt(p! / (pi (p + |l|)!)) with p = 0
  const double norm = 1.0 / std::sqrt(kPi * std::tgamma(al + 1.0));
  const double rho = r / g.w_z;
  const double amplitude =
      norm / g.w_z * std::pow(std::sqrt(2.0) * rho, al) * std::exp(-rho * rho);

  const double gouy = std::atan(z / zr);
  const double phase = -kPi * r * r / (cfg.wavelength0 * g.R_z) + (al + 1) * gouy - l * phi;
  return std::polar(amplitude, phase);
}

}  // namespace oamjrc
