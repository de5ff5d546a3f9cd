#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oamjrc/beamphysics.hpp"

namespace oamjrc {

struct ArrayConfig {
  int M = 0;             ///< transmit elements
  int N = 0;             ///< receive elements
  double d = 0.0;        ///< interelement spacing (m)
  double f0 = 0.0;       ///< reference carrier (Hz)
  double delta_f = 0.0;  ///< FDA frequency increment (Hz)

  double wavelength0() const;
  /// Wavelength radiated by transmit element m, c / (f0 - m delta_f).
  double wavelength(int m) const;
  void validate() const;
};

/// OAM state set l_u = u * delta for u in [-U, U], split between radar-only
/// states (|u| <= mu U) and communication states (the rest).
class OamPlan {
 public:
  OamPlan() = default;
  OamPlan(int U, int delta, double mu);

  int U() const { return U_; }
  int delta() const { return delta_; }
  double mu() const { return mu_; }

  /// mu U, rounded down; equals mu U exactly for plans loaded from config.
  int radar_half() const { return radar_half_; }
  bool mu_is_integral() const;

  int state_count() const { return 2 * U_ + 1; }
  int radar_state_count() const { return 2 * radar_half_ + 1; }
  int comm_state_count() const { return state_count() - radar_state_count(); }

  int l(int u) const { return u * delta_; }
  bool is_radar(int u) const { return u >= -radar_half_ && u <= radar_half_; }

  /// u = -mu U .. mu U
  std::vector<int> radar_states() const;
  /// u = -U .. -mu U - 1 followed by mu U + 1 .. U
  std::vector<int> comm_states() const;

 private:
  int U_ = 0;
  int delta_ = 1;
  double mu_ = 1.0;
  int radar_half_ = 0;
};

struct Scatterer {
  double phi = 0.0;     ///< DoD azimuth on the OAM ring (rad)
  double psi = 0.0;     ///< DoA at the receive array (rad)
  double R = 0.0;       ///< bistatic range (m)
  double r = 0.0;       ///< radial distance in the target plane (m)
  double sigma2 = 1.0;  ///< scattering power E|rho|^2
  double nu = 0.0;      ///< linear velocity along the x axis (m/s)
};

struct Scene {
  ArrayConfig array;
  BeamConfig beam;
  OamPlan oam;
  std::vector<Scatterer> targets;
  double noise_power = 0.0;  ///< sigma_n^2 per element per snapshot

  int Q() const { return static_cast<int>(targets.size()); }

  /// Common OAM ring radius r_max(z_ref): the ring of the |l| = 1 beam.
  double ring_radius() const;
  /// Wavefront curvature R_l(z_ref) of state l.
  double curvature(int l) const;

  double total_signal_power() const;
  /// SNR = sum_q sigma_q^2 / sigma_n^2 in dB (+inf when noise is off).
  double snr_db() const;
  /// Sets noise_power from an SNR in dB; +inf disables noise.
  void set_snr_db(double snr_db);

  Scene with_mu(double mu) const;
};

struct ConditionCheck {
  std::string id;  ///< e.g. "C4" or "A2.r[1]"
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;

  bool ok() const;
  /// First check with the given id, or nullptr.
  const ConditionCheck* find(const std::string& id) const;
};

/// Checks identifiability conditions C1-C5 and target assumptions A1/A2.
/// Total: never throws; degenerate scenes produce failing entries.
ValidationReport validate_scene(const Scene& scene);

struct AmbiguityLimits {
  double R_max = 0.0;    ///< c / delta_f
  double phi_min = 0.0;  ///< -pi / (2 delta)
  double phi_max = 0.0;
  double r_min = 0.0;    ///< radial interval implied by the curvature phase
  double r_max = 0.0;
};

AmbiguityLimits ambiguity_limits(const Scene& scene);

/// The three-target automotive scene: M = N = 6, f0 = 79 GHz,
/// delta_f = 30 kHz, 21 OAM states, w_1 = 2 lambda0, z_ref = 1.9 m.
Scene reference_scene(double mu = 0.5);

}  // namespace oamjrc
