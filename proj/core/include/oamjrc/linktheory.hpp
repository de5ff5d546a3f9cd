#pragma once

#include <vector>

#include "oamjrc/linalg.hpp"
#include "oamjrc/scenario.hpp"

namespace oamjrc {

struct LinkParams {
  double mu = 0.5;
  int U = 10;
  int delta = 1;
  /// Received power per comm state in comm_states() order; empty means
  /// sigma_s2_default for every state.
  std::vector<double> sigma_s2;
  double sigma_s2_default = 1.0;
  double sigma_n2 = 1.0;
  double gamma_bar_b = 1.0;  ///< mean SNR per bit
  double corr_phi = 0.0;     ///< azimuth in the state correlation cos(dl * phi)
  double T_sym = 5e-6;

  OamPlan plan() const { return OamPlan(U, delta, mu); }
  double power_of(int comm_index) const;
  void validate() const;
};

struct LinkReport {
  std::vector<int> comm_l;  ///< OAM numbers of the comm states
  RMatrix pep;              ///< ordered pairs; diagonal is unused (zero)
  double union_sum = 0.0;
  double p_oam = 1.0;
  bool p_oam_clamped = false;
  double p_b = 0.0;
  double p_e = 0.0;
  bool comm_disabled = false;
  double bits_per_symbol = 0.0;
  double throughput = 0.0;  ///< analytic, bits/s
};

/// Gaussian tail probability.
double q_function(double x);

/// Pairwise OAM-state error probability for transmit state l_u received as
/// l_v, with sigma_s2 the received power of l_u. Throws for l_u == l_v.
double pep(int l_u, int l_v, double sigma_s2, const LinkParams& p);

/// 1 - sum of PEPs over ordered distinct comm-state pairs, clamped to [0, 1].
double oam_detect_prob(const LinkParams& p, bool* clamped = nullptr);

/// DPSK bit error probability averaged over Rayleigh fading.
double dpsk_ber_rayleigh(double gamma_bar_b);

/// Combines state detection and DPSK into the total error probability and
/// the analytic throughput (1 - P_e) * bits / T_sym.
LinkReport total_error_prob(const LinkParams& p);

/// Successful bits over elapsed time.
double throughput_empirical(double bits_delivered, double duration);

/// Link parameters for a scene at an SNR in dB, where SNR = sigma_s^2 / sigma_n^2
/// per state and the mean SNR per bit equals the same ratio. corr_phi
/// defaults to the azimuth of the strongest scatterer.
LinkParams link_params_for(const Scene& scene, double snr_db, double T_sym);

}  // namespace oamjrc
