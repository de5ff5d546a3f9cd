#pragma once

#include <array>
#include <string>
#include <vector>

#include "oamjrc/linalg.hpp"
#include "oamjrc/scenario.hpp"

namespace oamjrc {

/// Parameter blocks of the position FIM, in order.
enum class FimParam { Phi = 0, R_radial = 1, Range = 2, Psi = 3 };
inline constexpr std::array<const char*, 4> kFimParamNames = {"phi", "r", "R", "psi"};

/// Radar-manifold columns and their derivatives with respect to each
/// target's own parameter (D x Q each).
struct SteeringDerivatives {
  CMatrix A;
  std::array<CMatrix, 4> dA;
};

SteeringDerivatives steering_derivatives(const Scene& scene);

/// Explicit derivative of vec(R_r) with respect to one parameter block:
/// column q is sigma_q^2 (conj(a_q) kron da_q + conj(da_q) kron a_q). D^2 x Q.
CMatrix derivative_block(const Scene& scene, FimParam p);

/// Derivative of vec(R_r) with respect to the velocities: the radial block
/// times diag(t cos phi).
CMatrix velocity_derivative_block(const Scene& scene, double t_eval);

struct PositionFim {
  RMatrix fim;            ///< 4Q x 4Q, blocks (phi, r, R, psi)
  RVector crlb;           ///< variances; +inf when singular
  double snapshots = 0;
  double condition = 0;   ///< of the diagonally normalized FIM
  double min_eig = 0;     ///< smallest eigenvalue of the raw FIM
  double max_eig = 0;
  double asymmetry = 0;   ///< ||F - F^T|| / ||F||
  double imag_residue = 0;
  bool singular = false;
};

/// Slepian-Bangs FIM of the radar covariance for L_r snapshots. Requires
/// noise_power > 0. CRLBs become +inf when the normalized condition number
/// exceeds 1e12.
PositionFim position_fim(const Scene& scene, double L_r);

/// sqrt of the CRLB variances, same ordering as the FIM.
RVector position_rcrlb(const PositionFim& fim);

struct VelocityFim {
  RMatrix fim;  ///< Q x Q
  RVector crlb;
  double t_eval = 0;
  std::vector<bool> unidentifiable;  ///< cos(phi_q) = 0
};

VelocityFim velocity_fim(const Scene& scene, double L_r, double t_eval);
VelocityFim velocity_fim(const PositionFim& pos, const Scene& scene, double t_eval);

/// CPI midpoint K T_sym / 2.
inline double default_t_eval(int K_slots, double T_sym) { return 0.5 * K_slots * T_sym; }

struct CrlbRow {
  double snr_db = 0;
  std::string param;
  int target = 0;
  double rcrlb = 0;
};

/// RCRLB per parameter and target over an SNR grid (angles in radians),
/// including velocity rows named "nu".
std::vector<CrlbRow> crlb_sweep(const Scene& scene, const std::vector<double>& snr_db, double L_r,
                                double t_eval);

}  // namespace oamjrc
