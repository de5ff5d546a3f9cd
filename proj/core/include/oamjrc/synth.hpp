#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oamjrc/linalg.hpp"
#include "oamjrc/scenario.hpp"

namespace oamjrc {

enum class FrameKind : std::uint8_t { RadarOnly = 0, JrcMdm = 1, CoherentCpi = 2 };

/// Factor matrices of the Khatri-Rao signal model.
struct SteeringSet {
  CMatrix A_T;   ///< (2U+1) x Q, rows u = -U..U
  CMatrix A_Tr;  ///< (2 mu U + 1) x Q, radar rows u = -mu U..mu U
  CMatrix B;     ///< M x Q, range steering
  CMatrix A_R;   ///< N x Q, DoA steering
};

/// Data cube flattened as rows (s, m, n), n fastest, one column per snapshot.
struct SnapshotBlock {
  CMatrix data;
  int S = 0;
  int M = 0;
  int N = 0;
  FrameKind kind = FrameKind::RadarOnly;
  std::uint64_t seed = 0;
  double noise_power = 0.0;

  Index L() const { return data.cols(); }
  Index rows() const { return static_cast<Index>(S) * M * N; }
  Index row(int s, int m, int n) const { return (static_cast<Index>(s) * M + m) * N + n; }
};

struct SynthOptions {
  /// Use the element wavelength lambda_m in the curvature and DoA phases
  /// instead of lambda0. The cube is then no longer exactly Khatri-Rao.
  bool wideband = false;
};

/// DPSK symbol streams for the communication states of one JRC frame.
struct SymbolFrame {
  std::vector<int> comm_u;                      ///< comm state indices, ascending
  std::vector<std::vector<std::uint8_t>> bits;  ///< per comm state
  std::vector<std::vector<int>> symbols;        ///< per comm state, +1/-1 per slot
  int reference_slot = 0;

  int slots() const { return symbols.empty() ? 0 : static_cast<int>(symbols.front().size()); }
  /// Symbol carried by state u in the given slot; radar states carry 1.
  int symbol(int u, int slot) const;
};

/// Curvature-plus-helical phase of a scatterer on state l:
/// -pi (r^2 - r_ring^2) / (lambda0 R_l) - l phi.
double phase_phi(const Scatterer& t, int l, double ring_radius, double curvature,
                 double wavelength0);
double phase_phi(const Scatterer& t, int l, const Scene& scene);

SteeringSet steering_matrices(const Scene& scene);

/// A_Tr (.) B (.) A_R for the radar states.
CMatrix radar_manifold(const Scene& scene);
/// A_T (.) B (.) A_R for all 2U+1 states.
CMatrix full_manifold(const Scene& scene);

/// Exact radar-frame covariance A R_rho A^H + sigma_n^2 I.
CMatrix radar_covariance(const Scene& scene);

/// Radar-only frame (symbols all one). Scattering coefficients are drawn
/// i.i.d. per snapshot. Deterministic in (scene, L, seed).
SnapshotBlock radar_snapshots(const Scene& scene, Index L, std::uint64_t seed,
                              const SynthOptions& opts = {});

/// One slot of the multiplexed frame [x_rc1; x_r; x_rc2] over all 2U+1 states.
/// Noise for state u is drawn from a stream keyed on u, so radar rows match
/// radar_snapshots for the same seed.
SnapshotBlock jrc_snapshots(const Scene& scene, const SymbolFrame& frame, int slot, Index L,
                            std::uint64_t seed, const SynthOptions& opts = {});

/// Differential encoding: reference symbol +1, bit 1 flips the phase by pi.
std::vector<int> dpsk_encode(std::span<const std::uint8_t> bits);
/// Differential decoding of consecutive slots; empty or single input gives no bits.
std::vector<std::uint8_t> dpsk_decode(std::span<const cdouble> symbols);

SymbolFrame make_symbol_frame(const OamPlan& plan,
                              const std::vector<std::vector<std::uint8_t>>& bits);
SymbolFrame random_symbol_frame(const OamPlan& plan, int bits_per_state, std::uint64_t seed);

/// Instantaneous geometry of a scatterer moving along x at t seconds from
/// the reference epoch.
struct TargetKinematics {
  double r = 0.0;
  double phi = 0.0;
  double R = 0.0;
};

/// Propagates a scatterer under constant velocity nu along x:
/// dr^2/dt = 2 r nu cos(phi), dphi/dt = nu sin(phi) / r, and the receive
/// leg grows at nu sin(psi).
TargetKinematics propagate_target(const Scatterer& t, double z_ref, double time);

/// Coherent slow-time series for transmit element m and state l: an N x K
/// matrix, one row per receive element. Slot k is sampled at
/// (k - K/2) T_sym so the scene geometry is the CPI midpoint. Scattering
/// coefficients are fixed over the CPI.
CMatrix doppler_cpi(const Scene& scene, int m, int l, int K_slots, double T_sym,
                    std::uint64_t seed);

}  // namespace oamjrc
