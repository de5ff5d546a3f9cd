#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "oamjrc/linalg.hpp"
#include "oamjrc/scenario.hpp"
#include "oamjrc/synth.hpp"

namespace oamjrc {

/// Everything the receiver is allowed to know: array, beam and OAM plan
/// plus the model order. Target parameters are never read.
struct ProcessingContext {
  ArrayConfig array;
  BeamConfig beam;
  OamPlan oam;
  int Q = 0;

  static ProcessingContext from_scene(const Scene& scene);

  double ring_radius() const;
  double curvature(int l) const;
};

struct SubspaceDecomp {
  CMatrix Us;              ///< orthonormal D x Q basis of the dominant eigenspace
  RVector eigvals;         ///< Q leading eigenvalues, descending
  double noise_floor = 0;  ///< mean of the trailing eigenvalues
  double gap_ratio = 0;    ///< lambda_Q / lambda_{Q+1}
  bool gap_warning = false;
  double residual = 0;     ///< max ||C u - lambda u|| / ||C||, covariance route only
};

inline constexpr double kDefaultGapThreshold = 1.5;

/// (1/L) X X^H, symmetrized.
CMatrix sample_covariance(const CMatrix& snapshots);

/// Dominant Q-dimensional eigenspace of a Hermitian covariance.
SubspaceDecomp signal_subspace(const CMatrix& cov, int Q,
                               double gap_threshold = kDefaultGapThreshold);

/// Same eigenspace computed from the snapshot matrix directly. Uses the
/// L x L Gram matrix when L is smaller than the row count.
SubspaceDecomp signal_subspace_from_snapshots(const CMatrix& snapshots, int Q,
                                              double gap_threshold = kDefaultGapThreshold);

struct EspritResult {
  RVector R;          ///< bistatic ranges (m)
  RVector psi;        ///< DoA (rad)
  CVector Psi;        ///< range rotation eigenvalues
  CVector Omega;      ///< DoA rotation diagonal
  CMatrix V;          ///< eigenvectors of U_B1^+ U_B2, equal to T^-1 up to scaling
  CMatrix T;          ///< V^-1
  double offdiag_ratio = 0;  ///< ||offdiag(Omega)|| / ||diag(Omega)||
  std::vector<std::string> warnings;
};

/// Joint range/DoA ESPRIT on a subspace with rows ordered (s, m, n).
/// Throws EstimationError when the selection matrices are rank deficient.
EspritResult esprit_range_doa(const CMatrix& Us, int S, int M, int N,
                              const ProcessingContext& ctx);

struct DecoupleResult {
  RVector r;
  RVector phi;
  std::vector<bool> r_flag;  ///< radicand negative (clamped) or r unidentifiable
  bool r_identifiable = true;
};

/// Radial distance and azimuth from the +/- l state pairs of the radar subspace.
DecoupleResult decouple_r_phi(const CMatrix& Us_radar, const EspritResult& esprit,
                              const ProcessingContext& ctx);

struct TargetEstimate {
  double R = 0.0;
  double psi = 0.0;
  double r = 0.0;
  double phi = 0.0;
  double nu = std::numeric_limits<double>::quiet_NaN();
  double Omega = std::numeric_limits<double>::quiet_NaN();
  bool r_flag = false;
  bool nu_unresolved = true;
};

struct SymbolEstimate {
  std::vector<int> comm_u;
  std::vector<std::vector<cdouble>> soft;   ///< per comm state, per slot
  std::vector<std::vector<int>> hard;       ///< sliced +/-1
  std::vector<std::vector<std::uint8_t>> bits;
  std::vector<bool> erased;
};

struct EstimateSet {
  std::vector<TargetEstimate> targets;
  CMatrix T;
  SymbolEstimate symbols;
  std::vector<std::string> warnings;
};

/// Position estimates from a radar-row subspace (S = 2 mu U + 1 states).
EstimateSet estimate_positions(const CMatrix& Us_radar, const ProcessingContext& ctx);
EstimateSet estimate_positions_from_covariance(const CMatrix& cov, const ProcessingContext& ctx);
EstimateSet estimate_positions_from_block(const SnapshotBlock& block, const ProcessingContext& ctx);

/// Radar-state rows of a full (2U+1)-state cube.
CMatrix radar_rows(const CMatrix& full, const ProcessingContext& ctx);

/// Model manifold over all 2U+1 states rebuilt from position estimates.
CMatrix manifold_from_estimates(const std::vector<TargetEstimate>& est, const ProcessingContext& ctx);

/// Per-state soft symbols a_u from one slot's full-frame subspace.
/// Returns one value per comm state; NaN marks an erasure.
std::vector<cdouble> recover_slot_symbols(const CMatrix& Us_full,
                                          const std::vector<TargetEstimate>& est,
                                          const ProcessingContext& ctx);

/// Full JRC receiver over a sequence of slots: positions from the pooled
/// radar rows, symbols per slot, then DPSK decoding across slots.
EstimateSet process_jrc(const std::vector<SnapshotBlock>& slots, const ProcessingContext& ctx);

// ---- velocity ----

struct CpiChannel {
  int m = 0;
  int l = 0;
  CMatrix series;  ///< N x K slow-time samples
};

struct DopplerPeak {
  double freq = 0.0;
  double power = 0.0;
  int target = -1;
};

struct ChannelSpectrum {
  int m = 0;
  int l = 0;
  double bin_hz = 0.0;
  std::vector<DopplerPeak> peaks;
};

struct VelocityResult {
  std::vector<double> nu;
  std::vector<double> Omega;
  std::vector<bool> unresolved;
  std::vector<ChannelSpectrum> channels;
};

/// Bracketed term of the Doppler model: f_D = -nu * coefficient.
double doppler_coefficient(double r, double phi, double psi, int l, double wavelength,
                           double curvature, double z_ref);

/// Hann-windowed zero-padded power spectrum summed over receive elements,
/// frequencies ascending from -fs/2. Returns (freq, power) pairs.
struct DopplerSpectrum {
  RVector freq;
  RVector power;
};
DopplerSpectrum doppler_spectrum(const CMatrix& series, double T_sym, int pad_factor = 4);

/// Up to `count` strongest local maxima, refined by 3-point quadratic
/// interpolation on log power.
std::vector<DopplerPeak> find_peaks(const DopplerSpectrum& spec, int count);

VelocityResult estimate_velocity(const std::vector<CpiChannel>& channels,
                                 const std::vector<TargetEstimate>& positions,
                                 const ProcessingContext& ctx, double T_sym, int pad_factor = 4);

}  // namespace oamjrc
