#include "oamjrc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oamjrc/constants.hpp"
#include "oamjrc/rng.hpp"

namespace oamjrc {

namespace {

constexpr std::uint64_t kRhoStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kStateOffset = 1u << 20;

// One steering entry, optionally with the element wavelength lambda_m.
cdouble steering_entry(const Scene& s, const Scatterer& t, int l, int m, int n, double ring,
                       double curv, bool wideband) {
  const double lam = wideband ? s.array.wavelength(m) : s.array.wavelength0();
  const double range = kTwoPi * m * s.array.delta_f * t.R / kSpeedOfLight;
  const double curvature = -kPi * (t.r * t.r - ring * ring) / (lam * curv);
  const double doa = -kTwoPi * s.array.d * std::sin(t.psi) * n / lam;
  return phasor(range + curvature - l * t.phi + doa);
}

// Rows of the (states x M x N) manifold with optional wideband phases.
CMatrix manifold_for_states(const Scene& s, const std::vector<int>& states, bool wideband) {
  const int M = s.array.M;
  const int N = s.array.N;
  const int Q = s.Q();
  const double ring = s.ring_radius();
  CMatrix out(static_cast<Index>(states.size()) * M * N, Q);
  for (std::size_t si = 0; si < states.size(); ++si) {
    const int l = s.oam.l(states[si]);
    const double curv = s.curvature(l);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        const Index row = (static_cast<Index>(si) * M + m) * N + n;
        for (int q = 0; q < Q; ++q)
          out(row, q) = steering_entry(s, s.targets[q], l, m, n, ring, curv, wideband);
      }
  }
  return out;
}

std::vector<int> all_states(const OamPlan& plan) {
  std::vector<int> out;
  for (int u = -plan.U(); u <= plan.U(); ++u) out.push_back(u);
  return out;
}

CMatrix draw_rho(const Scene& s, Index L, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kRhoStream));
  CMatrix rho(s.Q(), L);
  for (Index t = 0; t < L; ++t)
    for (int q = 0; q < s.Q(); ++q) rho(q, t) = rng.complex_gaussian(s.targets[q].sigma2);
  return rho;
}

// Adds CN(0, sigma_n^2) noise to the M*N rows of each state from a stream
// keyed on the state index u.
void add_state_noise(CMatrix& data, const std::vector<int>& states, int MN, double power,
                     std::uint64_t seed) {
  if (power <= 0.0) return;
  for (std::size_t si = 0; si < states.size(); ++si) {
    Rng rng(derive_seed(seed, kNoiseStream, static_cast<std::uint64_t>(states[si] + kStateOffset)));
    auto block = data.middleRows(static_cast<Index>(si) * MN, MN);
    for (Index t = 0; t < block.cols(); ++t)
      for (Index r = 0; r < block.rows(); ++r) block(r, t) += rng.complex_gaussian(power);
  }
}

}  // namespace

int SymbolFrame::symbol(int u, int slot) const {
  const auto it = std::find(comm_u.begin(), comm_u.end(), u);
  if (it == comm_u.end()) return 1;
  return symbols[static_cast<std::size_t>(it - comm_u.begin())].at(static_cast<std::size_t>(slot));
}

double phase_phi(const Scatterer& t, int l, double ring_radius, double curvature,
                 double wavelength0) {
  return -kPi * (t.r * t.r - ring_radius * ring_radius) / (wavelength0 * curvature) - l * t.phi;
}

double phase_phi(const Scatterer& t, int l, const Scene& scene) {
  return phase_phi(t, l, scene.ring_radius(), scene.curvature(l), scene.array.wavelength0());
}

SteeringSet steering_matrices(const Scene& s) {
  const int Q = s.Q();
  const int U = s.oam.U();
  const double ring = s.ring_radius();
  const double lam0 = s.array.wavelength0();

  SteeringSet st;
  st.A_T.resize(s.oam.state_count(), Q);
  for (int u = -U; u <= U; ++u) {
    const int l = s.oam.l(u);
    const double curv = s.curvature(l);
    for (int q = 0; q < Q; ++q)
      st.A_T(u + U, q) = phasor(phase_phi(s.targets[q], l, ring, curv, lam0));
  }
  const int h = s.oam.radar_half();
  st.A_Tr = st.A_T.middleRows(U - h, 2 * h + 1);

  st.B.resize(s.array.M, Q);
  st.A_R.resize(s.array.N, Q);
  for (int q = 0; q < Q; ++q) {
    const auto& t = s.targets[q];
    for (int m = 0; m < s.array.M; ++m)
      st.B(m, q) = phasor(kTwoPi * m * s.array.delta_f * t.R / kSpeedOfLight);
    for (int n = 0; n < s.array.N; ++n)
      st.A_R(n, q) = phasor(-kTwoPi * s.array.d * std::sin(t.psi) * n * s.array.f0 / kSpeedOfLight);
  }
  return st;
}

CMatrix radar_manifold(const Scene& s) {
  const SteeringSet st = steering_matrices(s);
  return khatri_rao(khatri_rao(st.A_Tr, st.B), st.A_R);
}

CMatrix full_manifold(const Scene& s) {
  const SteeringSet st = steering_matrices(s);
  return khatri_rao(khatri_rao(st.A_T, st.B), st.A_R);
}

CMatrix radar_covariance(const Scene& s) {
  const CMatrix A = radar_manifold(s);
  RVector p(s.Q());
  for (int q = 0; q < s.Q(); ++q) p(q) = s.targets[q].sigma2;
  CMatrix R = A * p.asDiagonal() * A.adjoint();
  R.diagonal().array() += s.noise_power;
  return R;
}

SnapshotBlock radar_snapshots(const Scene& s, Index L, std::uint64_t seed,
                              const SynthOptions& opts) {
  if (L < 1) throw std::invalid_argument("radar_snapshots: L must be >= 1");
  const std::vector<int> states = s.oam.radar_states();
  const CMatrix A = opts.wideband ? manifold_for_states(s, states, true) : radar_manifold(s);

  SnapshotBlock b;
  b.S = s.oam.radar_state_count();
  b.M = s.array.M;
  b.N = s.array.N;
  b.kind = FrameKind::RadarOnly;
  b.seed = seed;
  b.noise_power = s.noise_power;
  b.data = A * draw_rho(s, L, seed);
  add_state_noise(b.data, states, b.M * b.N, s.noise_power, seed);
  return b;
}

SnapshotBlock jrc_snapshots(const Scene& s, const SymbolFrame& frame, int slot, Index L,
                            std::uint64_t seed, const SynthOptions& opts) {
  if (L < 1) throw std::invalid_argument("jrc_snapshots: L must be >= 1");
  if (frame.comm_u != s.oam.comm_states())
    throw std::invalid_argument("jrc_snapshots: symbol frame does not match the comm states");
  if (slot < 0 || slot >= frame.slots())
    throw std::invalid_argument("jrc_snapshots: slot out of range");

  const std::vector<int> states = all_states(s.oam);
  CMatrix A = opts.wideband ? manifold_for_states(s, states, true) : full_manifold(s);
  const int MN = s.array.M * s.array.N;
  for (std::size_t si = 0; si < states.size(); ++si)
    if (frame.symbol(states[si], slot) < 0) A.middleRows(static_cast<Index>(si) * MN, MN) *= -1.0;

  SnapshotBlock b;
  b.S = s.oam.state_count();
  b.M = s.array.M;
  b.N = s.array.N;
  b.kind = FrameKind::JrcMdm;
  b.seed = seed;
  b.noise_power = s.noise_power;
  b.data = A * draw_rho(s, L, seed);
  add_state_noise(b.data, states, MN, s.noise_power, seed);
  return b;
}

std::vector<int> dpsk_encode(std::span<const std::uint8_t> bits) {
  std::vector<int> out;
  if (bits.empty()) return out;
  out.reserve(bits.size() + 1);
  out.push_back(1);
  for (std::uint8_t b : bits) out.push_back(b ? -out.back() : out.back());
  return out;
}

std::vector<std::uint8_t> dpsk_decode(std::span<const cdouble> symbols) {
  std::vector<std::uint8_t> out;
  for (std::size_t k = 1; k < symbols.size(); ++k)
    out.push_back(std::real(symbols[k] * std::conj(symbols[k - 1])) < 0.0 ? 1 : 0);
  return out;
}

SymbolFrame make_symbol_frame(const OamPlan& plan,
                              const std::vector<std::vector<std::uint8_t>>& bits) {
  SymbolFrame f;
  f.comm_u = plan.comm_states();
  if (bits.size() != f.comm_u.size())
    throw std::invalid_argument("make_symbol_frame: one bit stream per comm state required");
  for (std::size_t i = 1; i < bits.size(); ++i)
    if (bits[i].size() != bits[0].size())
      throw std::invalid_argument("make_symbol_frame: bit streams differ in length");
  f.bits = bits;
  for (const auto& b : bits) f.symbols.push_back(dpsk_encode(b));
  return f;
}

SymbolFrame random_symbol_frame(const OamPlan& plan, int bits_per_state, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::uint8_t>> bits(static_cast<std::size_t>(plan.comm_state_count()));
  for (auto& b : bits)
    for (int k = 0; k < bits_per_state; ++k) b.push_back(rng.bit() ? 1 : 0);
  return make_symbol_frame(plan, bits);
}

TargetKinematics propagate_target(const Scatterer& t, double z_ref, double time) {
  const double x0 = t.r * std::cos(t.phi);
  const double y0 = t.r * std::sin(t.phi);
  const double x = x0 + t.nu * time;

  TargetKinematics k;
  k.r = std::hypot(x, y0);
  // The rotation sense is mirrored relative to the geometric azimuth so that
  // dphi/dt = +nu sin(phi) / r, the convention of the rotational Doppler term.
  k.phi = 2.0 * t.phi - std::atan2(y0, x);
  const double leg1_0 = std::hypot(t.r, z_ref);
  const double leg2 = t.R - leg1_0 + t.nu * std::sin(t.psi) * time;
  k.R = std::hypot(k.r, z_ref) + leg2;
  return k;
}

CMatrix doppler_cpi(const Scene& s, int m, int l, int K_slots, double T_sym, std::uint64_t seed) {
  if (K_slots < 2) throw std::invalid_argument("doppler_cpi: K_slots must be >= 2");
  if (!(T_sym > 0.0)) throw std::invalid_argument("doppler_cpi: T_sym must be positive");
  if (m < 0 || m >= s.array.M) throw std::invalid_argument("doppler_cpi: m out of range");

  const int N = s.array.N;
  const double fm = s.array.f0 - m * s.array.delta_f;
  const double lam = kSpeedOfLight / fm;
  const double ring = s.ring_radius();
  const double curv = s.curvature(l);

  Rng rng(derive_seed(seed, kRhoStream, static_cast<std::uint64_t>(m),
                      static_cast<std::uint64_t>(l + static_cast<int>(kStateOffset))));
  std::vector<cdouble> rho;
  for (const auto& t : s.targets) rho.push_back(std::sqrt(t.sigma2) * phasor(rng.uniform(-kPi, kPi)));

  CMatrix out = CMatrix::Zero(N, K_slots);
  for (int k = 0; k < K_slots; ++k) {
    const double time = (k - K_slots / 2) * T_sym;
    for (int q = 0; q < s.Q(); ++q) {
      const auto& t = s.targets[q];
      const TargetKinematics kin = propagate_target(t, s.beam.z_ref, time);
      const double base = -kTwoPi * fm * kin.R / kSpeedOfLight -
                          kPi * (kin.r * kin.r - ring * ring) / (lam * curv) - l * kin.phi;
      const double doa_step = -kTwoPi * s.array.d * std::sin(t.psi) / lam;
      for (int n = 0; n < N; ++n) out(n, k) += rho[q] * phasor(base + doa_step * n);
    }
  }
  if (s.noise_power > 0.0) {
    Rng noise(derive_seed(seed, kNoiseStream, static_cast<std::uint64_t>(m),
                          static_cast<std::uint64_t>(l + static_cast<int>(kStateOffset))));
    for (int k = 0; k < K_slots; ++k)
      for (int n = 0; n < N; ++n) out(n, k) += noise.complex_gaussian(s.noise_power);
  }
  return out;
}

}  // namespace oamjrc
