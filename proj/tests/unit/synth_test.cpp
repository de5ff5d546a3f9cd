#include <cmath>
#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "oamjrc/block_io.hpp"
#include "oamjrc/errors.hpp"
#include "oamjrc/estimate.hpp"
#include "oamjrc/rng.hpp"
#include "oamjrc/synth.hpp"
#include "test_support.hpp"

using namespace oamjrc;
using oamjrc::testing::small_scene;

namespace {

Scene noiseless(Scene s) {
  s.noise_power = 0.0;
  return s;
}

double peak_frequency(const CMatrix& series, double T_sym) {
  const DopplerSpectrum spec = doppler_spectrum(series, T_sym, 8);
  Index i = 0;
  spec.power.maxCoeff(&i);
  return spec.freq(i);
}

// Closed-form Doppler shift of one scatterer on element m and state l.
double doppler_oracle(const Scene& s, const Scatterer& t, int m, int l) {
  const double lam = 3e8 / (s.array.f0 - m * s.array.delta_f);
  const double z = s.beam.z_ref;
  const double Rl = s.curvature(l);
  const double pi = 3.14159265358979323846;
  return -t.nu * (t.r * std::cos(t.phi) / (lam * std::sqrt(t.r * t.r + z * z)) + std::sin(t.psi) / lam +
                  t.r * std::cos(t.phi) / (lam * Rl) + l * std::sin(t.phi) / (2 * pi * t.r));
}

}  // namespace

TEST(Steering, UnitModulusAndVandermonde) {
  const SteeringSet st = steering_matrices(reference_scene());
  for (const CMatrix* m : {&st.A_T, &st.A_Tr, &st.B, &st.A_R})
    EXPECT_NEAR((m->cwiseAbs().array() - 1.0).abs().maxCoeff(), 0.0, 1e-14);
  for (const CMatrix* m : {&st.B, &st.A_R})
    for (Index q = 0; q < m->cols(); ++q) {
      EXPECT_NEAR(std::abs((*m)(0, q) - 1.0), 0.0, 1e-15);
      for (Index k = 2; k < m->rows(); ++k)
        EXPECT_NEAR(std::abs((*m)(k, q) - (*m)(k - 1, q) * (*m)(1, q)), 0.0, 1e-13);
    }
}

TEST(Steering, Shapes) {
  const Scene s = reference_scene(0.5);
  const SteeringSet st = steering_matrices(s);
  EXPECT_EQ(st.A_T.rows(), 21);
  EXPECT_EQ(st.A_Tr.rows(), 11);
  EXPECT_EQ(st.B.rows(), 6);
  EXPECT_EQ(st.A_R.rows(), 6);
  EXPECT_EQ(st.A_T.cols(), 3);
  EXPECT_EQ(full_manifold(s).rows(), 21 * 36);
  EXPECT_EQ(radar_manifold(s).rows(), 11 * 36);
}

TEST(Steering, TransmitRowsCarryTheStatePhase) {
  const Scene s = reference_scene();
  const SteeringSet st = steering_matrices(s);
  for (int u = -10; u <= 10; ++u)
    for (int q = 0; q < 3; ++q)
      EXPECT_NEAR(std::abs(st.A_T(u + 10, q) - phasor(phase_phi(s.targets[q], u, s))), 0.0, 1e-13);
  EXPECT_NEAR((st.A_Tr - st.A_T.middleRows(5, 11)).norm(), 0.0, 1e-15);
}

TEST(Steering, RangeAndDoaGoldens) {
  Scene s = reference_scene();
  s.targets = {{0.0, deg2rad(30.0), 10.0, 0.21, 1.0, 0.0}};
  const SteeringSet st = steering_matrices(s);
  EXPECT_NEAR(std::arg(st.B(1, 0)), 6.2831853071795862e-3, 1e-15);
  EXPECT_NEAR(std::arg(st.A_R(1, 0)), -kPi / 2, 1e-12);
}

TEST(PhasePhi, VanishesForZeroStateOnTheRing) {
  const Scene s = reference_scene();
  Scatterer t = s.targets[0];
  t.r = s.ring_radius();
  EXPECT_NEAR(phase_phi(t, 0, s), 0.0, 1e-15);
}

TEST(Manifold, KhatriRaoOfFactors) {
  const Scene s = reference_scene();
  const SteeringSet st = steering_matrices(s);
  const CMatrix A = khatri_rao(khatri_rao(st.A_Tr, st.B), st.A_R);
  EXPECT_NEAR((radar_manifold(s) - A).norm(), 0.0, 1e-12);
}

TEST(Manifold, MatchesIndependentPhaseModel) {
  const Scene s = reference_scene();
  const CMatrix A = radar_manifold(s);
  for (int q = 0; q < s.Q(); ++q) {
    const auto a = oamjrc::testing::steering_ld(s, s.targets[q]);
    ASSERT_EQ(static_cast<Index>(a.size()), A.rows());
    for (Index i = 0; i < A.rows(); ++i) {
      EXPECT_NEAR(A(i, q).real(), static_cast<double>(a[i].real()), 1e-12);
      EXPECT_NEAR(A(i, q).imag(), static_cast<double>(a[i].imag()), 1e-12);
    }
  }
}

TEST(RadarSnapshots, SingleNoiselessTargetIsOneColumn) {
  Scene s = noiseless(reference_scene());
  s.targets.resize(1);
  const SnapshotBlock b = radar_snapshots(s, 5, 11);
  const CVector a = radar_manifold(s).col(0);
  for (Index t = 0; t < b.L(); ++t) {
    const cdouble rho = b.data(0, t) / a(0);
    EXPECT_NEAR((b.data.col(t) - rho * a).norm(), 0.0, 1e-12 * b.data.col(t).norm());
  }
}

TEST(RadarSnapshots, SampleCovarianceConvergesToModel) {
  const Scene s = small_scene();
  const SnapshotBlock b = radar_snapshots(s, 100000, 2024);
  const CMatrix R = radar_covariance(s);
  EXPECT_LT(oamjrc::testing::rel_err(sample_covariance(b.data), R), 0.02);
}

TEST(RadarSnapshots, DeterministicPerSeed) {
  const Scene s = reference_scene();
  const SnapshotBlock a = radar_snapshots(s, 20, 99), b = radar_snapshots(s, 20, 99), c = radar_snapshots(s, 20, 100);
  ASSERT_EQ(a.data.size(), b.data.size());
  EXPECT_EQ(std::memcmp(a.data.data(), b.data.data(), sizeof(cdouble) * a.data.size()), 0);
  EXPECT_GT((a.data - c.data).norm(), 0.0);
}

TEST(RadarSnapshots, Metadata) {
  const Scene s = reference_scene(0.3);
  const SnapshotBlock b = radar_snapshots(s, 4, 5);
  EXPECT_EQ(b.S, 7);
  EXPECT_EQ(b.rows(), 7 * 36);
  EXPECT_EQ(b.kind, FrameKind::RadarOnly);
  EXPECT_EQ(b.seed, 5u);
  EXPECT_EQ(b.noise_power, s.noise_power);
  EXPECT_THROW(radar_snapshots(s, 0, 1), std::invalid_argument);
}

TEST(JrcSnapshots, AllOnesEqualsRadarLaw) {
  const Scene s = reference_scene(0.5);
  std::vector<std::vector<std::uint8_t>> bits(10, std::vector<std::uint8_t>(4, 0));
  const SymbolFrame f = make_symbol_frame(s.oam, bits);
  const SnapshotBlock j = jrc_snapshots(s, f, 2, 30, 77);
  const SnapshotBlock r = radar_snapshots(s, 30, 77);
  EXPECT_EQ(j.rows(), 21 * 36);
  const ProcessingContext ctx = ProcessingContext::from_scene(s);
  EXPECT_NEAR((radar_rows(j.data, ctx) - r.data).norm(), 0.0, 1e-12 * r.data.norm());
  // Comm rows follow the full manifold with the same coefficients.
  const Scene quiet = noiseless(s);
  const SnapshotBlock jq = jrc_snapshots(quiet, f, 0, 3, 5);
  const CMatrix coeffs = left_solve(full_manifold(quiet), jq.data).x;
  EXPECT_NEAR((full_manifold(quiet) * coeffs - jq.data).norm(), 0.0, 1e-10 * jq.data.norm());
}

TEST(JrcSnapshots, NegativeSymbolNegatesItsRows) {
  Scene s = noiseless(reference_scene(0.5));
  s.targets.resize(1);
  std::vector<std::vector<std::uint8_t>> zeros(10, std::vector<std::uint8_t>(1, 0));
  auto flip = zeros;
  flip[3][0] = 1;  // state u = -7 turns to -1 in slot 1
  const SnapshotBlock a = jrc_snapshots(s, make_symbol_frame(s.oam, zeros), 1, 4, 9);
  const SnapshotBlock b = jrc_snapshots(s, make_symbol_frame(s.oam, flip), 1, 4, 9);
  const int s_idx = -7 + 10;
  for (int si = 0; si < 21; ++si) {
    const double sign = si == s_idx ? -1.0 : 1.0;
    EXPECT_NEAR((b.data.middleRows(si * 36, 36) - sign * a.data.middleRows(si * 36, 36)).norm(), 0.0, 1e-13);
  }
}

TEST(JrcSnapshots, RejectsMismatchedFrame) {
  const Scene s = reference_scene(0.5);
  const SymbolFrame f = random_symbol_frame(OamPlan(10, 1, 0.3), 2, 1);
  EXPECT_THROW(jrc_snapshots(s, f, 0, 2, 1), std::invalid_argument);
  const SymbolFrame g = random_symbol_frame(s.oam, 2, 1);
  EXPECT_THROW(jrc_snapshots(s, g, 3, 2, 1), std::invalid_argument);
}

TEST(SymbolFrame, RadarStatesCarryOne) {
  const OamPlan p(10, 1, 0.5);
  const SymbolFrame f = random_symbol_frame(p, 6, 3);
  EXPECT_EQ(f.slots(), 7);
  for (int u = -5; u <= 5; ++u)
    for (int k = 0; k < f.slots(); ++k) EXPECT_EQ(f.symbol(u, k), 1);
  for (int u : p.comm_states())
    for (int k = 0; k < f.slots(); ++k) EXPECT_EQ(std::abs(f.symbol(u, k)), 1);
}

TEST(Dpsk, Examples) {
  const std::vector<std::uint8_t> zeros{0, 0, 0};
  EXPECT_EQ(dpsk_encode(zeros), (std::vector<int>{1, 1, 1, 1}));
  const std::vector<std::uint8_t> one{1};
  EXPECT_EQ(dpsk_encode(one), (std::vector<int>{1, -1}));
  EXPECT_TRUE(dpsk_encode(std::vector<std::uint8_t>{}).empty());
  EXPECT_TRUE(dpsk_decode(std::vector<cdouble>{}).empty());
}

TEST(Dpsk, CommonPhaseDoesNotChangeBits) {
  Rng rng(4);
  std::vector<std::uint8_t> bits(64);
  for (auto& b : bits) b = rng.bit();
  const auto sym = dpsk_encode(bits);
  for (double theta : {0.0, 0.7, 2.5, -1.9}) {
    std::vector<cdouble> rx;
    for (int s : sym) rx.push_back(static_cast<double>(s) * phasor(theta));
    EXPECT_EQ(dpsk_decode(rx), bits);
  }
}

TEST(Kinematics, ZeroTimeIsIdentity) {
  const Scatterer t = reference_scene().targets[1];
  const auto k = propagate_target(t, 1.9, 0.0);
  EXPECT_NEAR(k.r, t.r, 1e-15);
  EXPECT_NEAR(k.phi, t.phi, 1e-15);
  EXPECT_NEAR(k.R, t.R, 1e-13);
}

TEST(Kinematics, RatesMatchDopplerModel) {
  const Scatterer t = reference_scene().targets[1];
  const double h = 1e-7;
  const auto a = propagate_target(t, 1.9, -h), b = propagate_target(t, 1.9, h);
  EXPECT_NEAR((b.r * b.r - a.r * a.r) / (2 * h), 2 * t.r * t.nu * std::cos(t.phi), 1e-6);
  EXPECT_NEAR((b.phi - a.phi) / (2 * h), t.nu * std::sin(t.phi) / t.r, 1e-5);
  EXPECT_NEAR((b.R - a.R) / (2 * h), t.r * t.nu * std::cos(t.phi) / std::hypot(t.r, 1.9) + t.nu * std::sin(t.psi),
              1e-6);
}

TEST(DopplerCpi, StaticSceneHasNoShift) {
  Scene s = noiseless(reference_scene());
  for (auto& t : s.targets) t.nu = 0.0;
  const CMatrix x = doppler_cpi(s, 0, -5, 512, 5e-6, 1);
  EXPECT_NEAR(peak_frequency(x, 5e-6), 0.0, 1e-9);
}

TEST(DopplerCpi, PeakMatchesClosedForm) {
  Scene s = noiseless(reference_scene());
  s.targets.resize(1);  // nu = 10 m/s
  const int K = 1024;
  const double T = 5e-6, bin = 1.0 / (K * T);
  for (int l : {0, -5, 3}) {
    const double f = peak_frequency(doppler_cpi(s, 0, l, K, T, 3), T);
    EXPECT_NEAR(f, doppler_oracle(s, s.targets[0], 0, l), bin) << "l=" << l;
  }
  // l = 0 leaves only the linear terms
  Scatterer t = s.targets[0];
  const double lam = 3e8 / s.array.f0;
  const double linear = -t.nu * (t.r * std::cos(t.phi) / (lam * std::hypot(t.r, 1.9)) + std::sin(t.psi) / lam +
                                 t.r * std::cos(t.phi) / (lam * s.curvature(0)));
  EXPECT_DOUBLE_EQ(doppler_oracle(s, t, 0, 0), linear);
}

TEST(DopplerCpi, ArgumentChecks) {
  const Scene s = reference_scene();
  EXPECT_THROW(doppler_cpi(s, 0, 0, 1, 5e-6, 1), std::invalid_argument);
  EXPECT_THROW(doppler_cpi(s, 6, 0, 16, 5e-6, 1), std::invalid_argument);
  EXPECT_THROW(doppler_cpi(s, 0, 0, 16, 0.0, 1), std::invalid_argument);
}

TEST(BlockIo, RoundTrip) {
  const SnapshotBlock b = radar_snapshots(reference_scene(), 7, 42);
  std::stringstream ss;
  write_block(ss, b);
  const SnapshotBlock c = read_block(ss);
  EXPECT_EQ(c.S, b.S);
  EXPECT_EQ(c.M, b.M);
  EXPECT_EQ(c.N, b.N);
  EXPECT_EQ(c.L(), b.L());
  EXPECT_EQ(c.kind, b.kind);
  EXPECT_EQ(c.seed, b.seed);
  EXPECT_EQ(c.noise_power, b.noise_power);
  EXPECT_EQ(std::memcmp(c.data.data(), b.data.data(), sizeof(cdouble) * b.data.size()), 0);
}

TEST(BlockIo, HeaderLayout) {
  SnapshotBlock b;
  b.S = 1;
  b.M = 1;
  b.N = 2;
  b.kind = FrameKind::CoherentCpi;
  b.seed = 0x0102030405060708ull;
  b.noise_power = 0.5;
  b.data = CMatrix(2, 1);
  b.data << cdouble(1.0, -2.0), cdouble(3.0, 4.0);
  std::stringstream ss;
  write_block(ss, b);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 4 * 5 + 1 + 8 + 8 + 2 * 16);
  EXPECT_EQ(bytes.substr(0, 4), "OAMJ");
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(bytes[off + k]);
    return v;
  };
  EXPECT_EQ(u32(4), kBlockFormatVersion);
  EXPECT_EQ(u32(8), 1u);
  EXPECT_EQ(u32(12), 1u);
  EXPECT_EQ(u32(16), 2u);
  EXPECT_EQ(u32(20), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[33]), 0x08);  // seed, least significant byte first
  double re = 0;
  std::memcpy(&re, bytes.data() + 41, 8);
  EXPECT_EQ(re, 1.0);
}

TEST(BlockIo, CorruptInputIsIoError) {
  std::stringstream bad("XXXX0000");
  EXPECT_THROW(read_block(bad), IoError);
  const SnapshotBlock b = radar_snapshots(reference_scene(), 2, 1);
  std::stringstream ss;
  write_block(ss, b);
  std::stringstream cut(ss.str().substr(0, ss.str().size() - 5));
  EXPECT_THROW(read_block(cut), IoError);
  EXPECT_THROW(read_block(std::filesystem::path("/nonexistent/block.bin")), IoError);
}
