#include <cmath>

#include <gtest/gtest.h>

#include "oamjrc/constants.hpp"
#include "oamjrc/linktheory.hpp"
#include "oamjrc/scenario.hpp"

using namespace oamjrc;

namespace {

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Gaussian tail by quadrature of the density on [x, x + 40].
double q_quadrature(double x) {
  return simpson([](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2 * kPi); }, x, x + 40.0, 200000);
}

// Average of 0.5 exp(-g) against the exponential density of mean gbar,
// integrated over g out to 50 decay lengths of the product.
double dpsk_quadrature(double gbar) {
  const double decay = gbar / (1.0 + gbar);
  auto f = [gbar](double g) { return 0.5 * std::exp(-g) * std::exp(-g / gbar) / gbar; };
  return simpson(f, 0.0, 50.0 * decay, 200000);
}

LinkParams link(double mu, double snr_db, double phi_deg) {
  LinkParams p;
  p.mu = mu;
  p.U = 10;
  const double snr = std::pow(10.0, snr_db / 10.0);
  p.sigma_n2 = 1.0 / snr;
  p.gamma_bar_b = snr;
  p.corr_phi = deg2rad(phi_deg);
  return p;
}

}  // namespace

TEST(QFunction, Symmetry) {
  EXPECT_NEAR(q_function(0.0), 0.5, 1e-12);
  for (double x : {0.1, 0.7, 1.5, 3.0, 6.0}) EXPECT_NEAR(q_function(-x), 1.0 - q_function(x), 1e-15);
}

TEST(QFunction, MatchesQuadrature) {
  EXPECT_NEAR(q_function(1.6449), 0.05, 1e-4);
  for (double x = -8.0; x <= 8.0; x += 0.5) EXPECT_NEAR(q_function(x), x >= 0 ? q_quadrature(x) : 1.0 - q_quadrature(-x), 1e-12);
}

TEST(Pep, ZeroSeparationIsCoinFlip) {
  LinkParams p = link(0.5, 10.0, 0.0);
  EXPECT_NEAR(pep(6, 7, 1.0, p), 0.5, 1e-15);
  p.corr_phi = kPi;  // (l_u - l_v) phi = 2 pi
  EXPECT_NEAR(pep(6, 8, 1.0, p), 0.5, 1e-12);
}

TEST(Pep, AntiCorrelatedStates) {
  LinkParams p = link(0.5, 3.0, 180.0);
  const double expect = q_function(std::sqrt(2 * (1 - 0.5) * 10 * 1.0 / p.sigma_n2));
  EXPECT_NEAR(pep(6, 7, 1.0, p), expect, 1e-15);
}

TEST(Pep, VanishesWithoutNoise) {
  LinkParams p = link(0.5, 10.0, 20.0);
  p.sigma_n2 = 1e-12;
  EXPECT_LT(pep(6, 7, 1.0, p), 1e-100);
}

TEST(Pep, DependsOnlyOnSeparationTimesAzimuth) {
  const LinkParams p = link(0.5, 5.0, 17.0);
  EXPECT_DOUBLE_EQ(pep(6, 8, 1.0, p), pep(-10, -8, 1.0, p));
  LinkParams q = p;
  q.corr_phi = p.corr_phi * 2;
  EXPECT_NEAR(pep(6, 8, 1.0, p), pep(6, 7, 1.0, q), 1e-15);
  EXPECT_THROW(pep(3, 3, 1.0, p), std::invalid_argument);
}

TEST(OamDetect, SingleCommStateIsCertain) {
  LinkParams p = link(0.0, 0.0, 30.0);
  p.U = 1;
  p.mu = 1.0;  // no comm states at all: empty sum
  EXPECT_EQ(oam_detect_prob(p), 1.0);
}

TEST(OamDetect, NoiselessLimit) {
  LinkParams p = link(0.5, 10.0, 13.0);
  p.sigma_n2 = 1e-9;
  EXPECT_NEAR(oam_detect_prob(p), 1.0, 1e-12);
}

TEST(OamDetect, UnionBoundClampsAtLowSnr) {
  const LinkParams p = link(0.5, -10.0, 5.0);
  bool clamped = false;
  EXPECT_EQ(oam_detect_prob(p, &clamped), 0.0);
  EXPECT_TRUE(clamped);
  const LinkReport r = total_error_prob(p);
  EXPECT_TRUE(r.p_oam_clamped);
  EXPECT_GT(r.union_sum, 1.0);
}

TEST(DpskBer, ClosedFormValues) {
  EXPECT_EQ(dpsk_ber_rayleigh(0.0), 0.5);
  EXPECT_NEAR(dpsk_ber_rayleigh(9.0), 0.05, 1e-15);
  EXPECT_THROW(dpsk_ber_rayleigh(-1.0), std::invalid_argument);
}

TEST(DpskBer, MatchesQuadratureOfFadingAverage) {
  for (double g : {0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) EXPECT_NEAR(dpsk_ber_rayleigh(g), dpsk_quadrature(g), 1e-10);
}

TEST(TotalError, PerfectLinkHasNoErrors) {
  LinkParams p = link(0.5, 10.0, 13.0);
  p.sigma_n2 = 1e-12;
  p.gamma_bar_b = 1e300;
  const LinkReport r = total_error_prob(p);
  EXPECT_NEAR(r.p_oam, 1.0, 1e-12);
  EXPECT_NEAR(r.p_e, 0.0, 1e-12);
}

TEST(TotalError, FullRadarDisablesComm) {
  const LinkReport r = total_error_prob(link(1.0, 10.0, 5.0));
  EXPECT_TRUE(r.comm_disabled);
  EXPECT_TRUE(std::isnan(r.p_e));
  EXPECT_EQ(r.throughput, 0.0);
}

TEST(TotalError, ProbabilitiesInRange) {
  for (double snr = -10; snr <= 20; snr += 3)
    for (double mu : {0.1, 0.3, 0.5, 0.8})
      for (double phi : {5.0, 30.0, 60.0}) {
        const LinkReport r = total_error_prob(link(mu, snr, phi));
        for (double v : {r.p_oam, r.p_b, r.p_e}) {
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
}

TEST(TotalError, NonincreasingInSnr) {
  for (double mu : {0.2, 0.5, 0.8})
    for (double phi : {5.0, 30.0, 60.0}) {
      double prev = 1.0;
      for (double snr = -10; snr <= 30; snr += 1) {
        const double pe = total_error_prob(link(mu, snr, phi)).p_e;
        EXPECT_LE(pe, prev + 1e-15) << "mu " << mu << " phi " << phi << " snr " << snr;
        prev = pe;
      }
    }
}

TEST(TotalError, ComposesTheTwoStages) {
  const LinkReport r = total_error_prob(link(0.5, 20.0, 60.0));
  EXPECT_NEAR(r.p_e, 1.0 - (1.0 - r.p_b) * r.p_oam, 1e-15);
  EXPECT_NEAR(r.bits_per_symbol, std::log2(10.0) + 1.0, 1e-15);
  EXPECT_NEAR(r.throughput, (1.0 - r.p_e) * r.bits_per_symbol / 5e-6, 1e-6);
}

TEST(Throughput, Empirical) {
  EXPECT_NEAR(throughput_empirical(10.0, 10e-6), 1e6, 1e-6);
  EXPECT_THROW(throughput_empirical(10.0, 0.0), std::invalid_argument);
}

TEST(LinkParamsFor, BindsSceneQuantities) {
  Scene s = reference_scene(0.5);
  s.targets[2].sigma2 = 4.0;
  const LinkParams p = link_params_for(s, 10.0, 5e-6);
  EXPECT_EQ(p.U, 10);
  EXPECT_EQ(p.mu, 0.5);
  EXPECT_NEAR(p.sigma_n2, 0.1, 1e-15);
  EXPECT_NEAR(p.gamma_bar_b, 10.0, 1e-12);
  EXPECT_NEAR(p.corr_phi, deg2rad(60.0), 1e-15);
  EXPECT_NEAR(link_params_for(reference_scene(), 0.0, 5e-6).corr_phi, deg2rad(5.0), 1e-15);
}

TEST(LinkParams, Validation) {
  LinkParams p = link(0.5, 0.0, 5.0);
  p.sigma_n2 = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = link(1.5, 0.0, 5.0);
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = link(0.5, 0.0, 5.0);
  p.sigma_s2 = {1.0, 2.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
