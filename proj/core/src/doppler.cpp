#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "oamjrc/assignment.hpp"
#include "oamjrc/constants.hpp"
#include "oamjrc/estimate.hpp"

namespace oamjrc {

namespace {

// Peaks weaker than this fraction of the strongest are treated as sidelobes.
constexpr double kPeakFloor = 3.16e-3;
// A target left unmatched may share a peak only if its signature fits that well.
constexpr double kShareCorrelation = 0.9;

RVector hann(int K) {
  RVector w(K);
  for (int k = 0; k < K; ++k) w(k) = 0.5 * (1.0 - std::cos(kTwoPi * k / (K - 1)));
  return w;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

double doppler_coefficient(double r, double phi, double psi, int l, double wavelength,
                           double curvature, double z_ref) {
  const double x = r * std::cos(phi);
  return x / (wavelength * std::hypot(r, z_ref)) + std::sin(psi) / wavelength +
         x / (wavelength * curvature) + l * std::sin(phi) / (kTwoPi * r);
}

DopplerSpectrum doppler_spectrum(const CMatrix& series, double T_sym, int pad_factor) {
  const int K = static_cast<int>(series.cols());
  if (K < 2) throw std::invalid_argument("doppler_spectrum: need at least two slots");
  const int nfft = next_pow2(K * std::max(1, pad_factor));
  const RVector w = hann(K);

  Eigen::FFT<double> fft;
  RVector power = RVector::Zero(nfft);
  std::vector<cdouble> in(static_cast<std::size_t>(nfft)), out;
  for (Index n = 0; n < series.rows(); ++n) {
    std::fill(in.begin(), in.end(), cdouble(0.0));
    for (int k = 0; k < K; ++k) in[k] = w(k) * series(n, k);
    fft.fwd(out, in);
    for (int j = 0; j < nfft; ++j) power(j) += std::norm(out[j]);
  }

  DopplerSpectrum s;
  s.freq.resize(nfft);
  s.power.resize(nfft);
  const double df = 1.0 / (nfft * T_sym);
  for (int i = 0; i < nfft; ++i) {
    const int j = (i + nfft / 2) % nfft;  // fftshift
    s.freq(i) = (i - nfft / 2) * df;
    s.power(i) = power(j);
  }
  return s;
}

std::vector<DopplerPeak> find_peaks(const DopplerSpectrum& spec, int count) {
  const Index n = spec.power.size();
  const double pmax = spec.power.maxCoeff();
  std::vector<DopplerPeak> peaks;
  if (!(pmax > 0.0) || n < 3) return peaks;
  const double df = spec.freq(1) - spec.freq(0);

  for (Index i = 1; i + 1 < n; ++i) {
    const double p = spec.power(i);
    if (!(p > spec.power(i - 1) && p >= spec.power(i + 1)) || p < kPeakFloor * pmax) continue;
    const double a = std::log(spec.power(i - 1));
    const double b = std::log(p);
    const double c = std::log(spec.power(i + 1));
    const double den = a - 2.0 * b + c;
    const double off = den < 0.0 ? std::clamp(0.5 * (a - c) / den, -0.5, 0.5) : 0.0;
    peaks.push_back({spec.freq(i) + off * df, p, -1});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const DopplerPeak& x, const DopplerPeak& y) { return x.power > y.power; });
  if (static_cast<int>(peaks.size()) > count) peaks.resize(static_cast<std::size_t>(count));
  return peaks;
}

VelocityResult estimate_velocity(const std::vector<CpiChannel>& channels,
                                 const std::vector<TargetEstimate>& positions,
                                 const ProcessingContext& ctx, double T_sym, int pad_factor) {
  if (channels.size() < 2) throw std::invalid_argument("estimate_velocity: need two or more channels");
  if (!(T_sym > 0.0)) throw std::invalid_argument("estimate_velocity: T_sym must be positive");
  const int Q = static_cast<int>(positions.size());
  const int N = ctx.array.N;

  std::vector<double> sum_fc(static_cast<std::size_t>(Q), 0.0), sum_cc(static_cast<std::size_t>(Q), 0.0);
  VelocityResult out;

  for (const auto& ch : channels) {
    if (ch.series.rows() != N) throw std::invalid_argument("estimate_velocity: series must have N rows");
    const int K = static_cast<int>(ch.series.cols());
    const double lam = ctx.array.wavelength(ch.m);
    const double curv = ctx.curvature(ch.l);

    ChannelSpectrum cs;
    cs.m = ch.m;
    cs.l = ch.l;
    cs.bin_hz = 1.0 / (K * T_sym);
    const DopplerSpectrum spec = doppler_spectrum(ch.series, T_sym, pad_factor);
    cs.peaks = find_peaks(spec, Q);
    const int P = static_cast<int>(cs.peaks.size());

    // Receive-array signature of each peak versus the DoA steering of each target.
    const RVector w = hann(K);
    CMatrix steer(N, Q);
    for (int q = 0; q < Q; ++q)
      for (int n = 0; n < N; ++n)
        steer(n, q) = phasor(-kTwoPi * ctx.array.d * std::sin(positions[q].psi) * n / lam);
    CMatrix sigs(N, P);
    RMatrix corr(P, Q);
    for (int p = 0; p < P; ++p) {
      CVector sig = CVector::Zero(N);
      for (int k = 0; k < K; ++k)
        sig += w(k) * ch.series.col(k) * phasor(-kTwoPi * cs.peaks[p].freq * k * T_sym);
      sigs.col(p) = sig;
      for (int q = 0; q < Q; ++q) {
        const double den = steer.col(q).norm() * sig.norm();
        corr(p, q) = den > 0.0 ? std::abs(steer.col(q).dot(sig)) / den : 0.0;
      }
    }

    std::vector<int> peak_of(static_cast<std::size_t>(Q), -1);
    if (P > 0) {
      const std::vector<int> match = hungarian(-corr);
      for (int p = 0; p < P; ++p) {
        cs.peaks[p].target = match[p];
        peak_of[match[p]] = p;
      }
      for (int q = 0; q < Q; ++q) {
        if (peak_of[q] >= 0) continue;
        Index best;
        if (corr.col(q).maxCoeff(&best) >= kShareCorrelation) peak_of[q] = static_cast<int>(best);
      }
      // Several targets in one peak (e.g. equal velocities): split each peak
      // signature over all steering vectors and send a still unmatched
      // target to the peak holding most of its amplitude.
      if (std::find(peak_of.begin(), peak_of.end(), -1) != peak_of.end() && N >= Q) {
        const CMatrix alpha = left_solve(steer, sigs).x;
        for (int q = 0; q < Q; ++q) {
          if (peak_of[q] >= 0) continue;
          Index best;
          if (alpha.row(q).cwiseAbs().maxCoeff(&best) > 0.0) peak_of[q] = static_cast<int>(best);
        }
      }
    }

    for (int q = 0; q < Q; ++q) {
      if (peak_of[q] < 0) continue;
      const auto& t = positions[q];
      const double coef = doppler_coefficient(t.r, t.phi, t.psi, ch.l, lam, curv, ctx.beam.z_ref);
      // r clamped to zero leaves the helical term undefined; that channel says nothing.
      if (!std::isfinite(coef)) continue;
      sum_fc[q] += cs.peaks[peak_of[q]].freq * coef;
      sum_cc[q] += coef * coef;
    }
    out.channels.push_back(std::move(cs));
  }

  for (int q = 0; q < Q; ++q) {
    const bool ok = sum_cc[q] > 0.0;
    const double nu = ok ? -sum_fc[q] / sum_cc[q] : std::nan("");
    out.nu.push_back(nu);
    out.unresolved.push_back(!ok);
    const double r = positions[q].r;
    out.Omega.push_back(ok && r > 0.0 ? nu * std::sin(positions[q].phi) / r : std::nan(""));
  }
  return out;
}

}  // namespace oamjrc
