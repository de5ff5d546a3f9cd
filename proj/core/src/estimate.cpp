#include "oamjrc/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "oamjrc/constants.hpp"
#include "oamjrc/errors.hpp"

namespace oamjrc {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

CMatrix select_rows(const CMatrix& x, const std::vector<Index>& rows) {
  CMatrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

double min_separation(const CVector& ev) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i)
    for (Index j = i + 1; j < ev.size(); ++j) best = std::min(best, std::abs(ev(i) - ev(j)));
  return best;
}

double gap_of(double lq, double lnext, double l1) {
  if (lnext <= 1e-14 * std::max(l1, 1e-300)) return std::numeric_limits<double>::infinity();
  return lq / lnext;
}

}  // namespace

ProcessingContext ProcessingContext::from_scene(const Scene& scene) {
  ProcessingContext c;
  c.array = scene.array;
  c.beam = scene.beam;
  c.oam = scene.oam;
  c.Q = scene.Q();
  return c;
}

double ProcessingContext::ring_radius() const {
  Scene s;
  s.array = array;
  s.beam = beam;
  s.oam = oam;
  return s.ring_radius();
}

double ProcessingContext::curvature(int l) const {
  Scene s;
  s.array = array;
  s.beam = beam;
  s.oam = oam;
  return s.curvature(l);
}

CMatrix sample_covariance(const CMatrix& x) {
  if (x.cols() < 1) throw std::invalid_argument("sample_covariance: no snapshots");
  CMatrix c = CMatrix::Zero(x.rows(), x.rows());
  c.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(x.cols()));
  return c.selfadjointView<Eigen::Lower>();
}

SubspaceDecomp signal_subspace(const CMatrix& cov, int Q, double gap_threshold) {
  const Index D = cov.rows();
  if (cov.cols() != D) throw std::invalid_argument("signal_subspace: covariance must be square");
  if (Q < 1 || Q >= D) throw std::invalid_argument("signal_subspace: need 1 <= Q < dim");

  Eigen::SelfAdjointEigenSolver<CMatrix> es(cov);
  if (es.info() != Eigen::Success) throw EstimationError("eigendecomposition failed");
  const RVector& ev = es.eigenvalues();  // ascending

  SubspaceDecomp out;
  out.Us.resize(D, Q);
  out.eigvals.resize(Q);
  for (int k = 0; k < Q; ++k) {
    out.Us.col(k) = es.eigenvectors().col(D - 1 - k);
    out.eigvals(k) = ev(D - 1 - k);
  }
  out.noise_floor = ev.head(D - Q).mean();
  out.gap_ratio = gap_of(ev(D - Q), ev(D - Q - 1), ev(D - 1));
  out.gap_warning = out.gap_ratio < gap_threshold;

  const double cnorm = std::max(cov.norm(), 1e-300);
  for (int k = 0; k < Q; ++k) {
    const double res = (cov * out.Us.col(k) - out.eigvals(k) * out.Us.col(k)).norm() / cnorm;
    out.residual = std::max(out.residual, res);
  }
  return out;
}

SubspaceDecomp signal_subspace_from_snapshots(const CMatrix& x, int Q, double gap_threshold) {
  const Index D = x.rows();
  const Index L = x.cols();
  if (L < 1) throw std::invalid_argument("signal_subspace_from_snapshots: no snapshots");
  if (L >= D) return signal_subspace(sample_covariance(x), Q, gap_threshold);
  if (Q < 1 || Q >= D) throw std::invalid_argument("signal_subspace: need 1 <= Q < dim");
  if (Q > L) throw EstimationError("fewer snapshots than sources");

  // Nonzero spectrum of X X^H / L equals that of X^H X / L.
  CMatrix gram = CMatrix::Zero(L, L);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.adjoint(), 1.0 / static_cast<double>(L));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
  if (es.info() != Eigen::Success) throw EstimationError("eigendecomposition failed");
  const RVector& ev = es.eigenvalues();

  SubspaceDecomp out;
  out.Us.resize(D, Q);
  out.eigvals.resize(Q);
  for (int k = 0; k < Q; ++k) {
    const double lam = ev(L - 1 - k);
    if (!(lam > 1e-14 * std::max(ev(L - 1), 1e-300)))
      throw EstimationError("snapshot matrix has rank below the model order");
    out.eigvals(k) = lam;
    out.Us.col(k) = x * es.eigenvectors().col(L - 1 - k) / std::sqrt(lam * static_cast<double>(L));
  }
  const double trace = x.squaredNorm() / static_cast<double>(L);
  out.noise_floor = std::max(0.0, trace - out.eigvals.sum()) / static_cast<double>(D - Q);
  const double next = Q < L ? ev(L - 1 - Q) : 0.0;
  out.gap_ratio = gap_of(out.eigvals(Q - 1), next, ev(L - 1));
  out.gap_warning = out.gap_ratio < gap_threshold;
  return out;
}

EspritResult esprit_range_doa(const CMatrix& Us, int S, int M, int N, const ProcessingContext& ctx) {
  const int Q = static_cast<int>(Us.cols());
  if (M < 2 || N < 2) throw EstimationError("ESPRIT needs at least two transmit and receive elements");
  if (Us.rows() != static_cast<Index>(S) * M * N)
    throw std::invalid_argument("esprit_range_doa: subspace rows do not match S*M*N");
  if (M - 1 < Q)
    throw EstimationError("range selection rank deficient: M = " + std::to_string(M) +
                          " must exceed Q = " + std::to_string(Q));
  if (N - 1 < Q)
    throw EstimationError("DoA selection rank deficient: N = " + std::to_string(N) +
                          " must exceed Q = " + std::to_string(Q));

  std::vector<Index> b1, b2, a1, a2;
  for (int s = 0; s < S; ++s)
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        const Index row = (static_cast<Index>(s) * M + m) * N + n;
        if (m < M - 1) b1.push_back(row);
        if (m > 0) b2.push_back(row);
        if (n < N - 1) a1.push_back(row);
        if (n > 0) a2.push_back(row);
      }

  const CMatrix UB1 = select_rows(Us, b1);
  const LeftSolve phiB = left_solve(UB1, select_rows(Us, b2));
  if (phiB.rank < Q) throw EstimationError("U_B1 is rank deficient");
  const CMatrix UA1 = select_rows(Us, a1);
  const LeftSolve phiA = left_solve(UA1, select_rows(Us, a2));
  if (phiA.rank < Q) throw EstimationError("U_AR1 is rank deficient");

  // Both rotations share the eigenvectors T^-1. Diagonalize the one whose
  // eigenvalues are better separated and read the other off the diagonal;
  // closely spaced ranges otherwise leave the eigenvectors noise dominated.
  Eigen::ComplexEigenSolver<CMatrix> esB(phiB.x);
  Eigen::ComplexEigenSolver<CMatrix> esA(phiA.x);
  if (esB.info() != Eigen::Success || esA.info() != Eigen::Success)
    throw EstimationError("rotation eigendecomposition failed");
  const bool use_doa = min_separation(esA.eigenvalues()) > min_separation(esB.eigenvalues());

  EspritResult out;
  out.V = use_doa ? esA.eigenvectors() : esB.eigenvectors();
  Eigen::FullPivLU<CMatrix> lu(out.V);
  if (!lu.isInvertible()) throw EstimationError("mixing matrix estimate is singular");
  out.T = lu.inverse();

  const CMatrix psi_full = out.T * phiB.x * out.V;
  const CMatrix omega_full = out.T * phiA.x * out.V;
  out.Psi = psi_full.diagonal();
  out.Omega = omega_full.diagonal();
  const CMatrix& read = use_doa ? psi_full : omega_full;
  const CVector rd = read.diagonal();
  const double diag = rd.norm();
  const double off = std::sqrt(std::max(0.0, read.squaredNorm() - rd.squaredNorm()));
  out.offdiag_ratio = diag > 0.0 ? off / diag : std::numeric_limits<double>::infinity();
  if (out.offdiag_ratio > 0.1)
    out.warnings.push_back(fmt("rotation read-off not diagonal dominant (off-diagonal ratio %.3g)",
                               out.offdiag_ratio));

  for (int i = 0; i < Q; ++i)
    for (int j = i + 1; j < Q; ++j) {
      if (std::abs(out.Psi(i) - out.Psi(j)) < 1e-6)
        out.warnings.push_back(fmt("repeated range eigenvalue (targets %g and %g)", i, j));
      if (std::abs(out.Omega(i) - out.Omega(j)) < 1e-6)
        out.warnings.push_back(fmt("repeated DoA eigenvalue (targets %g and %g)", i, j));
    }

  const double range_scale = kTwoPi * ctx.array.delta_f / kSpeedOfLight;
  const double doa_scale = kTwoPi * ctx.array.d * ctx.array.f0 / kSpeedOfLight;
  out.R.resize(Q);
  out.psi.resize(Q);
  for (int q = 0; q < Q; ++q) {
    double ang = std::arg(out.Psi(q));
    if (ang < 0.0) ang += kTwoPi;
    out.R(q) = ang / range_scale;
    const double s = std::clamp(std::arg(out.Omega(q)) / doa_scale, -1.0, 1.0);
    out.psi(q) = -std::asin(s);
  }
  return out;
}

DecoupleResult decouple_r_phi(const CMatrix& Us, const EspritResult& esp, const ProcessingContext& ctx) {
  const int Q = static_cast<int>(Us.cols());
  const int M = ctx.array.M;
  const int N = ctx.array.N;
  const int h = ctx.oam.radar_half();
  const int delta = ctx.oam.delta();
  const int MN = M * N;
  if (Us.rows() != static_cast<Index>(2 * h + 1) * MN)
    throw std::invalid_argument("decouple_r_phi: subspace is not a radar-state cube");

  DecoupleResult out;
  out.r = RVector::Zero(Q);
  out.phi = RVector::Zero(Q);
  out.r_flag.assign(static_cast<std::size_t>(Q), false);

  const double ring = ctx.ring_radius();
  const double lam0 = ctx.array.wavelength0();
  if (h == 0) {
    out.r_identifiable = false;
    out.r.setConstant(ring);
    out.r_flag.assign(static_cast<std::size_t>(Q), true);
    return out;
  }

  // Regressor 1/R_l over the state pairs; identical curvatures leave r unobservable.
  RVector x(h + 1);
  for (int i = 0; i <= h; ++i) x(i) = 1.0 / ctx.curvature(i * delta);
  const RVector xc = x.array() - x.mean();
  const double sxx = xc.squaredNorm();
  out.r_identifiable = sxx > 1e-24 * x.squaredNorm();

  const CMatrix W = Us * esp.V;
  const double range_k = kTwoPi * ctx.array.delta_f / kSpeedOfLight;
  const double doa_k = kTwoPi * ctx.array.d * ctx.array.f0 / kSpeedOfLight;

  for (int q = 0; q < Q; ++q) {
    // Inverse of b_m^2 a_n^2 from the range and DoA estimates.
    CVector inv_ba(MN);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n)
        inv_ba(m * N + n) =
            phasor(-2.0 * (range_k * m * esp.R(q) - doa_k * std::sin(esp.psi(q)) * n));

    std::vector<cdouble> plus(static_cast<std::size_t>(h + 1)), minus(static_cast<std::size_t>(h + 1));
    for (int i = 0; i <= h; ++i) {
      const auto lo = W.col(q).segment(static_cast<Index>(h - i) * MN, MN);
      const auto hi = W.col(q).segment(static_cast<Index>(h + i) * MN, MN);
      plus[i] = (lo.array() * hi.array() * inv_ba.array()).mean();
      minus[i] = (lo.array() * hi.array().conjugate()).mean();
    }

    double acc = 0.0;
    for (int i = 1; i <= h; ++i) acc += std::arg(minus[i] * std::conj(minus[i - 1]));
    out.phi(q) = acc / (2.0 * h * delta);

    if (!out.r_identifiable) {
      out.r(q) = ring;
      out.r_flag[q] = true;
      continue;
    }
    RVector y(h + 1);
    for (int i = 0; i <= h; ++i) y(i) = std::arg(plus[i] * std::conj(plus[0]));
    const double slope = xc.dot(y.array().matrix() - RVector::Constant(h + 1, y.mean())) / sxx;
    const double r2 = ring * ring - slope * lam0 / kTwoPi;
    if (r2 < 0.0) {
      out.r(q) = 0.0;
      out.r_flag[q] = true;
    } else {
      out.r(q) = std::sqrt(r2);
    }
  }
  return out;
}

EstimateSet estimate_positions(const CMatrix& Us, const ProcessingContext& ctx) {
  const int S = ctx.oam.radar_state_count();
  const EspritResult esp = esprit_range_doa(Us, S, ctx.array.M, ctx.array.N, ctx);
  const DecoupleResult dec = decouple_r_phi(Us, esp, ctx);

  EstimateSet out;
  out.T = esp.T;
  out.warnings = esp.warnings;
  if (!dec.r_identifiable)
    out.warnings.push_back("radial distance unobservable: all radar states share one wavefront curvature");
  for (int q = 0; q < static_cast<int>(Us.cols()); ++q) {
    TargetEstimate t;
    t.R = esp.R(q);
    t.psi = esp.psi(q);
    t.r = dec.r(q);
    t.phi = dec.phi(q);
    t.r_flag = dec.r_flag[q];
    if (t.r_flag && dec.r_identifiable)
      out.warnings.push_back(fmt("target %g: radial distance radicand negative, clamped to 0", q));
    out.targets.push_back(t);
  }
  return out;
}

EstimateSet estimate_positions_from_covariance(const CMatrix& cov, const ProcessingContext& ctx) {
  const SubspaceDecomp d = signal_subspace(cov, ctx.Q);
  EstimateSet out = estimate_positions(d.Us, ctx);
  if (d.gap_warning)
    out.warnings.push_back(fmt("weak eigengap (ratio %.3g)", d.gap_ratio));
  return out;
}

CMatrix radar_rows(const CMatrix& full, const ProcessingContext& ctx) {
  const Index MN = static_cast<Index>(ctx.array.M) * ctx.array.N;
  const int U = ctx.oam.U();
  const int h = ctx.oam.radar_half();
  if (full.rows() != static_cast<Index>(2 * U + 1) * MN)
    throw std::invalid_argument("radar_rows: input is not a full-state cube");
  return full.middleRows((U - h) * MN, (2 * h + 1) * MN);
}

EstimateSet estimate_positions_from_block(const SnapshotBlock& block, const ProcessingContext& ctx) {
  if (block.M != ctx.array.M || block.N != ctx.array.N)
    throw std::invalid_argument("snapshot block dimensions do not match the array");
  CMatrix x;
  if (block.S == ctx.oam.radar_state_count()) {
    x = block.data;
  } else if (block.S == ctx.oam.state_count()) {
    x = radar_rows(block.data, ctx);
  } else {
    throw std::invalid_argument("snapshot block state count does not match the OAM plan");
  }
  const SubspaceDecomp d = signal_subspace_from_snapshots(x, ctx.Q);
  EstimateSet out = estimate_positions(d.Us, ctx);
  if (d.gap_warning) out.warnings.push_back(fmt("weak eigengap (ratio %.3g)", d.gap_ratio));
  return out;
}

CMatrix manifold_from_estimates(const std::vector<TargetEstimate>& est, const ProcessingContext& ctx) {
  Scene s;
  s.array = ctx.array;
  s.beam = ctx.beam;
  s.oam = ctx.oam;
  for (const auto& e : est) {
    Scatterer t;
    t.R = e.R;
    t.psi = e.psi;
    t.r = e.r;
    t.phi = e.phi;
    s.targets.push_back(t);
  }
  return full_manifold(s);
}

std::vector<cdouble> recover_slot_symbols(const CMatrix& Us_full, const std::vector<TargetEstimate>& est,
                                          const ProcessingContext& ctx) {
  const CMatrix A = manifold_from_estimates(est, ctx);
  if (A.rows() != Us_full.rows()) throw std::invalid_argument("recover_slot_symbols: row mismatch");
  const CMatrix T = left_solve(radar_rows(A, ctx), radar_rows(Us_full, ctx)).x;
  const CMatrix H = A * T;

  const Index MN = static_cast<Index>(ctx.array.M) * ctx.array.N;
  const int U = ctx.oam.U();
  std::vector<cdouble> out;
  for (int u : ctx.oam.comm_states()) {
    const Index base = static_cast<Index>(u + U) * MN;
    cdouble acc = 0.0;
    int used = 0;
    for (Index i = 0; i < MN; ++i) {
      const double hh = H.row(base + i).squaredNorm();
      if (hh < 1e-12) continue;
      acc += Us_full.row(base + i).dot(H.row(base + i)) / hh;
      ++used;
    }
    // Eigen's dot conjugates the first argument; undo to get U H^H.
    out.push_back(used > 0 ? std::conj(acc) / static_cast<double>(used)
                           : cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0));
  }
  return out;
}

EstimateSet process_jrc(const std::vector<SnapshotBlock>& slots, const ProcessingContext& ctx) {
  if (slots.empty()) throw std::invalid_argument("process_jrc: no slots");
  for (const auto& b : slots)
    if (b.S != ctx.oam.state_count() || b.M != ctx.array.M || b.N != ctx.array.N)
      throw std::invalid_argument("process_jrc: slot shape does not match the OAM plan");

  Index total = 0;
  for (const auto& b : slots) total += b.L();
  const Index radar_h = static_cast<Index>(ctx.oam.radar_state_count()) * ctx.array.M * ctx.array.N;
  CMatrix pooled(radar_h, total);
  Index col = 0;
  for (const auto& b : slots) {
    pooled.middleCols(col, b.L()) = radar_rows(b.data, ctx);
    col += b.L();
  }
  const SubspaceDecomp rd = signal_subspace_from_snapshots(pooled, ctx.Q);
  EstimateSet out = estimate_positions(rd.Us, ctx);
  if (rd.gap_warning) out.warnings.push_back(fmt("weak eigengap (ratio %.3g)", rd.gap_ratio));

  SymbolEstimate& sym = out.symbols;
  sym.comm_u = ctx.oam.comm_states();
  const std::size_t C = sym.comm_u.size();
  sym.soft.assign(C, {});
  sym.hard.assign(C, {});
  sym.erased.assign(C, false);
  for (const auto& b : slots) {
    const SubspaceDecomp d = signal_subspace_from_snapshots(b.data, ctx.Q);
    const std::vector<cdouble> a = recover_slot_symbols(d.Us, out.targets, ctx);
    for (std::size_t c = 0; c < C; ++c) {
      sym.soft[c].push_back(a[c]);
      if (std::isnan(a[c].real())) {
        sym.erased[c] = true;
        sym.hard[c].push_back(1);
      } else {
        sym.hard[c].push_back(a[c].real() < 0.0 ? -1 : 1);
      }
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<cdouble> h(sym.hard[c].begin(), sym.hard[c].end());
    sym.bits.push_back(dpsk_decode(h));
    if (sym.erased[c]) out.warnings.push_back(fmt("comm state %g: symbol erasure", sym.comm_u[c]));
  }
  return out;
}

}  // namespace oamjrc
