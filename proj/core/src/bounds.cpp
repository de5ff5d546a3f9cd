#include "oamjrc/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "oamjrc/constants.hpp"
#include "oamjrc/synth.hpp"

namespace oamjrc {

namespace {

constexpr double kConditionLimit = 1e12;

CMatrix vec_derivative(const CMatrix& A, const CMatrix& dA, const Scene& s) {
  const Index D = A.rows();
  CMatrix out(D * D, A.cols());
  for (Index q = 0; q < A.cols(); ++q) {
    const double p = s.targets[q].sigma2;
    // vec(x y^H) = conj(y) kron x with the column index outermost.
    for (Index j = 0; j < D; ++j)
      out.col(q).segment(j * D, D) =
          p * (std::conj(A(j, q)) * dA.col(q) + std::conj(dA(j, q)) * A.col(q));
  }
  return out;
}

RVector inverse_diagonal(const RMatrix& F, bool& singular, double& condition) {
  const Index n = F.rows();
  RVector d = F.diagonal();
  singular = false;
  for (Index i = 0; i < n; ++i)
    if (!(d(i) > 0.0)) singular = true;
  if (singular) {
    condition = std::numeric_limits<double>::infinity();
    return RVector::Constant(n, std::numeric_limits<double>::infinity());
  }
  const RVector s = d.cwiseSqrt().cwiseInverse();
  RMatrix C = s.asDiagonal() * (0.5 * (F + F.transpose())) * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(C);
  const RVector ev = es.eigenvalues();
  condition = ev(0) > 0.0 ? ev(n - 1) / ev(0) : std::numeric_limits<double>::infinity();
  if (!(condition <= kConditionLimit)) {
    singular = true;
    return RVector::Constant(n, std::numeric_limits<double>::infinity());
  }
  const RMatrix Cinv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return Cinv.diagonal().cwiseProduct(s.cwiseProduct(s));
}

}  // namespace

SteeringDerivatives steering_derivatives(const Scene& s) {
  const int Q = s.Q();
  const int M = s.array.M;
  const int N = s.array.N;
  const std::vector<int> states = s.oam.radar_states();
  const double lam0 = s.array.wavelength0();

  SteeringDerivatives out;
  out.A = radar_manifold(s);
  for (auto& d : out.dA) d.resizeLike(out.A);

  const cdouble j(0.0, 1.0);
  for (std::size_t si = 0; si < states.size(); ++si) {
    const int l = s.oam.l(states[si]);
    const double curv = s.curvature(l);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        const Index row = (static_cast<Index>(si) * M + m) * N + n;
        for (int q = 0; q < Q; ++q) {
          const auto& t = s.targets[q];
          const cdouble a = out.A(row, q);
          out.dA[0](row, q) = -j * static_cast<double>(l) * a;
          out.dA[1](row, q) = -j * (kTwoPi / lam0) * (t.r / curv) * a;
          out.dA[2](row, q) = j * (kTwoPi * m * s.array.delta_f / kSpeedOfLight) * a;
          out.dA[3](row, q) =
              -j * (kTwoPi * s.array.d * n * s.array.f0 * std::cos(t.psi) / kSpeedOfLight) * a;
        }
      }
  }
  return out;
}

CMatrix derivative_block(const Scene& s, FimParam p) {
  const SteeringDerivatives sd = steering_derivatives(s);
  return vec_derivative(sd.A, sd.dA[static_cast<int>(p)], s);
}

CMatrix velocity_derivative_block(const Scene& s, double t_eval) {
  CMatrix D = derivative_block(s, FimParam::R_radial);
  for (int q = 0; q < s.Q(); ++q) D.col(q) *= t_eval * std::cos(s.targets[q].phi);
  return D;
}

PositionFim position_fim(const Scene& s, double L_r) {
  if (!(s.noise_power > 0.0)) throw std::invalid_argument("position_fim: noise power must be positive");
  if (!(L_r > 0.0)) throw std::invalid_argument("position_fim: L_r must be positive");
  const int Q = s.Q();
  if (Q < 1) throw std::invalid_argument("position_fim: scene has no targets");

  const SteeringDerivatives sd = steering_derivatives(s);
  const Index D = sd.A.rows();
  CMatrix Z(D, 5 * Q);
  Z.leftCols(Q) = sd.A;
  for (int k = 0; k < 4; ++k) Z.middleCols((k + 1) * Q, Q) = sd.dA[k];

  // Z^H R^-1 Z through the Woodbury identity; R is never formed.
  const double sn = s.noise_power;
  CMatrix K = sd.A.adjoint() * sd.A;
  for (int q = 0; q < Q; ++q) K(q, q) += sn / s.targets[q].sigma2;
  const CMatrix ZA = Z.adjoint() * sd.A;
  const CMatrix G = (Z.adjoint() * Z - ZA * K.ldlt().solve(ZA.adjoint())) / sn;

  auto g = [&](int blk_a, int qa, int blk_b, int qb) { return G(blk_a * Q + qa, blk_b * Q + qb); };

  CMatrix F(4 * Q, 4 * Q);
  for (int bi = 0; bi < 4; ++bi)
    for (int qi = 0; qi < Q; ++qi)
      for (int bj = 0; bj < 4; ++bj)
        for (int qj = 0; qj < Q; ++qj) {
          const int di = bi + 1;
          const int dj = bj + 1;
          // tr(P dR_i P dR_j) with dR = sigma^2 (da a^H + a da^H).
          const cdouble t = g(0, qi, dj, qj) * g(0, qj, di, qi) + g(0, qi, 0, qj) * g(dj, qj, di, qi) +
                            g(di, qi, dj, qj) * g(0, qj, 0, qi) + g(di, qi, 0, qj) * g(dj, qj, 0, qi);
          F(bi * Q + qi, bj * Q + qj) = L_r * s.targets[qi].sigma2 * s.targets[qj].sigma2 * t;
        }

  PositionFim out;
  out.snapshots = L_r;
  out.fim = F.real();
  const double fn = out.fim.norm();
  out.imag_residue = fn > 0.0 ? F.imag().norm() / fn : 0.0;
  out.asymmetry = fn > 0.0 ? (out.fim - out.fim.transpose()).norm() / fn : 0.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (out.fim + out.fim.transpose()), Eigen::EigenvaluesOnly);
  out.min_eig = es.eigenvalues()(0);
  out.max_eig = es.eigenvalues()(4 * Q - 1);
  out.crlb = inverse_diagonal(out.fim, out.singular, out.condition);
  return out;
}

RVector position_rcrlb(const PositionFim& f) { return f.crlb.cwiseSqrt(); }

VelocityFim velocity_fim(const PositionFim& pos, const Scene& s, double t_eval) {
  if (!(t_eval > 0.0)) throw std::invalid_argument("velocity_fim: t_eval must be positive");
  const int Q = s.Q();
  RVector g(Q);
  for (int q = 0; q < Q; ++q) g(q) = t_eval * std::cos(s.targets[q].phi);

  VelocityFim out;
  out.t_eval = t_eval;
  out.fim = g.asDiagonal() * pos.fim.block(Q, Q, Q, Q) * g.asDiagonal();
  out.crlb = RVector::Constant(Q, std::numeric_limits<double>::infinity());
  out.unidentifiable.assign(static_cast<std::size_t>(Q), false);

  std::vector<int> keep;
  for (int q = 0; q < Q; ++q) {
    if (std::abs(std::cos(s.targets[q].phi)) < 1e-12) {
      out.unidentifiable[q] = true;
      out.fim.row(q).setZero();
      out.fim.col(q).setZero();
    } else {
      keep.push_back(q);
    }
  }
  if (keep.empty()) return out;
  RMatrix sub(keep.size(), keep.size());
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b) sub(a, b) = out.fim(keep[a], keep[b]);
  bool singular = false;
  double cond = 0.0;
  const RVector d = inverse_diagonal(sub, singular, cond);
  for (std::size_t a = 0; a < keep.size(); ++a) out.crlb(keep[a]) = d(a);
  return out;
}

VelocityFim velocity_fim(const Scene& s, double L_r, double t_eval) {
  return velocity_fim(position_fim(s, L_r), s, t_eval);
}

std::vector<CrlbRow> crlb_sweep(const Scene& scene, const std::vector<double>& snr_db, double L_r,
                                double t_eval) {
  std::vector<CrlbRow> rows;
  for (double snr : snr_db) {
    Scene s = scene;
    s.set_snr_db(snr);
    const PositionFim f = position_fim(s, L_r);
    const RVector rc = position_rcrlb(f);
    for (int b = 0; b < 4; ++b)
      for (int q = 0; q < s.Q(); ++q) rows.push_back({snr, kFimParamNames[b], q, rc(b * s.Q() + q)});
    const VelocityFim v = velocity_fim(f, s, t_eval);
    for (int q = 0; q < s.Q(); ++q) rows.push_back({snr, "nu", q, std::sqrt(v.crlb(q))});
  }
  return rows;
}

}  // namespace oamjrc
