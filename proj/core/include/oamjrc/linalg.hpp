#pragma once

#include <complex>

#include <Eigen/Dense>

namespace oamjrc {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column-wise Kronecker product: column q is kron(a.col(q), b.col(q)),
/// so the row index of `b` runs fastest.
CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);

/// Unit phasor e^{j theta}.
inline cdouble phasor(double theta) { return std::polar(1.0, theta); }

/// Numerical rank: singular values above rel_tol * sigma_max.
Index numerical_rank(const CMatrix& a, double rel_tol = 1e-10);

struct LeftSolve {
  CMatrix x;    ///< a^dagger * b
  Index rank;   ///< numerical rank of a
};

/// Least-squares left solve a^dagger b via column-pivoted QR with the given
/// relative threshold on the R diagonal.
LeftSolve left_solve(const CMatrix& a, const CMatrix& b, double rel_threshold = 1e-10);

/// Wrap an angle to (-pi, pi].
double wrap_pi(double angle);

}  // namespace oamjrc
