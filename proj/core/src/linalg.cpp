#include "oamjrc/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "oamjrc/constants.hpp"

namespace oamjrc {

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao: column counts differ");
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Index q = 0; q < a.cols(); ++q)
    for (Index i = 0; i < a.rows(); ++i)
      out.col(q).segment(i * b.rows(), b.rows()) = a(i, q) * b.col(q);
  return out;
}

Index numerical_rank(const CMatrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

LeftSolve left_solve(const CMatrix& a, const CMatrix& b, double rel_threshold) {
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  qr.setThreshold(rel_threshold);
  return {qr.solve(b), qr.rank()};
}

double wrap_pi(double angle) {
  double w = std::remainder(angle, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

}  // namespace oamjrc
