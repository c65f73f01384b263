#include "mpsrg/linalg.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

#include "mpsrg/error.hpp"

namespace mpsrg {

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix psd_sqrt(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  require(es.info() == Eigen::Success, ErrorCode::NumericalFailure, "eigensolver failed in psd_sqrt");
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix psd_inv_sqrt(const Matrix& h, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  require(es.info() == Eigen::Success, ErrorCode::NumericalFailure, "eigensolver failed in psd_inv_sqrt");
  const RealVector& ev = es.eigenvalues();
  double cut = rel_cutoff * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  RealVector inv(ev.size());
  for (Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cut ? 1.0 / std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

double min_hermitian_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

TruncatedSvd truncated_svd(const Matrix& m, double rel_cutoff) {
  TruncatedSvd out;
  if (m.size() == 0) return out;
  if (!m.allFinite()) throw Error(ErrorCode::NumericalFailure, "non-finite entries passed to svd");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  Index r = 0;
  while (r < s.size() && s(r) > rel_cutoff * smax && s(r) > 0.0) ++r;
  out.rank = r;
  out.U = svd.matrixU().leftCols(r);
  out.S = s.head(r);
  out.V = svd.matrixV().leftCols(r);
  return out;
}

double isometry_defect(const Matrix& v) {
  return (v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())).norm();
}

Matrix complete_to_unitary(const Matrix& v) {
  const Index n = v.rows();
  require(v.cols() <= n, ErrorCode::ShapeMismatch, "isometry has more columns than rows");
  Matrix u(n, n);
  u.leftCols(v.cols()) = v;
  Index filled = v.cols();
  for (Index e = 0; e < n && filled < n; ++e) {
    Vector c = Vector::Zero(n);
    c(e) = 1.0;
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass)
      for (Index k = 0; k < filled; ++k) c -= u.col(k).dot(c) * u.col(k);
    double nrm = c.norm();
    if (nrm < 1e-8) continue;
    u.col(filled++) = c / nrm;
  }
  require(filled == n, ErrorCode::NumericalFailure, "unitary completion failed; input not isometric");
  return u;
}

Matrix haar_unitary(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = cplx(gauss(rng), gauss(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    cplx d = r(i, i);
    double a = std::abs(d);
    q.col(i) *= a > 0 ? d / a : cplx(1.0);
  }
  return q;
}

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Matrix regroup(const Matrix& x, Index na, Index nb, Index nc, Index nd) {
  require(x.rows() == na * nb && x.cols() == nc * nd, ErrorCode::ShapeMismatch, "regroup dims");
  Matrix y(na * nc, nb * nd);
  for (Index a = 0; a < na; ++a)
    for (Index b = 0; b < nb; ++b)
      for (Index c = 0; c < nc; ++c)
        for (Index d = 0; d < nd; ++d) y(a * nc + c, b * nd + d) = x(a * nb + b, c * nd + d);
  return y;
}

ScaledMatrix ScaledMatrix::identity(Index n) { return {Matrix::Identity(n, n), 0.0}; }

void ScaledMatrix::normalize() {
  double n = m.cwiseAbs().maxCoeff();
  if (n > 0 && std::isfinite(n)) {
    m /= n;
    log_scale += std::log(n);
  }
}

ScaledMatrix scaled_product(const ScaledMatrix& a, const ScaledMatrix& b) {
  ScaledMatrix out{a.m * b.m, a.log_scale + b.log_scale};
  out.normalize();
  return out;
}

ScaledMatrix scaled_power(const Matrix& x, std::uint64_t n) {
  require(x.rows() == x.cols(), ErrorCode::ShapeMismatch, "power of non-square matrix");
  ScaledMatrix result = ScaledMatrix::identity(x.rows());
  ScaledMatrix base{x, 0.0};
  base.normalize();
  while (n > 0) {
    if (n & 1u) result = scaled_product(result, base);
    n >>= 1u;
    if (n) base = scaled_product(base, base);
  }
  return result;
}

ScaledScalar make_scaled(cplx z, double extra_log) {
  ScaledScalar s;
  double a = std::abs(z);
  if (a == 0.0) return s;
  s.log_abs = std::log(a) + extra_log;
  s.phase = z / a;
  return s;
}

ScaledScalar scaled_trace(const ScaledMatrix& x) { return make_scaled(x.m.trace(), x.log_scale); }

}  // namespace mpsrg
