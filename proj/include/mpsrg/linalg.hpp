#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace mpsrg {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

Matrix hermitize(const Matrix& m);

/// Square root of a Hermitian PSD matrix; negative eigenvalues are clipped to zero.
Matrix psd_sqrt(const Matrix& h);

/// Inverse square root restricted to the support (eigenvalues above rel_cutoff * max).
Matrix psd_inv_sqrt(const Matrix& h, double rel_cutoff = 1e-12);

double min_hermitian_eigenvalue(const Matrix& h);

struct TruncatedSvd {
  Matrix U;
  RealVector S;
  Matrix V;  // m = U diag(S) V^dagger
  Index rank = 0;
};

/// Thin SVD keeping singular values above rel_cutoff * s_max.
TruncatedSvd truncated_svd(const Matrix& m, double rel_cutoff = 1e-12);

/// Frobenius norm of V^dagger V - 1.
double isometry_defect(const Matrix& v);

/// Extend the orthonormal columns of v to a unitary. New columns come from
/// Gram-Schmidt over the standard basis in index order, so the result is deterministic.
Matrix complete_to_unitary(const Matrix& v);

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase fix.
Matrix haar_unitary(Index n, std::mt19937_64& rng);

Matrix kron(const Matrix& a, const Matrix& b);

/// Regroup X[(a,b),(c,d)] with dims (na*nb) x (nc*nd) into Y[(a,c),(b,d)].
Matrix regroup(const Matrix& x, Index na, Index nb, Index nc, Index nd);

/// Matrix with a separate log scale so long products do not overflow.
struct ScaledMatrix {
  Matrix m;
  double log_scale = 0.0;

  static ScaledMatrix identity(Index n);
  void normalize();
};

ScaledMatrix scaled_product(const ScaledMatrix& a, const ScaledMatrix& b);

/// x^n by repeated squaring.
ScaledMatrix scaled_power(const Matrix& x, std::uint64_t n);

/// log|z| and the phase of a scaled scalar.
struct ScaledScalar {
  double log_abs = -std::numeric_limits<double>::infinity();
  cplx phase{1.0, 0.0};

  cplx value() const { return std::exp(log_abs) * phase; }
};

ScaledScalar scaled_trace(const ScaledMatrix& x);
ScaledScalar make_scaled(cplx z, double extra_log = 0.0);

}  // namespace mpsrg
