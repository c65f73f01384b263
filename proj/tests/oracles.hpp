#pragma once
// Brute-force reference computations used only by the tests. They avoid the
// library's transfer-matrix machinery on purpose.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mpsrg/tensor.hpp"

namespace oracle {

using mpsrg::cplx;
using mpsrg::Matrix;
using mpsrg::Vector;

// amplitude of every configuration by explicit matrix products
inline Vector dense_periodic(const std::vector<mpsrg::SiteTensor>& sites) {
  std::uint64_t total = 1;
  for (const auto& s : sites) total *= static_cast<std::uint64_t>(s.phys_dim());
  Vector psi(static_cast<Eigen::Index>(total));
  std::vector<int> idx(sites.size());
  for (std::uint64_t c = 0; c < total; ++c) {
    std::uint64_t r = c;
    for (std::size_t n = sites.size(); n-- > 0;) {
      idx[n] = static_cast<int>(r % sites[n].phys_dim());
      r /= sites[n].phys_dim();
    }
    Matrix m = sites[0][idx[0]];
    for (std::size_t n = 1; n < sites.size(); ++n) m = m * sites[n][idx[n]];
    psi(static_cast<Eigen::Index>(c)) = m.trace();
  }
  return psi;
}

inline Vector dense_open(const std::vector<mpsrg::SiteTensor>& sites, const Vector& l, const Vector& r) {
  std::uint64_t total = 1;
  for (const auto& s : sites) total *= static_cast<std::uint64_t>(s.phys_dim());
  Vector psi(static_cast<Eigen::Index>(total));
  std::vector<int> idx(sites.size());
  for (std::uint64_t c = 0; c < total; ++c) {
    std::uint64_t rem = c;
    for (std::size_t n = sites.size(); n-- > 0;) {
      idx[n] = static_cast<int>(rem % sites[n].phys_dim());
      rem /= sites[n].phys_dim();
    }
    Eigen::RowVectorXcd v = l.transpose();
    for (std::size_t n = 0; n < sites.size(); ++n) v = v * sites[n][idx[n]];
    psi(static_cast<Eigen::Index>(c)) = (v * r)(0, 0);
  }
  return psi;
}

inline double dense_error(const Vector& a, const Vector& b) {
  return 1.0 - std::abs(a.dot(b)) / (a.norm() * b.norm());
}

// Complex Gaussian tensor; generic draws are normal (primitive channel).
inline mpsrg::SiteTensor gaussian_tensor(int d, int D, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Matrix> mats;
  for (int i = 0; i < d; ++i) {
    Matrix m(D, D);
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) m(a, b) = cplx(g(rng), g(rng));
    mats.push_back(m);
  }
  return mpsrg::SiteTensor(std::move(mats));
}

// Leading eigenvalue of the completely positive map X -> sum A X A^dagger by power iteration.
inline double power_iteration_lambda(const mpsrg::SiteTensor& a, int iters = 4000) {
  Matrix x = Matrix::Identity(a.left_dim(), a.left_dim());
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Matrix y = Matrix::Zero(x.rows(), x.cols());
    for (int i = 0; i < a.phys_dim(); ++i) y += a[i] * x * a[i].adjoint();
    lam = y.norm() / x.norm();
    x = y / y.norm();
  }
  return lam;
}

}  // namespace oracle
