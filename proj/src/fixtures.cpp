#include "mpsrg/fixtures.hpp"

#include <cmath>

#include "mpsrg/error.hpp"

namespace mpsrg::fixtures {

SiteTensor aklt() {
  Matrix sp(2, 2), sm(2, 2), sz(2, 2);
  sp << 0, 1, 0, 0;
  sm << 0, 0, 1, 0;
  sz << 1, 0, 0, -1;
  Matrix mid = -std::sqrt(1.0 / 3.0) * sz / std::sqrt(2.0);
  return SiteTensor({std::sqrt(2.0 / 3.0) * sp, mid, mid, -std::sqrt(2.0 / 3.0) * sm});
}

SiteTensor aklt_spin1() {
  Matrix sp(2, 2), sm(2, 2), sz(2, 2);
  sp << 0, 1, 0, 0;
  sm << 0, 0, 1, 0;
  sz << 1, 0, 0, -1;
  return SiteTensor({std::sqrt(2.0 / 3.0) * sp, -std::sqrt(1.0 / 3.0) * sz, -std::sqrt(2.0 / 3.0) * sm});
}

SiteTensor g_family(double g) {
  require(std::isfinite(g), ErrorCode::InvalidArgument, "g must be finite");
  Matrix a0(2, 2), a1(2, 2);
  a0 << 0, 0, 1, 1;
  a1 << 1, g, 0, 0;
  return SiteTensor({a0, a1});
}

double g_for_xi(double xi) {
  require(xi > 0, ErrorCode::InvalidArgument, "xi must be positive");
  return std::tanh(1.0 / (2.0 * xi));
}

SiteTensor ghz() {
  Matrix a0 = Matrix::Zero(2, 2), a1 = Matrix::Zero(2, 2);
  a0(0, 0) = 1;
  a1(1, 1) = 1;
  return SiteTensor({a0, a1});
}

SiteTensor haar_isometric(int d, int D, std::mt19937_64& rng) {
  Matrix u = haar_unitary(static_cast<Index>(d) * D, rng);
  std::vector<Matrix> mats(static_cast<std::size_t>(d), Matrix(D, D));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k) mats[i](j, k) = u(i * D + j, k);
  return SiteTensor(std::move(mats));
}

MpsChain random_obc_chain(std::uint64_t n, int d, int D, std::mt19937_64& rng) {
  std::vector<SiteTensor> sites;
  sites.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) sites.push_back(haar_isometric(d, D, rng));
  Vector e = Vector::Zero(D);
  e(0) = 1.0;
  return MpsChain::open(std::move(sites), e, e);
}

}  // namespace mpsrg::fixtures
