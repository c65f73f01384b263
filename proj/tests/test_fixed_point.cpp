#include <cmath>
#include <random>

#include "doctest.h"
#include "mpsrg/error.hpp"
#include "mpsrg/fixed_point.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/polar.hpp"
#include "oracles.hpp"

using namespace mpsrg;

namespace {

Matrix reduced_second_leg(const Vector& w, Index d) {
  Matrix r = Matrix::Zero(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index ap = 0; ap < d; ++ap)
      for (Index b = 0; b < d; ++b) r(a, ap) += w(b * d + a) * std::conj(w(b * d + ap));
  return r;
}

SiteTensor scalar_branch(int d, int s) {
  SiteTensor t(d, 1, 1);
  t[s](0, 0) = 1.0;
  return t;
}

CanonicalDecomposition ghz_decomposition() {
  return {{{{1.0}, scalar_branch(2, 0)}, {{1.0}, scalar_branch(2, 1)}}};
}

// (x)_i V applied to the block chain of the fixed-point state
MpsChain prepared(const FixedPointState& st, const Matrix& v) {
  MpsChain c = st.block_chain();
  std::vector<Segment> segs;
  for (const auto& s : c.segments()) segs.push_back({apply_isometry(v, s.tensor), s.repeat});
  return MpsChain::from_segments(std::move(segs), Boundary::Periodic);
}

}  // namespace

TEST_CASE("pair_state examples") {
  Vector w = pair_state(Matrix::Identity(3, 3) / 3.0);
  CHECK(std::abs(w.norm() - 1.0) < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(w(i * 3 + i) - 1.0 / std::sqrt(3.0)) < 1e-12);

  Matrix r = Matrix::Zero(2, 2);
  r(0, 0) = 1.0;
  Vector p = pair_state(r);
  CHECK(std::abs(std::abs(p(0)) - 1.0) < 1e-12);

  auto rep = spectral_analyze(canonical_gauge(fixtures::aklt()));
  Vector s = pair_state(rep.rho);
  CHECK(std::abs(std::abs(s(0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(std::abs(s(3)) - 1.0 / std::sqrt(2.0)) < 1e-12);

  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(pair_state(bad), Error);
}

TEST_CASE("property: pair states are normalized with marginal rho") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    int D = 2 + trial % 3;
    SiteTensor a = canonical_gauge(oracle::gaussian_tensor(2, D, rng));
    auto rep = spectral_analyze(a);
    Vector w = pair_state(rep.rho);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);
    Matrix red = reduced_second_leg(w, D);
    CHECK(std::abs(red.trace() - 1.0) < 1e-12);
    CHECK((red - rep.rho).norm() < 1e-10);
    // general gauge gives a normalized pair too
    auto raw = spectral_analyze(oracle::gaussian_tensor(2, D, rng));
    CHECK(std::abs(pair_state(raw.rho, raw.left_fixed).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("beta and alpha") {
  CanonicalDecomposition one{{{{1.0}, fixtures::aklt()}}};
  auto b1 = beta_coefficients(one, 7);
  CHECK(std::abs(b1.beta[0] - 1.0) < 1e-15);
  CHECK(std::abs(b1.alpha[0] - 1.0) < 1e-15);

  auto g = beta_coefficients(ghz_decomposition(), 12);
  CHECK(std::abs(g.alpha[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(g.alpha[1] - 1.0 / std::sqrt(2.0)) < 1e-15);

  CanonicalDecomposition two_mu{{{{1.0, 0.5}, fixtures::aklt()}}};
  CHECK(beta_coefficients(two_mu, 10).beta[0] == cplx(1.0009765625));

  CanonicalDecomposition toy{{{{1.0}, scalar_branch(2, 0)}, {{0.9}, scalar_branch(2, 1)}}};
  auto t = beta_coefficients(toy, 8);
  CHECK(std::abs(t.alpha[1] / t.alpha[0] - std::pow(0.9, 8)) < 1e-14);
  // decaying branch weight falls with N
  double prev = 1.0;
  for (std::uint64_t n : {2u, 4u, 8u, 16u, 32u}) {
    double a = std::abs(beta_coefficients(toy, n).alpha[1]);
    CHECK(a < prev);
    prev = a;
  }
  // negative weights give exact integer powers
  CanonicalDecomposition neg{{{{-1.0}, scalar_branch(2, 0)}, {{1.0}, scalar_branch(2, 1)}}};
  CHECK(beta_coefficients(neg, 3).beta[0] == cplx(-1.0));
}

TEST_CASE("normal tensor: one branch equals the product of pair states") {
  SiteTensor a = canonical_gauge(fixtures::g_family(0.3));
  CanonicalDecomposition one{{{{1.0}, a}}};
  auto st = nonnormal_fixed_point(one, 12, 3);
  auto rep = spectral_analyze(a);
  CHECK(st.bonds == 4);
  CHECK((st.pair(0, 0) - pair_state(rep.rho, rep.left_fixed)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(st.alpha[0] - 1.0) < 1e-14);
}

TEST_CASE("block chain is the tensor product of pairs") {
  std::mt19937_64 rng(9);
  auto rep = spectral_analyze(oracle::gaussian_tensor(2, 2, rng));
  Vector w = pair_state(rep.rho, rep.left_fixed);
  auto st = FixedPointState::uniform(w, 2, 3);
  Vector dense = mps_to_dense(st.block_chain());
  // registers in block order: (a0 b0)(a1 b1)(a2 b2), pairs on (b0,a1), (b1,a2), (b2,a0)
  for (int idx = 0; idx < 64; ++idx) {
    int a0 = (idx >> 5) & 1, b0 = (idx >> 4) & 1, a1 = (idx >> 3) & 1, b1 = (idx >> 2) & 1, a2 = (idx >> 1) & 1,
        b2 = idx & 1;
    cplx expect = w(b0 * 2 + a1) * w(b1 * 2 + a2) * w(b2 * 2 + a0);
    CHECK(std::abs(dense(idx) - expect) < 1e-12);
  }
}

TEST_CASE("GHZ through the branch path is exact") {
  auto dec = ghz_decomposition();
  CHECK((dec.reduced_tensor()[0] - fixtures::ghz()[0]).norm() < 1e-15);
  for (std::uint64_t n : {4u, 8u, 12u}) {
    for (int q : {1, 2, 4}) {
      auto st = nonnormal_fixed_point(dec, n, q);
      CHECK(st.branch_count() == 2);
      PolarSplit ps = polar_split(block(dec.reduced_tensor(), q));
      MpsChain target = MpsChain::uniform(dec.full_tensor(), n);
      CHECK(error_metric(prepared(st, ps.full_isometry()), MpsChain::uniform(block(dec.full_tensor(), q), n / q)) <
            1e-12);
      if (q == 1 && n == 4) {
        Vector ghz = Vector::Zero(16);
        ghz(0) = ghz(15) = 1.0 / std::sqrt(2.0);
        CHECK(oracle::dense_error(mps_to_dense(prepared(st, ps.full_isometry())), ghz) < 1e-12);
        CHECK(oracle::dense_error(mps_to_dense(target), ghz) < 1e-12);
      }
    }
  }
}

TEST_CASE("branch validation") {
  CanonicalDecomposition same{{{{1.0}, scalar_branch(2, 0)}, {{1.0}, scalar_branch(2, 0)}}};
  bool overlap = false;
  try {
    nonnormal_fixed_point(same, 4, 1);
  } catch (const Error& e) {
    overlap = e.code() == ErrorCode::BranchOverlap;
  }
  CHECK(overlap);

  CanonicalDecomposition small{{{{0.5}, scalar_branch(2, 0)}}};
  CHECK_THROWS_AS(small.validate(), Error);
  CanonicalDecomposition nonnormal{{{{1.0}, fixtures::ghz()}}};
  CHECK_THROWS_AS(nonnormal.validate(), Error);
}
