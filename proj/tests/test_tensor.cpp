#include <cmath>
#include <random>

#include "doctest.h"
#include "mpsrg/error.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/tensor.hpp"
#include "oracles.hpp"

using namespace mpsrg;

namespace {

bool throws_code(ErrorCode code, auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("aklt spectrum") {
  auto rep = spectral_analyze(fixtures::aklt());
  REQUIRE(rep.eigenvalues.size() == 4);
  CHECK(std::abs(rep.eigenvalues[0] - 1.0) < 1e-12);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(std::abs(rep.eigenvalues[k]) - 1.0 / 3.0) < 1e-12);
  CHECK(rep.xi == doctest::Approx(1.0 / std::log(3.0)).epsilon(1e-10));
  CHECK(rep.is_normal);
  CHECK(rep.degeneracy_b == 1);
  // AKLT is already in the left-canonical gauge with rho = 1/2
  CHECK((rep.rho - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(std::abs(rep.lambda1 - 1.0) < 1e-12);
}

TEST_CASE("g family spectrum has xi = 1/(2 artanh g)") {
  for (double xi : {2.0, 4.0, 16.0}) {
    double g = fixtures::g_for_xi(xi);
    auto rep = spectral_analyze(fixtures::g_family(g));
    CHECK(std::abs(rep.lambda1 - (1.0 + g)) < 1e-12);
    CHECK(rep.xi == doctest::Approx(xi).epsilon(1e-9));
    CHECK(rep.is_normal);
  }
}

TEST_CASE("ghz is not normal with two branches") {
  auto rep = spectral_analyze(fixtures::ghz());
  CHECK_FALSE(rep.is_normal);
  CHECK(rep.degeneracy_b == 2);
  CHECK(throws_code(ErrorCode::NotNormal, [] { canonical_gauge(fixtures::ghz()); }));
}

TEST_CASE("spectral analysis rejects non-square bonds") {
  SiteTensor a(2, 2, 3);
  a[0](0, 0) = 1;
  CHECK(throws_code(ErrorCode::NonSquareBond, [&] { spectral_analyze(a); }));
}

TEST_CASE("property: fixed points of random normal tensors") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    int d = 2 + trial % 3, D = 2 + trial % 4;
    SiteTensor a = oracle::gaussian_tensor(d, D, rng);
    auto t = transfer_matrix(a);
    auto rep = spectral_analyze(t);
    REQUIRE(rep.is_normal);
    CHECK(std::abs(rep.lambda1) == doctest::Approx(oracle::power_iteration_lambda(a)).epsilon(1e-8));
    CHECK(std::abs(rep.rho.trace() - 1.0) < 1e-12);
    // E(rho) = lambda rho in the (bra,ket) orientation: sum conj(A) rho A^T
    Matrix img = Matrix::Zero(D, D), limg = Matrix::Zero(D, D);
    for (int i = 0; i < d; ++i) {
      img += a[i].conjugate() * rep.rho * a[i].transpose();
      limg += a[i].adjoint() * rep.left_fixed * a[i];
    }
    CHECK((img - rep.lambda1 * rep.rho).norm() < 1e-9 * std::abs(rep.lambda1));
    CHECK((limg - rep.lambda1 * rep.left_fixed).norm() < 1e-9 * std::abs(rep.lambda1) * rep.left_fixed.norm());
    CHECK(std::abs(rep.left_fixed.cwiseProduct(rep.rho).sum() - 1.0) < 1e-10);

    // gauge gives a left-canonical tensor with the same normalized spectrum
    SiteTensor g = canonical_gauge(a);
    Matrix id = Matrix::Zero(D, D);
    for (int i = 0; i < d; ++i) id += g[i].adjoint() * g[i];
    CHECK((id - Matrix::Identity(D, D)).norm() < 1e-9);
    auto grep = spectral_analyze(g);
    CHECK(std::abs(grep.lambda1 - 1.0) < 1e-9);
    for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k)
      CHECK(std::abs(std::abs(grep.eigenvalues[k]) - std::abs(rep.eigenvalues[k])) < 1e-8);
    CHECK((grep.left_fixed - Matrix::Identity(D, D) / double(D) * grep.left_fixed.trace().real()).norm() < 1e-8);
  }
}

TEST_CASE("canonical gauge leaves a left-canonical tensor unchanged") {
  std::mt19937_64 rng(7);
  SiteTensor a = fixtures::haar_isometric(3, 3, rng);
  SiteTensor g = canonical_gauge(a);
  // compare up to a global phase
  cplx ph = g[0](0, 0) / a[0](0, 0);
  CHECK(std::abs(std::abs(ph) - 1.0) < 1e-9);
  CHECK(g.approx_equal(a.scaled(ph), 1e-9));
}

TEST_CASE("blocking composes transfer matrices") {
  std::mt19937_64 rng(99);
  SiteTensor a = oracle::gaussian_tensor(2, 3, rng);
  Matrix e = transfer_matrix(a).matrix;
  for (int q = 1; q <= 5; ++q) {
    SiteTensor b = block(a, q);
    CHECK(b.phys_dim() == (1 << q));
    Matrix eq = Matrix::Identity(9, 9);
    for (int k = 0; k < q; ++k) eq = eq * e;
    CHECK((transfer_matrix(b).matrix - eq).norm() < 1e-9 * eq.norm());
  }
  // index order: first site most significant
  SiteTensor b = block(a, 2);
  CHECK((b[1 * 2 + 0] - a[1] * a[0]).norm() < 1e-12);
  CHECK(throws_code(ErrorCode::SizeOverflow, [&] { block(a, 40); }));
}

TEST_CASE("overlaps agree with brute-force amplitudes") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3 + trial % 4;
    SiteTensor a = oracle::gaussian_tensor(2, 2, rng);
    SiteTensor b = oracle::gaussian_tensor(2, 2, rng);
    std::vector<SiteTensor> sa(n, a), sb;
    for (int i = 0; i < n; ++i) sb.push_back(oracle::gaussian_tensor(2, 2, rng));
    Vector da = oracle::dense_periodic(sa), db = oracle::dense_periodic(sb);
    auto ov = mps_overlap(MpsChain::uniform(a, n), MpsChain::periodic(sb));
    CHECK(std::abs(ov.overlap - da.dot(db) / (da.norm() * db.norm())) < 1e-10);
    CHECK(std::abs(ov.raw.value() - da.dot(db)) < 1e-9 * da.norm() * db.norm());
    CHECK((mps_to_dense(MpsChain::uniform(a, n)) - da).norm() < 1e-10 * da.norm());

    Vector l = Vector::Random(2), r = Vector::Random(2);
    Vector oa = oracle::dense_open(sa, l, r), ob = oracle::dense_open(sb, r, l);
    auto oov = mps_overlap(MpsChain::open(sa, l, r), MpsChain::open(sb, r, l));
    CHECK(std::abs(oov.overlap - oa.dot(ob) / (oa.norm() * ob.norm())) < 1e-10);
    CHECK((mps_to_dense(MpsChain::open(sa, l, r)) - oa).norm() < 1e-10 * oa.norm());
  }
}

TEST_CASE("property: error metric is gauge, phase and scale invariant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    SiteTensor a = oracle::gaussian_tensor(2, 3, rng);
    SiteTensor b = oracle::gaussian_tensor(2, 3, rng);
    Matrix x = Matrix::Random(3, 3) + 3.0 * Matrix::Identity(3, 3);
    Matrix xi = x.inverse();
    std::vector<Matrix> gm;
    for (int i = 0; i < 2; ++i) gm.push_back(x * a[i] * xi);
    SiteTensor ag(gm);
    const std::uint64_t n = 7;
    double e0 = error_metric(MpsChain::uniform(a, n), MpsChain::uniform(b, n));
    double e1 = error_metric(MpsChain::uniform(ag.scaled(cplx(0, 2.5)), n), MpsChain::uniform(b, n));
    CHECK(e0 == doctest::Approx(e1).epsilon(1e-9));
    CHECK(e0 >= -1e-12);
    CHECK(e0 <= 1.0 + 1e-12);
    CHECK(std::abs(error_metric(MpsChain::uniform(a, n), MpsChain::uniform(ag, n))) < 1e-12);
  }
}

TEST_CASE("long uniform chains use repeated squaring") {
  SiteTensor a = canonical_gauge(fixtures::g_family(fixtures::g_for_xi(4.0)));
  auto c = MpsChain::uniform(a, 1000000);
  auto ov = mps_overlap(c, c);
  CHECK(std::abs(ov.overlap - 1.0) < 1e-12);
  // norm^2 = Tr E^N -> 1 for a gauge-fixed normal tensor
  CHECK(std::abs(ov.log_norm1) < 1e-9);
  // unnormalized tensor of large lambda1 does not overflow
  auto raw = MpsChain::uniform(fixtures::g_family(0.5), 1000000);
  CHECK(std::abs(mps_overlap(raw, raw).overlap - 1.0) < 1e-9);
}

TEST_CASE("segments and expanded chains give the same overlap") {
  std::mt19937_64 rng(11);
  SiteTensor a = oracle::gaussian_tensor(2, 2, rng), b = oracle::gaussian_tensor(2, 2, rng);
  auto seg = MpsChain::from_segments({{a, 3}, {b, 2}, {a, 4}}, Boundary::Periodic);
  std::vector<SiteTensor> ex = {a, a, a, b, b, a, a, a, a};
  auto other = MpsChain::uniform(b, 9);
  CHECK(std::abs(mps_overlap(seg, other).overlap - mps_overlap(MpsChain::periodic(ex), other).overlap) < 1e-12);
  CHECK(seg.size() == 9);
  CHECK(seg.site(3).approx_equal(b, 0));
}

TEST_CASE("property: tensor-core invariants with pinned tolerances") {
  std::mt19937_64 rng(20261016);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 2 + trial % 3, D = 2 + trial % 2;
    SiteTensor raw = oracle::gaussian_tensor(d, D, rng);
    SiteTensor a = raw.scaled(1.0 / std::sqrt(std::abs(spectral_analyze(raw).lambda1)));
    Matrix e = transfer_matrix(a).matrix;
    Matrix eq = Matrix::Identity(e.rows(), e.cols());
    for (int q = 1; q <= 4; ++q) {
      eq = eq * e;
      CHECK((transfer_matrix(block(a, q)).matrix - eq).cwiseAbs().maxCoeff() < 1e-12);
    }

    SiteTensor g = canonical_gauge(raw);
    Matrix id = Matrix::Zero(D, D);
    for (int i = 0; i < d; ++i) id += g[i].adjoint() * g[i];
    CHECK((id - Matrix::Identity(D, D)).norm() < 1e-10);
    auto rep = spectral_analyze(g);
    CHECK((rep.rho - rep.rho.adjoint()).norm() < 1e-12);
    CHECK(rep.rho_min_eig > 0);
    CHECK(std::abs(rep.rho.trace() - 1.0) < 1e-10);

    for (std::uint64_t n : {4u, 8u}) {
      auto x = MpsChain::uniform(raw, n), y = MpsChain::uniform(g, n);
      CHECK(error_metric(x, y) < 1e-10);
      auto self = mps_overlap(x, x);
      CHECK(std::abs(self.raw.phase - 1.0) < 1e-12);
      auto other = MpsChain::uniform(oracle::gaussian_tensor(d, D, rng), n);
      CHECK(std::abs(mps_overlap(x, other).overlap) <= 1.0 + 1e-10);
    }
  }
}
