#include <cmath>
#include <random>

#include "doctest.h"
#include "mpsrg/compile.hpp"
#include "mpsrg/error.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/simulate.hpp"
#include "oracles.hpp"

using namespace mpsrg;

namespace {

double fidelity_deficit(const Vector& a, const Vector& b) { return 1.0 - std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm()); }

CompiledProgram compile_g(Scheme s, std::uint64_t n, int q, double xi = 4.0) {
  CompileOptions o;
  o.scheme = s;
  o.n = n;
  o.q = q;
  return compile_normal(fixtures::g_family(fixtures::g_for_xi(xi)), o);
}

CanonicalDecomposition ghz_decomposition() {
  SiteTensor a(2, 1, 1), b(2, 1, 1);
  a[0](0, 0) = 1.0;
  b[1](0, 0) = 1.0;
  return {{{{1.0}, a}, {{1.0}, b}}};
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("t_iso values") {
  CHECK(t_iso(1, 2) == 2);
  CHECK(t_iso(2, 3) == 10);
  CHECK(t_iso(2, 4) == 26);
  CHECK(t_iso(0, 2) == 1);
  CHECK(t_iso(2, 2) == 3);
  CHECK(t_iso(0, 0) == 0);
}

TEST_CASE("cnot depth formulas") {
  CHECK(cnot_depth(Scheme::Sequential, 4, 0, 2, 2).cnot_depth == 5);
  CHECK(cnot_depth(Scheme::Sequential, 1000, 0, 2, 2).cnot_depth == 1997);
  CHECK(cnot_depth(Scheme::SequentialRG, 1000, 11, 2, 2).cnot_depth == 13 * 9 + 1);
  // power-of-two trees follow pair + injectivity layer + sum_m [26 + 3 max(0, 2^m - 4)]
  for (int k = 1; k <= 6; ++k) {
    std::uint64_t expect = 1 + 3;
    for (int m = 2; m <= k; ++m) expect += 26 + 3 * std::max(0, (1 << m) - 4);
    CHECK(cnot_depth(Scheme::TreeRG, 1 << 20, 1 << k, 2, 2).cnot_depth == expect);
    std::uint64_t measured = 1 + 3 + 26 * static_cast<std::uint64_t>(k - 1);
    CHECK(cnot_depth(Scheme::TreeRGMeasured, 1 << 20, 1 << k, 2, 2).cnot_depth == measured);
  }
  // level m = 2 has no swap contribution
  auto r = cnot_depth(Scheme::TreeRG, 64, 4, 2, 2);
  CHECK(r.cnot_depth == 1 + 26 + 3);
  CHECK(code_of([] { cnot_depth(Scheme::TreeRG, 64, 4, 3, 2); }) == ErrorCode::UnsupportedScheme);
}

TEST_CASE("property: depth monotonicity") {
  std::uint64_t prev = 0;
  for (std::uint64_t n = 2; n < 400; n += 7) {
    auto c = cnot_depth(Scheme::Sequential, n, 0, 2, 2).cnot_depth;
    CHECK(c >= prev);
    prev = c;
  }
  prev = 0;
  for (int q = 2; q < 64; ++q) {
    auto c = cnot_depth(Scheme::SequentialRG, 1 << 20, q, 2, 2).cnot_depth;
    CHECK(c >= prev);
    prev = c;
    for (int d : {2, 4})
      for (int D : {1, 2, 4}) {
        if (D > d) continue;
        CHECK(cnot_depth(Scheme::TreeRGMeasured, 1 << 20, q, d, D).cnot_depth <=
              cnot_depth(Scheme::TreeRG, 1 << 20, q, d, D).cnot_depth);
      }
  }
  CHECK(code_of([] { cnot_depth(Scheme::TreeRG, 64, 4, 2, 4); }) == ErrorCode::InjectivityImpossible);
}

TEST_CASE("embed_isometry") {
  auto id = embed_isometry(Matrix::Identity(3, 3));
  CHECK((id.unitary - Matrix::Identity(3, 3)).norm() < 1e-15);
  Matrix col = Matrix::Zero(2, 1);
  col(0, 0) = 1.0;
  auto e = embed_isometry(col);
  CHECK((e.unitary - Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(e.ancilla_dim == 2);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix v = haar_unitary(4, rng).leftCols(2);
    auto u = embed_isometry(v);
    CHECK(isometry_defect(u.unitary) < 1e-12);
    for (int i = 0; i < 2; ++i) CHECK((u.unitary.col(i * 2) - v.col(i)).norm() < 1e-12);
  }
  CHECK(code_of([] { embed_isometry(Matrix::Identity(3, 2)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("isometry gate on a register window") {
  std::mt19937_64 rng(2);
  Matrix v = haar_unitary(8, rng).leftCols(4);  // (a,b) -> (x, y, z)
  std::vector<int> dims(5, 2);
  Gate g = make_isometry_gate(v, {Leg{2, {2}}, Leg{2, {4}}}, {Leg{2, {2}}, Leg{2, {3}}, Leg{2, {4}}}, dims);
  CHECK(g.support == std::vector<int>{2, 3, 4});
  CHECK(g.ancillas == std::vector<int>{3});
  CHECK(isometry_defect(g.unitary) < 1e-12);
  // input (a,b) sits at window index a*4 + b
  for (int x = 0; x < 4; ++x) CHECK((g.unitary.col((x / 2) * 4 + x % 2) - v.col(x)).norm() < 1e-12);
}

TEST_CASE("block sizes and remainder policy") {
  CHECK(block_sizes(12, 4) == std::vector<int>{4, 4, 4});
  CHECK(block_sizes(14, 4) == std::vector<int>{4, 4, 6});
  CHECK(code_of([] { block_sizes(14, 4, RemainderPolicy::Strict); }) == ErrorCode::NotDivisible);
  CHECK(code_of([] { block_sizes(3, 4); }) == ErrorCode::NotDivisible);
}

TEST_CASE("compiled circuits prepare the approximate chain") {
  for (Scheme s : {Scheme::SequentialRG, Scheme::TreeRG, Scheme::TreeRGMeasured}) {
    CAPTURE(to_string(s));
    for (auto [n, q] : std::vector<std::pair<int, int>>{{16, 4}, {12, 3}, {10, 4}, {10, 5}, {6, 6}, {12, 2}}) {
      CAPTURE(n);
      CAPTURE(q);
      auto prog = compile_g(s, n, q);
      Vector psi = simulate_circuit(prog.circuit);
      CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
      CHECK(fidelity_deficit(psi, mps_to_dense(prog.prepared())) < 1e-10);
      // layer 0 holds only the pair preparations
      for (const auto& g : prog.circuit.layers.front()) CHECK(g.kind == GateKind::PairPrep);
      if (n % q == 0)
        CHECK(prog.circuit.depth() <= cnot_depth(s, n, q, 2, 2).layer_depth);
    }
  }
}

TEST_CASE("AKLT circuits at N = 8, q = 4 match the analytic chain") {
  for (Scheme s : {Scheme::SequentialRG, Scheme::TreeRG}) {
    CompileOptions o;
    o.scheme = s;
    o.n = 8;
    o.q = 4;
    auto prog = compile_normal(fixtures::aklt(), o);
    Vector psi = simulate_circuit(prog.circuit);
    SiteTensor g = canonical_gauge(fixtures::aklt());
    auto rep = spectral_analyze(g);
    SiteTensor bt = approx_block_tensor(polar_split(block(g, 4)), rep.rho, rep.left_fixed);
    CHECK(fidelity_deficit(psi, mps_to_dense(MpsChain::uniform(bt, 2))) < 1e-10);
  }
}

TEST_CASE("measured tree has the same isometries and no swaps") {
  auto routed = compile_g(Scheme::TreeRG, 16, 8);
  auto measured = compile_g(Scheme::TreeRGMeasured, 16, 8);
  CHECK(routed.circuit.count(GateKind::Swap) > 0);
  CHECK(measured.circuit.count(GateKind::Swap) == 0);
  CHECK(measured.circuit.nonlocal_gates() > 0);
  CHECK_FALSE(measured.circuit.meta.notes.empty());
  auto collect = [](const CircuitIR& c) {
    std::vector<Matrix> u;
    for (const auto& l : c.layers)
      for (const auto& g : l)
        if (g.kind == GateKind::Isometry) u.push_back(g.unitary);
    return u;
  };
  auto a = collect(routed.circuit), b = collect(measured.circuit);
  REQUIRE(a.size() == b.size());
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b) found = found || (x.rows() == y.rows() && (x - y).norm() < 1e-14);
    CHECK(found);
  }
  CHECK(measured.circuit.depth() < routed.circuit.depth());
}

TEST_CASE("sequential staircase prepares the exact periodic state") {
  for (int n : {4, 7, 10}) {
    auto prog = compile_g(Scheme::Sequential, n, 0);
    Vector psi = simulate_circuit(prog.circuit);
    CHECK(fidelity_deficit(psi, mps_to_dense(prog.target)) < 1e-10);
    CHECK(prog.circuit.count(GateKind::Isometry) == static_cast<std::size_t>(n - 1));
  }
}

TEST_CASE("GHZ through the circuit path") {
  for (Scheme s : {Scheme::SequentialRG, Scheme::TreeRG, Scheme::TreeRGMeasured, Scheme::Sequential}) {
    for (int n : {4, 8, 12}) {
      CompileOptions o;
      o.scheme = s;
      o.n = n;
      o.q = 2;
      auto prog = compile_branches(ghz_decomposition(), o);
      Vector psi = simulate_circuit(prog.circuit);
      Vector ghz = Vector::Zero(psi.size());
      ghz(0) = ghz(psi.size() - 1) = 1.0 / std::sqrt(2.0);
      CHECK(fidelity_deficit(psi, ghz) < 1e-10);
    }
  }
}

TEST_CASE("ancilla check catches a corrupted input") {
  auto prog = compile_g(Scheme::SequentialRG, 8, 4);
  // drop the pair preparations: the isometries then see |0> pairs, still legal;
  // instead put a swap into the ancilla register before the first isometry
  CircuitIR c = prog.circuit;
  Gate x;
  x.kind = GateKind::Isometry;
  x.support = {1};
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  x.unitary = flip;
  x.input_basis = {0, 1};
  c.layers.insert(c.layers.begin(), std::vector<Gate>{x});
  CHECK(code_of([&] { simulate_circuit(c); }) == ErrorCode::AncillaNotZero);
}

TEST_CASE("register model needs D <= d") {
  std::mt19937_64 rng(4);
  SiteTensor a = oracle::gaussian_tensor(2, 3, rng);
  CompileOptions o;
  o.n = 12;
  o.q = 6;
  CHECK(code_of([&] { compile_normal(a, o); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("AKLT N = 16, q = 4: prepared chain is the B~ chain") {
  // 32 qubits at d = 4: compared through mps_overlap instead of the statevector
  SiteTensor g = canonical_gauge(fixtures::aklt());
  auto rep = spectral_analyze(g);
  SiteTensor bt = approx_block_tensor(polar_split(block(g, 4)), rep.rho, rep.left_fixed);
  for (Scheme s : {Scheme::SequentialRG, Scheme::TreeRG, Scheme::TreeRGMeasured}) {
    CompileOptions o;
    o.scheme = s;
    o.n = 16;
    o.q = 4;
    auto prog = compile_normal(fixtures::aklt(), o);
    CHECK(std::abs(error_metric(prog.prepared(), MpsChain::uniform(bt, 4))) < 1e-10);
  }
  CHECK(tree_rg_decompose_span(g, 8).depth() == 3);
}
