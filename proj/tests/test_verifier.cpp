#include <cmath>
#include <random>

#include "doctest.h"
#include "mpsrg/compile.hpp"
#include "mpsrg/error.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/polar.hpp"
#include "mpsrg/simulate.hpp"
#include "mpsrg/verifier.hpp"
#include "oracles.hpp"

using namespace mpsrg;

namespace {

std::vector<int> range(int lo, int hi, int step = 1) {
  std::vector<int> v;
  for (int q = lo; q <= hi; q += step) v.push_back(q);
  return v;
}

SiteTensor random_normal(std::mt19937_64& rng, int d = 2, int D = 2) {
  for (;;) {
    SiteTensor a = oracle::gaussian_tensor(d, D, rng);
    SpectralReport r = spectral_analyze(a);
    if (r.is_normal) return a;
  }
}

// error between the blocked chain and the B~ chain with blocks materialized
double explicit_error(const SiteTensor& a, int q, std::uint64_t m) {
  SiteTensor g = canonical_gauge(a);
  SpectralReport rep = spectral_analyze(g);
  SiteTensor b = block(g, q);
  SiteTensor bt = approx_block_tensor(polar_split(b), rep.rho, rep.left_fixed);
  return error_metric(MpsChain::uniform(b, m), MpsChain::uniform(bt, m));
}

}  // namespace

TEST_CASE("fit_decay recovers synthetic rates") {
  std::vector<double> x = {1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(0.3 * std::exp(-1.7 * v));
  ErrorFit f = fit_decay(x, y);
  CHECK(f.points == 5);
  CHECK(std::abs(f.rate - 1.7) < 1e-12);
  CHECK(std::abs(f.prefactor - 0.3) < 1e-12);
  CHECK(f.residual < 1e-12);
  y.back() = 1e-15;  // below the floor: dropped
  y[3] = 0.0;
  ErrorFit g = fit_decay(x, y);
  CHECK(g.points == 3);
  CHECK(std::abs(g.rate - 1.7) < 1e-12);
  CHECK_FALSE(fit_decay(std::vector<double>{1}, std::vector<double>{0.1}).valid());
}

TEST_CASE("analytic block error matches materialized blocks") {
  std::mt19937_64 rng(21);
  std::vector<SiteTensor> cases = {fixtures::aklt(), fixtures::g_family(fixtures::g_for_xi(2.0)),
                                   random_normal(rng), random_normal(rng), random_normal(rng, 3, 2)};
  for (const auto& a : cases) {
    AnalyticModel model(a);
    for (int q = 2; q <= 5; ++q) {
      if (std::pow(a.phys_dim(), q) > 1024) break;
      for (std::uint64_t m : {3u, 40u}) {
        const double want = explicit_error(a, q, m);
        CHECK(std::abs(model.block_error(model.positive_part(q, Scheme::SequentialRG), m) - want) < 1e-12);
        CHECK(std::abs(model.block_error(model.positive_part(q, Scheme::TreeRG), m) - want) < 1e-12);
      }
    }
  }
}

TEST_CASE("tree and sequential routes agree") {
  for (const auto& a : {fixtures::aklt(), fixtures::g_family(fixtures::g_for_xi(4.0))}) {
    AnalyticModel model(a);
    for (int q = 2; q <= 16; ++q) {
      const double s = model.block_error(model.positive_part(q, Scheme::SequentialRG), 200);
      const double t = model.block_error(model.positive_part(q, Scheme::TreeRG), 200);
      CHECK(std::abs(s - t) <= 1e-12 + 1e-8 * s);
    }
  }
  CHECK_THROWS_AS(AnalyticModel(fixtures::aklt()).positive_part(4, Scheme::Sequential), Error);
}

TEST_CASE("analytic error agrees with the statevector") {
  struct Case {
    SiteTensor a;
    std::uint64_t n;
    int q;
  };
  std::vector<Case> cases = {{fixtures::aklt(), 8, 4}, {fixtures::g_family(fixtures::g_for_xi(4.0)), 16, 4},
                             {fixtures::g_family(fixtures::g_for_xi(1.0)), 12, 3},
                             {fixtures::g_family(fixtures::g_for_xi(4.0)), 16, 8}};
  for (const auto& c : cases)
    for (Scheme s : {Scheme::SequentialRG, Scheme::TreeRG, Scheme::TreeRGMeasured}) {
      CompileOptions o;
      o.scheme = s;
      o.n = c.n;
      o.q = c.q;
      CompiledProgram prog = compile_normal(c.a, o);
      Vector psi = simulate_circuit(prog.circuit), target = mps_to_dense(prog.target);
      const double sv = 1.0 - std::abs(target.dot(psi)) / (target.norm() * psi.norm());
      AnalyticModel model(c.a);
      const double an = model.block_error(model.positive_part(c.q, s), c.n / c.q);
      CHECK(std::abs(sv - an) < 1e-8);
    }
}

TEST_CASE("error per block decays monotonically for normal fixtures") {
  auto qs = range(2, 14);
  for (const auto& a : {fixtures::aklt(), fixtures::g_family(fixtures::g_for_xi(4.0))}) {
    ErrorScan scan = error_scan(a, qs);
    CHECK(scan.monotone());
    for (const auto& r : scan.rows) {
      CHECK(r.epsilon >= 0.0);
      CHECK(r.epsilon <= 1.0);
      CHECK(r.m == 200);
    }
  }
}

TEST_CASE("AKLT scan: slope and bound") {
  ErrorScan scan = error_scan(fixtures::aklt(), range(2, 12));
  CHECK(std::abs(scan.rows.front().xi - 1 / std::log(3.0)) < 1e-9);
  CHECK(scan.fit.rate > 1.5);
  CHECK(scan.fit.rate < 2.5);
  CHECK(std::abs(scan.fit_q.rate - scan.fit.rate / scan.rows.front().xi) < 1e-9);
  BoundCheck bc = bound_check(scan, 0.45);
  CHECK(bc.passed);
  CHECK(bc.margin > 0);
}

TEST_CASE("g-family scans in the decaying regime") {
  std::vector<double> rates;
  for (double xi : {4.0, 16.0}) {
    auto qs = xi < 8 ? range(8, 32) : range(32, 128, 4);
    ErrorScan scan = error_scan(fixtures::g_family(fixtures::g_for_xi(xi)), qs);
    CHECK(std::abs(scan.rows.front().xi - xi) < 1e-6);
    CHECK(scan.fit.rate > 1.5);
    CHECK(scan.fit.rate < 2.5);
    CHECK(bound_check(scan, 0.45).passed);
    rates.push_back(scan.fit.rate);
  }
  CHECK(std::abs(rates[0] - rates[1]) < 0.2 * std::min(rates[0], rates[1]));
}

TEST_CASE("bound check on random normal tensors and a negative control") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    SiteTensor a = random_normal(rng);
    const double xi = spectral_analyze(a).xi;
    const int hi = std::max(12, static_cast<int>(8 * xi));
    ErrorScan scan = error_scan(a, range(std::max(2, static_cast<int>(2 * xi)), hi));
    CAPTURE(xi);
    CHECK(scan.monotone(1e-15));
    CHECK(bound_check(scan, 0.45).passed);
  }
  ErrorScan flat;
  for (int q = 2; q < 10; ++q) flat.rows.push_back({q, 1.0, 100, 0.5, 0.005, "sequential-rg", 0});
  CHECK_FALSE(bound_check(flat, 0.45).passed);
  CHECK_FALSE(bound_check(flat, 0.6).passed);
}

TEST_CASE("GHZ scan is exact") {
  SiteTensor a(2, 1, 1), b(2, 1, 1);
  a[0](0, 0) = 1.0;
  b[1](0, 0) = 1.0;
  CanonicalDecomposition ghz{{{{1.0}, a}, {{1.0}, b}}};
  for (Scheme s : {Scheme::SequentialRG, Scheme::TreeRG}) {
    for (std::uint64_t m : {2u, 4u, 6u, 200u}) {
      ErrorScanOptions o;
      o.scheme = s;
      o.m = m;
      for (const auto& r : error_scan(ghz, range(2, 4), o).rows) CHECK(r.epsilon < 1e-10);
    }
  }
}

TEST_CASE("depth scan ordering and plateaus") {
  DepthScanOptions o;
  o.ns = log_grid(1000, 1000000, 10);
  CHECK(o.ns.front() == 1000);
  CHECK(o.ns.back() == 1000000);
  DepthScan scan = depth_scan(fixtures::g_family(fixtures::g_for_xi(4.0)), o);
  int prev_q = 0, repeats = 0;
  for (const auto& r : scan.rows) {
    CHECK(r.q >= prev_q);
    repeats += r.q == prev_q;
    prev_q = r.q;
    CHECK(r.epsilon <= 1 - std::sqrt(0.9));
    CHECK(r.reports[0].cnot_depth > 5 * r.reports[1].cnot_depth);
    CHECK(r.reports[1].cnot_depth >= r.reports[2].cnot_depth);
    CHECK(r.reports[2].cnot_depth >= r.reports[3].cnot_depth);
  }
  CHECK(repeats > 0);
  const double last = static_cast<double>(scan.rows.back().reports[3].cnot_depth);
  CHECK(last > 50);
  CHECK(last < 200);
}

TEST_CASE("ensemble samples are left-canonical and deterministic") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 20; ++k) {
    SiteTensor a = fixtures::haar_isometric(2, 2, rng);
    Matrix s = Matrix::Zero(2, 2);
    for (const auto& m : a.matrices()) s += m.adjoint() * m;
    CHECK((s - Matrix::Identity(2, 2)).norm() < 1e-12);
  }
  EnsembleOptions o;
  o.count = 4;
  o.n = 48;
  o.qs = {3, 4, 6};
  EnsembleResult x = random_mps_ensemble(o);
  o.jobs = 3;
  EnsembleResult y = random_mps_ensemble(o);
  REQUIRE(x.samples.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(x.samples[i].xi == y.samples[i].xi);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(x.samples[i].scan.rows[k].epsilon == y.samples[i].scan.rows[k].epsilon);
      CHECK(x.samples[i].scan.rows[k].sample_id == static_cast<int>(i));
    }
  }
  CHECK(x.per_q.median == y.per_q.median);
  CHECK(x.per_q.q1 <= x.per_q.median);
  CHECK(x.per_q.median <= x.per_q.q3);
}

TEST_CASE("rate summary quantiles") {
  RateSummary s = summarize_rates({4, 1, 3, 2, 5, std::nan("")});
  CHECK(s.median == 3);
  CHECK(s.q1 == 2);
  CHECK(s.q3 == 4);
  CHECK(s.iqr() == 2);
}
