#include "mpsrg/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "mpsrg/compile.hpp"
#include "mpsrg/error.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/polar.hpp"

namespace mpsrg {

ErrorFit fit_decay(std::span<const double> x, std::span<const double> y, double floor) {
  require(x.size() == y.size(), ErrorCode::DimensionMismatch, "fit needs matching x and y");
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i]) && y[i] > floor) {
      xs.push_back(x[i]);
      ls.push_back(std::log(y[i]));
    }
  ErrorFit f;
  f.points = static_cast<int>(xs.size());
  if (xs.size() < 2) return f;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ls[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ls[i] - my);
  }
  if (sxx <= 0) {
    f.points = 1;
    return f;
  }
  const double slope = sxy / sxx, icept = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) ss += std::pow(ls[i] - icept - slope * xs[i], 2);
  f.rate = -slope;
  f.prefactor = std::exp(icept);
  f.residual = std::sqrt(ss / n);
  return f;
}

void ErrorScan::refit() {
  std::vector<double> qx, qs, y;
  for (const auto& r : rows) {
    qx.push_back(r.xi > 0 ? r.q / r.xi : std::numeric_limits<double>::infinity());
    qs.push_back(r.q);
    y.push_back(r.epsilon_per_block);
  }
  fit = fit_decay(qx, y);
  fit_q = fit_decay(qs, y);
}

bool ErrorScan::monotone(double slack) const {
  std::vector<ErrorScanRow> s = rows;
  std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.q < b.q; });
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].epsilon_per_block > s[i - 1].epsilon_per_block + slack) return false;
  return true;
}

// ---------------------------------------------------------------------------

AnalyticModel::AnalyticModel(const SiteTensor& a) {
  gauged = canonical_gauge(a);
  transfer = transfer_matrix(gauged).matrix;
  spectrum = spectral_analyze(gauged);
  p_inf = positive_tensor(fixed_point_positive(spectrum.rho, spectrum.left_fixed), bond(), bond());
}

namespace {

void require_injective_span(const SiteTensor& g, int span) {
  const double lhs = span * std::log(static_cast<double>(g.phys_dim()));
  const double rhs = 2 * std::log(static_cast<double>(g.left_dim()));
  require(lhs >= rhs - 1e-12, ErrorCode::InjectivityImpossible,
          "d^q < D^2 for span " + std::to_string(span) + ": block cannot be injective");
}

Matrix checked_positive(const Matrix& transfer, int D) {
  Matrix p = positive_part_from_transfer(transfer, D, D);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  const double top = es.eigenvalues().maxCoeff();
  require(top > 0 && es.eigenvalues().minCoeff() > 1e-12 * top, ErrorCode::InjectivityImpossible,
          "blocked tensor is not injective");
  return p;
}

}  // namespace

Matrix AnalyticModel::positive_part(int q, Scheme scheme) const {
  require(q >= 1, ErrorCode::InvalidArgument, "q must be positive");
  const int D = bond();
  if (scheme == Scheme::SequentialRG) {
    require_injective_span(gauged, q);
    return checked_positive(scaled_power(transfer, static_cast<std::uint64_t>(q)).m, D);
  }
  require(scheme == Scheme::TreeRG || scheme == Scheme::TreeRGMeasured, ErrorCode::UnsupportedScheme,
          "analytic error needs an RG scheme");
  std::map<int, Matrix> memo;
  auto node = [&](auto&& self, int span) -> Matrix {
    if (auto it = memo.find(span); it != memo.end()) return it->second;
    auto [c1, c2] = tree_children(span);
    Matrix p;
    if (c1 == 0) {
      require_injective_span(gauged, span);
      p = checked_positive(scaled_power(transfer, static_cast<std::uint64_t>(span)).m, D);
    } else {
      std::vector<SiteTensor> kids = {positive_tensor(self(self, c1), D, D), positive_tensor(self(self, c2), D, D)};
      SiteTensor b = block_sites(kids);
      Matrix t = transfer_matrix(b).matrix;
      p = checked_positive(t / t.norm(), D);
    }
    memo.emplace(span, p);
    return p;
  };
  return node(node, q);
}

double AnalyticModel::block_error(const Matrix& p, std::uint64_t m) const {
  require(m >= 1, ErrorCode::InvalidArgument, "need at least one block");
  const int D = bond();
  return error_metric(MpsChain::uniform(p_inf, m), MpsChain::uniform(positive_tensor(p, D, D), m));
}

ErrorScan error_scan(const SiteTensor& a, std::span<const int> qs, const ErrorScanOptions& opt) {
  require(opt.m >= 2, ErrorCode::InvalidArgument, "error scan needs M >= 2 blocks");
  AnalyticModel model(a);
  ErrorScan scan;
  for (int q : qs) {
    const double eps = std::max(0.0, model.block_error(model.positive_part(q, opt.scheme), opt.m));
    scan.rows.push_back({q, model.spectrum.xi, opt.m, eps, eps / static_cast<double>(opt.m), std::string(to_string(opt.scheme)),
                         opt.sample_id});
  }
  scan.refit();
  return scan;
}

ErrorScan error_scan(const CanonicalDecomposition& decomp, std::span<const int> qs, const ErrorScanOptions& opt) {
  require(opt.m >= 2, ErrorCode::InvalidArgument, "error scan needs M >= 2 blocks");
  require(opt.scheme != Scheme::Sequential, ErrorCode::UnsupportedScheme, "the sequential scheme is exact");
  double xi = 0.0;
  for (const auto& br : decomp.normalized_branches()) xi = std::max(xi, spectral_analyze(br).xi);
  const SiteTensor full = decomp.full_tensor();
  ErrorScan scan;
  for (int q : qs) {
    CompileOptions co;
    co.scheme = opt.scheme;
    co.q = q;
    co.n = opt.m * static_cast<std::uint64_t>(q);
    CompiledProgram prog = compile_branches(decomp, co);
    const double eps = std::max(0.0, error_metric(MpsChain::uniform(block(full, q), opt.m), prog.prepared()));
    scan.rows.push_back({q, xi, opt.m, eps, eps / static_cast<double>(opt.m), std::string(to_string(opt.scheme)), opt.sample_id});
  }
  scan.refit();
  return scan;
}

BoundCheck bound_check(const ErrorScan& scan, double gamma) {
  BoundCheck bc;
  if (!(gamma > 0 && gamma < 0.5)) return bc;
  std::vector<ErrorScanRow> rows = scan.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.q < b.q; });
  std::vector<double> tail;
  bool finite = true;
  for (const auto& r : rows) {
    // N / q = M
    const double c = r.epsilon / (static_cast<double>(r.m) * std::exp(-gamma * r.q / r.xi));
    bc.c.push_back(c);
    finite = finite && std::isfinite(c);
    bc.constant = std::max(bc.constant, c);
    if (r.q > 2 * r.xi && r.epsilon_per_block > kFitFloor) tail.push_back(c);
  }
  double worst = 0.0;
  bool decreasing = true;
  for (std::size_t i = 1; i < tail.size(); ++i) {
    worst = std::max(worst, tail[i] / tail[i - 1]);
    decreasing = decreasing && tail[i] <= tail[i - 1] * (1 + 1e-9);
  }
  bc.margin = tail.size() >= 2 ? 1.0 - worst : 0.0;
  bc.passed = finite && tail.size() >= 2 && decreasing;
  return bc;
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> log_grid(std::uint64_t lo, std::uint64_t hi, int per_decade) {
  require(lo >= 1 && hi >= lo && per_decade >= 1, ErrorCode::InvalidArgument, "bad grid");
  std::vector<std::uint64_t> out;
  for (int k = 0;; ++k) {
    const double v = static_cast<double>(lo) * std::pow(10.0, static_cast<double>(k) / per_decade);
    const auto n = static_cast<std::uint64_t>(std::llround(v));
    if (n >= hi) break;
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  out.push_back(hi);
  return out;
}

DepthScan depth_scan(const SiteTensor& a, const DepthScanOptions& opt) {
  require(opt.fidelity > 0 && opt.fidelity < 1, ErrorCode::InvalidArgument, "fidelity must lie in (0, 1)");
  AnalyticModel model(a);
  const double target = 1.0 - std::sqrt(opt.fidelity);
  const int d = a.phys_dim(), D = a.left_dim();
  std::map<int, Matrix> parts;
  DepthScan scan;
  scan.xi = model.spectrum.xi;
  for (std::uint64_t n : opt.ns) {
    DepthScanRow row;
    row.n = n;
    for (int q = 2; q <= opt.q_max && static_cast<std::uint64_t>(q) <= n; ++q) {
      if (q * std::log(static_cast<double>(d)) < 2 * std::log(static_cast<double>(D)) - 1e-12) continue;
      auto it = parts.find(q);
      if (it == parts.end()) it = parts.emplace(q, model.positive_part(q, Scheme::SequentialRG)).first;
      const double eps = std::max(0.0, model.block_error(it->second, n / static_cast<std::uint64_t>(q)));
      if (eps <= target) {
        row.q = q;
        row.epsilon = eps;
        break;
      }
    }
    require(row.q > 0, ErrorCode::InvalidArgument,
            "no q <= " + std::to_string(opt.q_max) + " reaches the fidelity target at N = " + std::to_string(n));
    for (Scheme s : {Scheme::Sequential, Scheme::SequentialRG, Scheme::TreeRG, Scheme::TreeRGMeasured})
      row.reports.push_back(cnot_depth(s, n, row.q, d, D));
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

// ---------------------------------------------------------------------------

RateSummary summarize_rates(std::vector<double> rates) {
  RateSummary s;
  s.rates = rates;
  std::erase_if(rates, [](double r) { return !std::isfinite(r); });
  if (rates.empty()) return s;
  std::sort(rates.begin(), rates.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(rates.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, rates.size() - 1);
    return rates[lo] + (h - static_cast<double>(lo)) * (rates[hi] - rates[lo]);
  };
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  return s;
}

EnsembleSample ensemble_sample(const EnsembleOptions& opt, int id) {
  std::seed_seq ss{opt.seed, static_cast<std::uint64_t>(id)};
  std::mt19937_64 rng(ss);
  MpsChain chain = fixtures::random_obc_chain(opt.n, opt.d, opt.bond, rng);
  EnsembleSample out;
  double inv = 0.0;
  int counted = 0;
  for (const auto& seg : chain.segments()) {
    const double xi = spectral_analyze(seg.tensor).xi;
    if (std::isfinite(xi) && xi > 0) {
      inv += static_cast<double>(seg.repeat) / xi;
      counted += static_cast<int>(seg.repeat);
    }
  }
  out.xi = counted > 0 ? counted / inv : 0.0;
  for (int q : opt.qs) {
    PositiveChain pc = positive_chain(chain, q);
    VariationalOptions vo = opt.variational;
    vo.seed = opt.seed ^ (static_cast<std::uint64_t>(id) << 20) ^ static_cast<std::uint64_t>(q);
    VariationalResult res = optimize_positive(pc.chain, vo);
    for (const auto& r : res.runs) out.max_sweep_drop = std::max(out.max_sweep_drop, r.max_drop());
    const auto m = static_cast<std::uint64_t>(pc.blocks.size());
    const double eps = std::max(0.0, res.epsilon());
    out.scan.rows.push_back({q, out.xi, m, eps, eps / static_cast<double>(m), "variational", id});
  }
  out.scan.refit();
  return out;
}

EnsembleResult random_mps_ensemble(const EnsembleOptions& opt) {
  require(opt.count >= 1, ErrorCode::InvalidArgument, "ensemble needs at least one sample");
  EnsembleResult res;
  res.samples.resize(static_cast<std::size_t>(opt.count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (int id = next++; id < opt.count; id = next++) {
      try {
        res.samples[static_cast<std::size_t>(id)] = ensemble_sample(opt, id);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(opt.jobs, 1, opt.count);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<double> cq, cx;
  for (const auto& s : res.samples) {
    cq.push_back(s.scan.fit_q.valid() ? s.scan.fit_q.rate : std::nan(""));
    cx.push_back(s.scan.fit.valid() ? s.scan.fit.rate : std::nan(""));
  }
  res.per_q = summarize_rates(cq);
  res.per_q_over_xi = summarize_rates(cx);
  return res;
}

}  // namespace mpsrg
