#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpsrg/circuit.hpp"
#include "mpsrg/fixed_point.hpp"
#include "mpsrg/variational.hpp"

namespace mpsrg {

inline constexpr double kFitFloor = 1e-14;

struct ErrorScanRow {
  int q = 0;
  double xi = 0.0;
  std::uint64_t m = 0;  // blocks
  double epsilon = 0.0;
  double epsilon_per_block = 0.0;
  std::string scheme;
  int sample_id = 0;
};

/// ln y = ln(prefactor) - rate * x, least squares over rows with y > kFitFloor.
struct ErrorFit {
  double rate = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  // rms of ln y
  int points = 0;

  bool valid() const { return points >= 2; }
};

ErrorFit fit_decay(std::span<const double> x, std::span<const double> y, double floor = kFitFloor);

struct ErrorScan {
  std::vector<ErrorScanRow> rows;
  ErrorFit fit;    // against q / xi
  ErrorFit fit_q;  // against q

  void refit();
  /// epsilon / M nonincreasing in q (up to slack).
  bool monotone(double slack = 0.0) const;
};

struct ErrorScanOptions {
  Scheme scheme = Scheme::SequentialRG;
  std::uint64_t m = 200;
  int sample_id = 0;
};

/// Everything the analytic path needs from a normal tensor: gauge, transfer matrix, P_inf.
struct AnalyticModel {
  SiteTensor gauged;
  Matrix transfer;
  SpectralReport spectrum;
  SiteTensor p_inf;

  explicit AnalyticModel(const SiteTensor& a);
  int bond() const { return gauged.left_dim(); }
  /// Positive part of the q-block, through the sequential (E^q) or tree route.
  Matrix positive_part(int q, Scheme scheme) const;
  /// 1 - |<B-chain|B~-chain>| over m blocks; only D^2 x D^2 objects are touched.
  double block_error(const Matrix& p, std::uint64_t m) const;
};

ErrorScan error_scan(const SiteTensor& a, std::span<const int> qs, const ErrorScanOptions& opt = {});
/// Non-normal input goes through compiled programs; blocks are materialized.
ErrorScan error_scan(const CanonicalDecomposition& decomp, std::span<const int> qs, const ErrorScanOptions& opt = {});

struct BoundCheck {
  bool passed = false;
  double constant = 0.0;  // smallest C valid for every row
  double margin = 0.0;    // 1 - max C(q')/C(q) over consecutive rows past q = 2 xi
  std::vector<double> c;  // per row
};

/// epsilon <= C (N/q) exp(-gamma q / xi) with C(q) nonincreasing beyond q = 2 xi.
BoundCheck bound_check(const ErrorScan& scan, double gamma);

struct DepthScanOptions {
  std::vector<std::uint64_t> ns;
  double fidelity = 0.9;
  int q_max = 64;
};

struct DepthScanRow {
  std::uint64_t n = 0;
  int q = 0;
  double epsilon = 0.0;
  std::vector<DepthReport> reports;  // Sequential, SequentialRG, TreeRG, TreeRGMeasured
};

struct DepthScan {
  double xi = 0.0;
  std::vector<DepthScanRow> rows;
};

/// Smallest q whose analytic error at N sites meets 1 - sqrt(F), then CNOT depth per scheme.
DepthScan depth_scan(const SiteTensor& a, const DepthScanOptions& opt);
std::vector<std::uint64_t> log_grid(std::uint64_t lo, std::uint64_t hi, int per_decade);

struct EnsembleOptions {
  int count = 50;
  // M = N/q stays >= 12 and epsilon well below saturation over the q range
  std::uint64_t n = 120;
  std::vector<int> qs = {4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 2024;
  int d = 2;
  int bond = 2;
  int jobs = 1;
  VariationalOptions variational;
};

struct EnsembleSample {
  ErrorScan scan;
  double xi = 0.0;  // 1 / mean(1/xi_site)
  double max_sweep_drop = 0.0;  // over every run at every q
};

struct RateSummary {
  std::vector<double> rates;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;

  double iqr() const { return q3 - q1; }
};

RateSummary summarize_rates(std::vector<double> rates);

struct EnsembleResult {
  std::vector<EnsembleSample> samples;
  RateSummary per_q;
  RateSummary per_q_over_xi;
};

EnsembleSample ensemble_sample(const EnsembleOptions& opt, int id);
EnsembleResult random_mps_ensemble(const EnsembleOptions& opt);

}  // namespace mpsrg
