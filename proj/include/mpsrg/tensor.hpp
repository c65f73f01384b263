#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpsrg/linalg.hpp"

namespace mpsrg {

/// Rank-3 tensor A^i_{jk}: one Dl x Dr matrix per physical index i.
class SiteTensor {
 public:
  SiteTensor() = default;
  SiteTensor(int d, int dl, int dr);
  explicit SiteTensor(std::vector<Matrix> mats);

  int phys_dim() const { return static_cast<int>(mats_.size()); }
  int left_dim() const { return dl_; }
  int right_dim() const { return dr_; }

  const Matrix& operator[](int i) const { return mats_[static_cast<std::size_t>(i)]; }
  Matrix& operator[](int i) { return mats_[static_cast<std::size_t>(i)]; }
  std::span<const Matrix> matrices() const { return mats_; }

  /// d x (Dl*Dr) with column j*Dr + k.
  Matrix matricize() const;
  static SiteTensor from_matricized(const Matrix& m, int dl, int dr);

  SiteTensor scaled(cplx s) const;
  bool approx_equal(const SiteTensor& o, double tol) const;
  void validate() const;

 private:
  std::vector<Matrix> mats_;
  int dl_ = 0;
  int dr_ = 0;
};

enum class Boundary { Periodic, Open };

/// A run of identical site tensors; chains are stored run-length encoded so that
/// translation-invariant chains of 10^6 sites cost one tensor.
struct Segment {
  SiteTensor tensor;
  std::uint64_t repeat = 1;
};

class MpsChain {
 public:
  MpsChain() = default;

  static MpsChain uniform(const SiteTensor& a, std::uint64_t n, Boundary b = Boundary::Periodic);
  static MpsChain periodic(std::vector<SiteTensor> sites);
  static MpsChain open(std::vector<SiteTensor> sites, Vector left, Vector right);
  static MpsChain from_segments(std::vector<Segment> segs, Boundary b, Vector left = {}, Vector right = {});

  std::uint64_t size() const;
  Boundary boundary() const { return boundary_; }
  const std::vector<Segment>& segments() const { return segs_; }
  const Vector& left() const { return left_; }
  const Vector& right() const { return right_; }

  /// Site n; walks the segments.
  const SiteTensor& site(std::uint64_t n) const;
  /// Expand into one tensor per site (refuses above max_sites).
  std::vector<SiteTensor> sites(std::uint64_t max_sites = 1u << 20) const;

  void validate() const;

 private:
  std::vector<Segment> segs_;
  Boundary boundary_ = Boundary::Periodic;
  Vector left_;
  Vector right_;
};

/// E = sum_i conj(A^i) (x) A^i, rows (l,l') and columns (r,r') with the bra leg first.
struct TransferMatrix {
  Matrix matrix;
  int left_dim = 0;
  int right_dim = 0;
  std::string source;
};

TransferMatrix transfer_matrix(const SiteTensor& a, std::string source = {});

/// sum_i conj(bra^i) (x) ket^i.
Matrix mixed_transfer(const SiteTensor& bra, const SiteTensor& ket);

struct SpectralOptions {
  double tol = 1e-10;              // relative degeneracy / normality tolerance
  double positivity_floor = 1e-10;  // fixed points below -floor are rejected
};

struct SpectralReport {
  std::vector<cplx> eigenvalues;  // sorted by magnitude, divided by lambda1
  cplx lambda1{1.0, 0.0};         // raw leading eigenvalue
  Matrix rho;                     // right fixed point, (bra,ket), trace 1
  Matrix left_fixed;              // left fixed point, <left|rho> = 1
  double xi = 0.0;                // -1/ln|lambda2/lambda1|
  bool is_normal = false;
  int degeneracy_b = 1;           // number of eigenvalues of modulus |lambda1|
  double rho_min_eig = 0.0;
  double left_min_eig = 0.0;
};

SpectralReport spectral_analyze(const TransferMatrix& t, const SpectralOptions& opt = {});
SpectralReport spectral_analyze(const SiteTensor& a, const SpectralOptions& opt = {});

struct GaugeOptions {
  double max_condition = 1e12;
};

/// A' = sigma^{1/2} A sigma^{-1/2} / sqrt(lambda1), sigma the left fixed point.
SiteTensor canonical_gauge(const SiteTensor& a, const GaugeOptions& opt = {});

/// Largest number of complex entries block() may allocate.
inline constexpr std::uint64_t kBlockBudget = std::uint64_t{1} << 26;

/// B^{(i1..iq)} = A^{i1} ... A^{iq}, i1 most significant.
SiteTensor block(const SiteTensor& a, int q, std::uint64_t budget = kBlockBudget);
SiteTensor block_sites(std::span<const SiteTensor> sites, std::uint64_t budget = kBlockBudget);

struct OverlapResult {
  cplx overlap;         // <psi1|psi2> / (||psi1|| ||psi2||)
  ScaledScalar raw;     // unnormalized <psi1|psi2>
  double log_norm1 = 0.0;  // ln ||psi1||
  double log_norm2 = 0.0;
};

OverlapResult mps_overlap(const MpsChain& bra, const MpsChain& ket);

/// 1 - |<psi1|psi2>| for normalized states.
double error_metric(const MpsChain& a, const MpsChain& b);

/// Dense state vector, site 0 most significant.
Vector mps_to_dense(const MpsChain& c, std::uint64_t max_dim = std::uint64_t{1} << 22);

}  // namespace mpsrg
