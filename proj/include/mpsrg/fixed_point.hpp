#pragma once

#include <cstdint>
#include <vector>

#include "mpsrg/tensor.hpp"

namespace mpsrg {

/// (1 (x) sqrt(rho)) sum_i |ii>, normalized. Index i*D + a.
Vector pair_state(const Matrix& rho);

/// (sqrt(sigma) (x) sqrt(rho)) sum_k |kk>: the pair across a bond when the
/// left fixed point sigma is not the identity. First leg is the R leg of block i.
Vector pair_state(const Matrix& rho, const Matrix& left_fixed);

struct Branch {
  std::vector<cplx> mu;
  SiteTensor tensor;
};

/// A = sum_j diag(mu_j) (x) A_j with normal A_j, given explicitly.
struct CanonicalDecomposition {
  std::vector<Branch> branches;

  int branch_count() const { return static_cast<int>(branches.size()); }
  /// Branch tensors divided by sqrt(lambda1) so each transfer matrix has spectral radius 1.
  std::vector<SiteTensor> normalized_branches() const;
  /// Direct sum of the normalized branches, one copy each.
  SiteTensor reduced_tensor() const;
  /// Direct sum of mu_{j,k} A_j over all (j, k).
  SiteTensor full_tensor() const;
  void validate(double tol = 1e-10) const;
};

struct BetaAlpha {
  std::vector<cplx> beta;
  std::vector<cplx> alpha;
};

/// beta_j = sum_k mu_{j,k}^N and alpha = beta / ||beta||.
BetaAlpha beta_coefficients(const CanonicalDecomposition& decomp, std::uint64_t n);

/// Sum_j alpha_j (x)_bonds omega_j. Pairs are indexed [branch][bond]; a branch with a
/// single pair uses it on every bond.
struct FixedPointState {
  int leg_dim = 0;
  std::uint64_t bonds = 0;
  std::vector<cplx> alpha;
  std::vector<std::vector<Vector>> pairs;
  std::vector<std::vector<cplx>> mu;
  std::vector<int> block_sizes;  // m_j

  static FixedPointState uniform(Vector omega, int leg_dim, std::uint64_t bonds);

  int branch_count() const { return static_cast<int>(pairs.size()); }
  const Vector& pair(int branch, std::uint64_t bond) const;
  bool translation_invariant() const;
  void validate(double tol = 1e-10) const;

  /// The state as an MPS over blocks: block i has physical leg (a_i, b_i), the L leg
  /// of its own bond on the left and the R leg on the right. Periodic.
  MpsChain block_chain() const;
};

struct FixedPointOptions {
  double orthogonality_tol = 1e-10;
  double distinctness_gap = 1e-8;  // mixed transfer radius must stay below 1 - gap
};

/// |Omega'> for a block-structured non-normal tensor, M = N / q bonds. Each branch's
/// pair lives in its own block of the direct-sum bond space.
FixedPointState nonnormal_fixed_point(const CanonicalDecomposition& decomp, std::uint64_t n, int q,
                                      const FixedPointOptions& opt = {});

/// Normal tensor: the pair state on every bond.
FixedPointState normal_fixed_point(const SiteTensor& a, std::uint64_t bonds);

}  // namespace mpsrg
