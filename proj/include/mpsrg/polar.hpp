#pragma once

#include <map>
#include <span>
#include <vector>

#include "mpsrg/tensor.hpp"

namespace mpsrg {

struct PolarOptions {
  double rel_cutoff = 1e-12;
};

/// Polar decomposition of a blocked tensor viewed as the map (l,r) -> s:
/// B = V P with V a partial isometry and P >= 0.
struct PolarSplit {
  Matrix V;          // (d^q) x (Dl*Dr)
  Matrix P;          // (Dl*Dr) x (Dl*Dr)
  Matrix projector;  // V^dagger V
  Index rank = 0;
  int left_dim = 0;
  int right_dim = 0;
  Matrix range_basis;    // U, orthonormal basis of range(V)
  Matrix support_basis;  // W, orthonormal basis of supp(P); V = U W^dagger

  bool injective() const { return rank == P.rows(); }
  /// P as a site tensor: physical leg (a,b), bonds (l, r).
  SiteTensor positive_tensor() const;
  /// V extended by an isometry on ker P, so that the result satisfies V^dagger V = 1.
  Matrix full_isometry() const;
};

PolarSplit polar_split(const SiteTensor& blocked, const PolarOptions& opt = {});

/// P = sqrt(G) with the Gram matrix G regrouped from a (block) transfer matrix.
Matrix positive_part_from_transfer(const Matrix& transfer, int dl, int dr);

/// sqrt(rho) (x) sqrt(sigma): the limit of P for a normal tensor.
Matrix fixed_point_positive(const Matrix& rho, const Matrix& left_fixed);

/// Matrix P[(a,b),(l,r)] as a site tensor with physical leg (a,b).
SiteTensor positive_tensor(const Matrix& p, int dl, int dr);

/// Physical tensor V t: contracts the isometry into the physical leg of t.
SiteTensor apply_isometry(const Matrix& v, const SiteTensor& t);

/// B~ = V P_inf for one block.
SiteTensor approx_block_tensor(const PolarSplit& split, const Matrix& rho, const Matrix& left_fixed);
SiteTensor approx_block_tensor(const PolarSplit& split, const Matrix& rho);

// ---------------------------------------------------------------------------

enum class FactorRole { Center, LeftSweep, RightSweep };

/// One isometry of a sequential decomposition, as an (out x in) matrix.
struct IsometryFactor {
  Matrix matrix;
  FactorRole role = FactorRole::LeftSweep;
  int site = 0;       // physical site emitted, relative to the block
  int in_dim = 1;
  int out_left = 1;   // bond to the left of the site (1 if none)
  int phys = 1;
  int out_right = 1;  // bond to the right (1 if none)

  double defect() const { return isometry_defect(matrix); }
};

struct SequentialOptions {
  double rel_cutoff = 1e-12;
  int center = -1;  // site carrying the input leg; -1 means the last site
  // Extend a partial-isometry center factor by an isometry on its kernel (non-injective
  // blocks, where V itself is only a partial isometry).
  bool complete_center = false;
};

struct SequentialDecomposition {
  int q = 0;
  int d = 0;
  int input_dim = 0;
  int center = 0;
  std::vector<int> bond_dims;             // b_0 .. b_q, b_0 = b_q = 1
  std::vector<IsometryFactor> factors;    // application order, center first

  /// Contract the factors back into a d^q x input_dim matrix.
  Matrix reconstruct() const;
};

/// Factor V = B K into a staircase of local isometries, B the block of `sites` and
/// K a (Dl*Dr) x n matrix on the block's outer legs (P^+ for the RG, l(x)r for a chain).
SequentialDecomposition sequential_decompose(std::span<const SiteTensor> sites, const Matrix& k,
                                             const SequentialOptions& opt = {});

/// Translation-invariant RG version: K = P^+.
SequentialDecomposition sequential_rg_decompose(const SiteTensor& a, int q, const Matrix& p,
                                                const SequentialOptions& opt = {});

// ---------------------------------------------------------------------------

struct TreeNode {
  int span = 0;
  int left_span = 0;   // 0 for leaves
  int right_span = 0;
  PolarSplit split;
  bool leaf() const { return left_span == 0; }
};

struct TreeOptions {
  double rel_cutoff = 1e-12;
  int preblock = 1;  // sites per tree leaf unit
};

/// Balanced binary tree of polar splits. Spans below 4 are leaves; larger spans split
/// into ceil(s/2) + floor(s/2). For q = 2^k this is the usual k-level tree.
struct TreeDecomposition {
  int q = 0;          // in units of the (pre-blocked) tensor
  int preblock = 1;
  int d = 0;          // physical dimension of the pre-blocked unit
  std::map<int, TreeNode> nodes;

  const TreeNode& root() const { return nodes.at(q); }
  /// Spans per tree depth, root first.
  std::vector<std::vector<int>> levels() const;
  int depth() const { return static_cast<int>(levels().size()); }
  /// Full isometry of the subtree with the given span (completed at every node).
  Matrix isometry(int span) const;
  Matrix isometry() const { return isometry(q); }
  const Matrix& positive() const { return root().split.P; }
};

/// q = 2^k.
TreeDecomposition tree_rg_decompose(const SiteTensor& a, int k, const TreeOptions& opt = {});
TreeDecomposition tree_rg_decompose_span(const SiteTensor& a, int q, const TreeOptions& opt = {});

/// Spans of the two children of a tree node (0, 0 for a leaf).
std::pair<int, int> tree_children(int span);

}  // namespace mpsrg
