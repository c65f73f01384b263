#include "mpsrg/fixed_point.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mpsrg/error.hpp"

namespace mpsrg {

Vector pair_state(const Matrix& rho, const Matrix& left_fixed) {
  require(rho.rows() == rho.cols() && left_fixed.rows() == left_fixed.cols(), ErrorCode::ShapeMismatch,
          "fixed points must be square");
  require(rho.rows() == left_fixed.rows(), ErrorCode::DimensionMismatch, "fixed points differ in size");
  require(min_hermitian_eigenvalue(rho) >= -1e-10 && min_hermitian_eigenvalue(left_fixed) >= -1e-10,
          ErrorCode::NotPositive, "pair_state needs positive semidefinite fixed points");
  const Index d = rho.rows();
  Matrix m = psd_sqrt(left_fixed) * psd_sqrt(rho).transpose();  // m(b, a)
  Vector w(d * d);
  for (Index b = 0; b < d; ++b)
    for (Index a = 0; a < d; ++a) w(b * d + a) = m(b, a);
  double n = w.norm();
  require(n > 0, ErrorCode::NotPositive, "pair state vanishes");
  return w / n;
}

Vector pair_state(const Matrix& rho) { return pair_state(rho, Matrix::Identity(rho.rows(), rho.cols())); }

// ---------------------------------------------------------------------------

std::vector<SiteTensor> CanonicalDecomposition::normalized_branches() const {
  std::vector<SiteTensor> out;
  for (const auto& br : branches) {
    double lam = std::abs(spectral_analyze(br.tensor).lambda1);
    out.push_back(br.tensor.scaled(1.0 / std::sqrt(lam)));
  }
  return out;
}

namespace {

SiteTensor direct_sum(const std::vector<SiteTensor>& parts, const std::vector<cplx>& weights) {
  require(!parts.empty(), ErrorCode::InvalidArgument, "empty direct sum");
  const int d = parts.front().phys_dim();
  int total = 0;
  for (const auto& p : parts) {
    require(p.phys_dim() == d, ErrorCode::DimensionMismatch, "branches differ in physical dimension");
    require(p.left_dim() == p.right_dim(), ErrorCode::NonSquareBond, "branch tensors need square bonds");
    total += p.left_dim();
  }
  SiteTensor out(d, total, total);
  int off = 0;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const int dj = parts[j].left_dim();
    for (int s = 0; s < d; ++s) out[s].block(off, off, dj, dj) = weights[j] * parts[j][s];
    off += dj;
  }
  return out;
}

}  // namespace

SiteTensor CanonicalDecomposition::reduced_tensor() const {
  auto parts = normalized_branches();
  return direct_sum(parts, std::vector<cplx>(parts.size(), 1.0));
}

SiteTensor CanonicalDecomposition::full_tensor() const {
  auto parts = normalized_branches();
  std::vector<SiteTensor> rep;
  std::vector<cplx> w;
  for (std::size_t j = 0; j < parts.size(); ++j)
    for (cplx m : branches[j].mu) {
      rep.push_back(parts[j]);
      w.push_back(m);
    }
  return direct_sum(rep, w);
}

void CanonicalDecomposition::validate(double tol) const {
  require(!branches.empty(), ErrorCode::InvalidArgument, "decomposition has no branches");
  double top = 0.0;
  for (const auto& br : branches) {
    require(!br.mu.empty(), ErrorCode::InvalidArgument, "branch without weights");
    for (cplx m : br.mu) {
      require(std::abs(m) <= 1.0 + tol, ErrorCode::InvalidArgument, "branch weight with |mu| > 1");
      top = std::max(top, std::abs(m));
    }
    require(spectral_analyze(br.tensor).is_normal, ErrorCode::NotNormal, "branch tensor is not normal");
  }
  require(std::abs(top - 1.0) <= tol, ErrorCode::InvalidArgument, "no branch weight of magnitude one");
}

namespace {

cplx ipow(cplx base, std::uint64_t n) {
  cplx r = 1.0;
  while (n) {
    if (n & 1u) r *= base;
    base *= base;
    n >>= 1u;
  }
  return r;
}

}  // namespace

BetaAlpha beta_coefficients(const CanonicalDecomposition& decomp, std::uint64_t n) {
  require(n >= 1, ErrorCode::InvalidArgument, "N must be >= 1");
  BetaAlpha out;
  double norm2 = 0.0;
  for (const auto& br : decomp.branches) {
    cplx b = 0.0;
    for (cplx m : br.mu) b += ipow(m, n);
    out.beta.push_back(b);
    norm2 += std::norm(b);
  }
  require(norm2 > 0, ErrorCode::NumericalFailure, "all beta coefficients vanish");
  for (cplx b : out.beta) out.alpha.push_back(b / std::sqrt(norm2));
  return out;
}

// ---------------------------------------------------------------------------

FixedPointState FixedPointState::uniform(Vector omega, int leg_dim, std::uint64_t bonds) {
  FixedPointState s;
  s.leg_dim = leg_dim;
  s.bonds = bonds;
  s.alpha = {1.0};
  s.pairs = {{std::move(omega)}};
  s.mu = {{1.0}};
  s.block_sizes = {1};
  s.validate();
  return s;
}

const Vector& FixedPointState::pair(int branch, std::uint64_t bond) const {
  const auto& p = pairs.at(static_cast<std::size_t>(branch));
  require(bond < bonds, ErrorCode::IndexOutOfRange, "bond index beyond the chain");
  return p.size() == 1 ? p[0] : p.at(bond);
}

bool FixedPointState::translation_invariant() const {
  for (const auto& p : pairs)
    if (p.size() != 1) return false;
  return true;
}

void FixedPointState::validate(double tol) const {
  require(leg_dim > 0 && bonds > 0, ErrorCode::InvalidArgument, "fixed-point state needs legs and bonds");
  require(!pairs.empty() && alpha.size() == pairs.size(), ErrorCode::ShapeMismatch, "alpha/pair count mismatch");
  double a2 = 0.0;
  for (cplx a : alpha) a2 += std::norm(a);
  require(std::abs(a2 - 1.0) < 1e-12, ErrorCode::InvalidArgument, "alpha not normalized");
  const Index pd = static_cast<Index>(leg_dim) * leg_dim;
  for (const auto& br : pairs) {
    require(br.size() == 1 || br.size() == bonds, ErrorCode::ShapeMismatch, "pairs must be one or one per bond");
    for (const auto& w : br) {
      require(w.size() == pd, ErrorCode::DimensionMismatch, "pair vector has wrong length");
      require(std::abs(w.norm() - 1.0) < 1e-12, ErrorCode::InvalidArgument, "pair vector not normalized");
    }
  }
  for (int j = 0; j < branch_count(); ++j)
    for (int k = j + 1; k < branch_count(); ++k) {
      const std::uint64_t nb = translation_invariant() ? 1 : bonds;
      for (std::uint64_t i = 0; i < nb; ++i)
        require(std::abs(pair(j, i).dot(pair(k, i))) < tol, ErrorCode::BranchOverlap, "branch pairs not orthogonal");
    }
}

MpsChain FixedPointState::block_chain() const {
  const Index L = leg_dim;
  // split every pair matrix w(b, a) = sum_k X(b,k) Y(a,k)
  struct Split {
    Matrix x, y;
  };
  auto split = [&](const Vector& w) {
    Matrix m(L, L);
    for (Index b = 0; b < L; ++b)
      for (Index a = 0; a < L; ++a) m(b, a) = w(b * L + a);
    TruncatedSvd svd = truncated_svd(m, 1e-14);
    return Split{svd.U * svd.S.asDiagonal(), svd.V.conjugate()};
  };
  const int nb = branch_count();
  const std::uint64_t distinct = translation_invariant() ? 1 : bonds;
  std::vector<std::vector<Split>> sp(static_cast<std::size_t>(nb));
  for (int j = 0; j < nb; ++j)
    for (std::uint64_t i = 0; i < distinct; ++i) sp[j].push_back(split(pair(j, i)));

  auto rank = [&](int j, std::uint64_t bond) { return static_cast<int>(sp[j][distinct == 1 ? 0 : bond].x.cols()); };
  auto bond_dim = [&](std::uint64_t bond) {
    int t = 0;
    for (int j = 0; j < nb; ++j) t += rank(j, bond);
    return t;
  };
  // block i sits between bond i-1 (left, its L leg a) and bond i (right, its R leg b)
  auto make_block = [&](std::uint64_t i, bool weighted) {
    const std::uint64_t lb = (i + bonds - 1) % bonds, rb = i;
    SiteTensor t(static_cast<int>(L * L), bond_dim(lb), bond_dim(rb));
    int lo = 0, ro = 0;
    for (int j = 0; j < nb; ++j) {
      const Split& left = sp[j][distinct == 1 ? 0 : lb];
      const Split& right = sp[j][distinct == 1 ? 0 : rb];
      const cplx w = weighted ? alpha[j] : cplx(1.0);
      for (Index a = 0; a < L; ++a)
        for (Index b = 0; b < L; ++b)
          t[static_cast<int>(a * L + b)].block(lo, ro, left.y.cols(), right.x.cols()) =
              w * left.y.row(a).transpose() * right.x.row(b);
      lo += static_cast<int>(left.y.cols());
      ro += static_cast<int>(right.x.cols());
    }
    return t;
  };

  std::vector<Segment> segs;
  if (translation_invariant()) {
    segs.push_back({make_block(0, true), 1});
    if (bonds > 1) segs.push_back({make_block(1, false), bonds - 1});
  } else {
    for (std::uint64_t i = 0; i < bonds; ++i) segs.push_back({make_block(i, i == 0), 1});
  }
  return MpsChain::from_segments(std::move(segs), Boundary::Periodic);
}

// ---------------------------------------------------------------------------

FixedPointState normal_fixed_point(const SiteTensor& a, std::uint64_t bonds) {
  SpectralReport rep = spectral_analyze(a);
  require(rep.is_normal, ErrorCode::NotNormal, "tensor is not normal; use the branch decomposition");
  return FixedPointState::uniform(pair_state(rep.rho, rep.left_fixed), a.left_dim(), bonds);
}

FixedPointState nonnormal_fixed_point(const CanonicalDecomposition& decomp, std::uint64_t n, int q,
                                      const FixedPointOptions& opt) {
  decomp.validate();
  require(q >= 1 && n >= static_cast<std::uint64_t>(q), ErrorCode::InvalidArgument, "need N >= q >= 1");
  auto parts = decomp.normalized_branches();
  const int nb = static_cast<int>(parts.size());

  // distinct branches: the mixed transfer matrix must be strictly contracting
  for (int j = 0; j < nb; ++j)
    for (int k = j + 1; k < nb; ++k) {
      Matrix e = mixed_transfer(parts[j], parts[k]);
      double radius = e.size() ? Eigen::ComplexEigenSolver<Matrix>(e, false).eigenvalues().cwiseAbs().maxCoeff() : 0;
      require(radius < 1.0 - opt.distinctness_gap, ErrorCode::BranchOverlap,
              "branches " + std::to_string(j) + " and " + std::to_string(k) + " are not distinct");
    }

  int total = 0;
  for (const auto& p : parts) total += p.left_dim();
  FixedPointState s;
  s.leg_dim = total;
  s.bonds = n / static_cast<std::uint64_t>(q);
  s.alpha = beta_coefficients(decomp, n).alpha;
  int off = 0;
  for (int j = 0; j < nb; ++j) {
    SpectralReport rep = spectral_analyze(parts[j]);
    Vector local = pair_state(rep.rho, rep.left_fixed);
    const int dj = parts[j].left_dim();
    Vector w = Vector::Zero(static_cast<Index>(total) * total);
    for (int b = 0; b < dj; ++b)
      for (int a = 0; a < dj; ++a) w((off + b) * total + off + a) = local(b * dj + a);
    s.pairs.push_back({w});
    s.mu.push_back(decomp.branches[j].mu);
    s.block_sizes.push_back(static_cast<int>(decomp.branches[j].mu.size()));
    off += dj;
  }
  s.validate(opt.orthogonality_tol);
  return s;
}

}  // namespace mpsrg
