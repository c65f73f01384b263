#include "mpsrg/polar.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mpsrg/error.hpp"

namespace mpsrg {

SiteTensor PolarSplit::positive_tensor() const { return mpsrg::positive_tensor(P, left_dim, right_dim); }

Matrix PolarSplit::full_isometry() const {
  const Index n = P.rows();
  if (rank == n || V.rows() < n) return V;
  Matrix uc = complete_to_unitary(range_basis);
  Matrix wc = complete_to_unitary(support_basis);
  return V + uc.middleCols(rank, n - rank) * wc.rightCols(n - rank).adjoint();
}

PolarSplit polar_split(const SiteTensor& blocked, const PolarOptions& opt) {
  blocked.validate();
  Matrix m = blocked.matricize();
  TruncatedSvd svd = truncated_svd(m, opt.rel_cutoff);
  require(svd.rank > 0, ErrorCode::RankCollapse, "blocked tensor is zero");
  PolarSplit out;
  out.left_dim = blocked.left_dim();
  out.right_dim = blocked.right_dim();
  out.rank = svd.rank;
  out.range_basis = svd.U;
  out.support_basis = svd.V;
  out.V = svd.U * svd.V.adjoint();
  out.P = svd.V * svd.S.asDiagonal() * svd.V.adjoint();
  out.projector = svd.V * svd.V.adjoint();
  return out;
}

Matrix positive_part_from_transfer(const Matrix& transfer, int dl, int dr) {
  return psd_sqrt(regroup(transfer, dl, dl, dr, dr));
}

Matrix fixed_point_positive(const Matrix& rho, const Matrix& left_fixed) {
  return kron(psd_sqrt(rho), psd_sqrt(left_fixed));
}

SiteTensor positive_tensor(const Matrix& p, int dl, int dr) {
  return SiteTensor::from_matricized(p, dl, dr);
}

SiteTensor apply_isometry(const Matrix& v, const SiteTensor& t) {
  require(v.cols() == t.phys_dim(), ErrorCode::DimensionMismatch, "isometry input does not match physical leg");
  return SiteTensor::from_matricized(v * t.matricize(), t.left_dim(), t.right_dim());
}

SiteTensor approx_block_tensor(const PolarSplit& split, const Matrix& rho, const Matrix& left_fixed) {
  require(rho.rows() == split.left_dim && left_fixed.rows() == split.right_dim, ErrorCode::DimensionMismatch,
          "fixed points do not match the block's bonds");
  Matrix pinf = fixed_point_positive(rho, left_fixed);
  return SiteTensor::from_matricized(split.full_isometry() * pinf, split.left_dim, split.right_dim);
}

SiteTensor approx_block_tensor(const PolarSplit& split, const Matrix& rho) {
  return approx_block_tensor(split, rho, Matrix::Identity(split.right_dim, split.right_dim));
}

// ---------------------------------------------------------------------------

namespace {

using Slices = std::vector<Matrix>;  // one matrix per physical index

}  // namespace

SequentialDecomposition sequential_decompose(std::span<const SiteTensor> sites, const Matrix& k,
                                             const SequentialOptions& opt) {
  const int q = static_cast<int>(sites.size());
  require(q >= 1, ErrorCode::InvalidArgument, "empty block");
  for (int n = 0; n + 1 < q; ++n)
    require(sites[n].right_dim() == sites[n + 1].left_dim(), ErrorCode::ShapeMismatch, "bond mismatch in block");
  const int dl = sites.front().left_dim(), dr = sites.back().right_dim();
  require(k.rows() == static_cast<Index>(dl) * dr, ErrorCode::DimensionMismatch, "K must act on (Dl*Dr)");
  const int c = opt.center < 0 ? q - 1 : opt.center;
  require(c < q, ErrorCode::IndexOutOfRange, "center site outside the block");
  const int nin = static_cast<int>(k.cols());


  SequentialDecomposition out;
  out.q = q;
  out.d = sites.front().phys_dim();
  out.input_dim = nin;
  out.center = c;
  out.bond_dims.assign(static_cast<std::size_t>(q) + 1, 1);

  // sweep tensors: left of the center the bond carries (l', k), right of it (k, r')
  auto left_slices = [&](int n) {
    const SiteTensor& a = sites[n];
    const int din = n == 0 ? 1 : dl * a.left_dim();
    Slices t(static_cast<std::size_t>(a.phys_dim()), Matrix::Zero(din, static_cast<Index>(dl) * a.right_dim()));
    for (int s = 0; s < a.phys_dim(); ++s)
      for (int lp = 0; lp < dl; ++lp)
        for (int x = 0; x < a.left_dim(); ++x) {
          if (n == 0 && x != lp) continue;
          const int row = n == 0 ? 0 : lp * a.left_dim() + x;
          for (int y = 0; y < a.right_dim(); ++y) t[s](row, lp * a.right_dim() + y) = a[s](x, y);
        }
    return t;
  };
  auto right_slices = [&](int n) {
    const SiteTensor& a = sites[n];
    const int dout = n == q - 1 ? 1 : a.right_dim() * dr;
    Slices t(static_cast<std::size_t>(a.phys_dim()), Matrix::Zero(static_cast<Index>(a.left_dim()) * dr, dout));
    for (int s = 0; s < a.phys_dim(); ++s)
      for (int rp = 0; rp < dr; ++rp)
        for (int y = 0; y < a.right_dim(); ++y) {
          if (n == q - 1 && y != rp) continue;
          const int col = n == q - 1 ? 0 : y * dr + rp;
          for (int x = 0; x < a.left_dim(); ++x) t[s](x * dr + rp, col) = a[s](x, y);
        }
    return t;
  };
  auto center_slices = [&] {
    const SiteTensor& a = sites[c];
    const int lb = c == 0 ? 1 : dl * a.left_dim();
    const int rb = c == q - 1 ? 1 : a.right_dim() * dr;
    Slices t(static_cast<std::size_t>(a.phys_dim()), Matrix::Zero(lb, static_cast<Index>(rb) * nin));
    for (int s = 0; s < a.phys_dim(); ++s)
      for (int lp = 0; lp < dl; ++lp)
        for (int rp = 0; rp < dr; ++rp)
          for (int x = 0; x < a.left_dim(); ++x) {
            if (c == 0 && x != lp) continue;
            for (int y = 0; y < a.right_dim(); ++y) {
              if (c == q - 1 && y != rp) continue;
              const cplx v = a[s](x, y);
              if (v == 0.0) continue;
              const int li = c == 0 ? 0 : lp * a.left_dim() + x;
              const int ri = c == q - 1 ? 0 : y * dr + rp;
              for (int j = 0; j < nin; ++j) t[s](li, ri * nin + j) += v * k(lp * dr + rp, j);
            }
          }
    return t;
  };

  std::vector<IsometryFactor> left_factors, right_factors;

  Matrix carry = Matrix::Identity(1, 1);
  for (int n = 0; n < c; ++n) {
    Slices t = left_slices(n);
    const int d = sites[n].phys_dim();
    const Index r = carry.rows();
    Matrix x(r * d, t[0].cols());
    for (int s = 0; s < d; ++s) {
      Matrix ct = carry * t[s];
      for (Index b = 0; b < r; ++b) x.row(b * d + s) = ct.row(b);
    }
    TruncatedSvd svd = truncated_svd(x, opt.rel_cutoff);
    require(svd.rank > 0, ErrorCode::RankCollapse, "sequential sweep hit a zero bond");
    IsometryFactor f;
    f.matrix = svd.U;
    f.role = FactorRole::LeftSweep;
    f.site = n;
    f.in_dim = static_cast<int>(svd.rank);
    f.out_left = static_cast<int>(r);
    f.phys = d;
    left_factors.push_back(std::move(f));
    carry = svd.S.asDiagonal() * svd.V.adjoint();
    out.bond_dims[n + 1] = static_cast<int>(svd.rank);
  }

  Matrix carry_r = Matrix::Identity(1, 1);
  for (int n = q - 1; n > c; --n) {
    Slices t = right_slices(n);
    const int d = sites[n].phys_dim();
    const Index r = carry_r.cols();
    Matrix y(t[0].rows(), d * r);
    for (int s = 0; s < d; ++s) y.middleCols(s * r, r) = t[s] * carry_r;
    TruncatedSvd svd = truncated_svd(y, opt.rel_cutoff);
    require(svd.rank > 0, ErrorCode::RankCollapse, "sequential sweep hit a zero bond");
    IsometryFactor f;
    f.matrix = svd.V.conjugate();
    f.role = FactorRole::RightSweep;
    f.site = n;
    f.in_dim = static_cast<int>(svd.rank);
    f.phys = d;
    f.out_right = static_cast<int>(r);
    right_factors.push_back(std::move(f));
    carry_r = svd.U * svd.S.asDiagonal();
    out.bond_dims[n] = static_cast<int>(svd.rank);
  }

  {
    Slices t = center_slices();
    const int d = sites[c].phys_dim();
    const Index rl = carry.rows(), rr = carry_r.cols();
    Matrix expand = kron(carry_r, Matrix::Identity(nin, nin));
    IsometryFactor f;
    f.matrix = Matrix::Zero(rl * d * rr, nin);
    for (int s = 0; s < d; ++s) {
      Matrix ct = carry * t[s] * expand;  // rl x (rr*nin)
      for (Index b = 0; b < rl; ++b)
        for (Index bp = 0; bp < rr; ++bp)
          for (int j = 0; j < nin; ++j) f.matrix((b * d + s) * rr + bp, j) = ct(b, bp * nin + j);
    }
    if (opt.complete_center && f.defect() > 1e-8) {
      require(f.matrix.rows() >= f.matrix.cols(), ErrorCode::InjectivityImpossible,
              "center factor has fewer outputs than inputs and cannot be completed");
      TruncatedSvd svd = truncated_svd(f.matrix, 1e-8);
      const Index r = svd.rank, nin = f.matrix.cols();
      Matrix uc = complete_to_unitary(svd.U), wc = complete_to_unitary(svd.V);
      f.matrix = svd.U * svd.V.adjoint() + uc.middleCols(r, nin - r) * wc.rightCols(nin - r).adjoint();
    }
    f.role = FactorRole::Center;
    f.site = c;
    f.in_dim = nin;
    f.out_left = static_cast<int>(rl);
    f.phys = d;
    f.out_right = static_cast<int>(rr);
    out.factors.push_back(std::move(f));
  }
  for (auto it = left_factors.rbegin(); it != left_factors.rend(); ++it) out.factors.push_back(std::move(*it));
  for (auto& f : right_factors) out.factors.push_back(std::move(f));
  return out;
}

SequentialDecomposition sequential_rg_decompose(const SiteTensor& a, int q, const Matrix& p,
                                                const SequentialOptions& opt) {
  require(q >= 1, ErrorCode::InvalidArgument, "block size must be >= 1");
  require(p.rows() == static_cast<Index>(a.left_dim()) * a.right_dim() && p.cols() == p.rows(),
          ErrorCode::DimensionMismatch, "P must be (Dl*Dr) square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(p));
  const RealVector& ev = es.eigenvalues();
  const double cut = opt.rel_cutoff * ev.cwiseAbs().maxCoeff();
  RealVector inv(ev.size());
  for (Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cut ? 1.0 / ev(i) : 0.0;
  Matrix pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
  std::vector<SiteTensor> sites(static_cast<std::size_t>(q), a);
  return sequential_decompose(sites, pinv, opt);
}

Matrix SequentialDecomposition::reconstruct() const {
  std::vector<const IsometryFactor*> by_site(static_cast<std::size_t>(q), nullptr);
  for (const auto& f : factors) by_site[static_cast<std::size_t>(f.site)] = &f;
  Matrix z = Matrix::Ones(1, 1);  // rows: prefix, cols: bond * nx + x
  int nx = 1;
  for (int n = 0; n < q; ++n) {
    const IsometryFactor& f = *by_site[n];
    const Index prefixes = z.rows();
    const int d = f.phys;
    if (f.role == FactorRole::LeftSweep) {
      Matrix nz = Matrix::Zero(prefixes * d, f.in_dim);
      for (Index p = 0; p < prefixes; ++p)
        for (int s = 0; s < d; ++s)
          for (int b = 0; b < f.out_left; ++b) nz.row(p * d + s) += z(p, b) * f.matrix.row(b * d + s);
      z = std::move(nz);
    } else if (f.role == FactorRole::Center) {
      const int rr = f.out_right;
      nx = f.in_dim;
      Matrix nz = Matrix::Zero(prefixes * d, static_cast<Index>(rr) * nx);
      for (Index p = 0; p < prefixes; ++p)
        for (int s = 0; s < d; ++s)
          for (int b = 0; b < f.out_left; ++b)
            for (int bp = 0; bp < rr; ++bp)
              nz.row(p * d + s).segment(static_cast<Index>(bp) * nx, nx) +=
                  z(p, b) * f.matrix.row((b * d + s) * rr + bp);
      z = std::move(nz);
    } else {
      const int rr = f.out_right;
      Matrix nz = Matrix::Zero(prefixes * d, static_cast<Index>(rr) * nx);
      for (Index p = 0; p < prefixes; ++p)
        for (int s = 0; s < d; ++s)
          for (int bp = 0; bp < rr; ++bp)
            for (int b = 0; b < f.in_dim; ++b) {
              const cplx w = f.matrix(s * rr + bp, b);
              if (w == 0.0) continue;
              nz.row(p * d + s).segment(static_cast<Index>(bp) * nx, nx) += w * z.row(p).segment(b * nx, nx);
            }
      z = std::move(nz);
    }
  }
  return z;
}

// ---------------------------------------------------------------------------

std::pair<int, int> tree_children(int span) {
  if (span < 4) return {0, 0};
  return {(span + 1) / 2, span / 2};
}

std::vector<std::vector<int>> TreeDecomposition::levels() const {
  std::vector<std::vector<int>> out;
  std::vector<int> cur = {q};
  while (!cur.empty()) {
    out.push_back(cur);
    std::set<int> next;
    for (int s : cur) {
      auto [a, b] = tree_children(s);
      if (a) {
        next.insert(a);
        next.insert(b);
      }
    }
    cur.assign(next.rbegin(), next.rend());
  }
  return out;
}

Matrix TreeDecomposition::isometry(int span) const {
  const TreeNode& n = nodes.at(span);
  Matrix v = n.split.full_isometry();
  if (n.leaf()) return v;
  return kron(isometry(n.left_span), isometry(n.right_span)) * v;
}

namespace {

void build_tree(TreeDecomposition& t, const SiteTensor& unit, int span, const TreeOptions& opt) {
  if (t.nodes.count(span)) return;
  TreeNode node;
  node.span = span;
  auto [c1, c2] = tree_children(span);
  PolarOptions popt{opt.rel_cutoff};
  if (c1 == 0) {
    long double dim = std::pow(static_cast<long double>(unit.phys_dim()), span);
    require(dim >= static_cast<long double>(unit.left_dim()) * unit.right_dim(), ErrorCode::InjectivityImpossible,
            "leaf of span " + std::to_string(span) + " has physical dimension below D^2; pre-block first");
    node.split = polar_split(block(unit, span), popt);
  } else {
    build_tree(t, unit, c1, opt);
    build_tree(t, unit, c2, opt);
    node.left_span = c1;
    node.right_span = c2;
    std::vector<SiteTensor> kids = {t.nodes.at(c1).split.positive_tensor(), t.nodes.at(c2).split.positive_tensor()};
    node.split = polar_split(block_sites(kids), popt);
  }
  t.nodes.emplace(span, std::move(node));
}

}  // namespace

TreeDecomposition tree_rg_decompose_span(const SiteTensor& a, int q, const TreeOptions& opt) {
  require(q >= 1, ErrorCode::InvalidArgument, "tree span must be >= 1");
  require(opt.preblock >= 1, ErrorCode::InvalidArgument, "preblock must be >= 1");
  require(a.left_dim() == a.right_dim(), ErrorCode::NonSquareBond, "tree RG needs square bonds");
  SiteTensor unit = opt.preblock == 1 ? a : block(a, opt.preblock);
  TreeDecomposition t;
  t.q = q;
  t.preblock = opt.preblock;
  t.d = unit.phys_dim();
  build_tree(t, unit, q, opt);
  return t;
}

TreeDecomposition tree_rg_decompose(const SiteTensor& a, int k, const TreeOptions& opt) {
  require(k >= 1 && k < 30, ErrorCode::InvalidArgument, "tree levels must be in [1, 30)");
  return tree_rg_decompose_span(a, 1 << k, opt);
}

}  // namespace mpsrg
