#include "mpsrg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "mpsrg/error.hpp"

namespace mpsrg {

SiteTensor::SiteTensor(int d, int dl, int dr) : dl_(dl), dr_(dr) {
  require(d > 0 && dl > 0 && dr > 0, ErrorCode::InvalidArgument, "tensor dimensions must be positive");
  mats_.assign(static_cast<std::size_t>(d), Matrix::Zero(dl, dr));
}

SiteTensor::SiteTensor(std::vector<Matrix> mats) : mats_(std::move(mats)) {
  require(!mats_.empty(), ErrorCode::InvalidArgument, "tensor needs at least one physical index");
  dl_ = static_cast<int>(mats_[0].rows());
  dr_ = static_cast<int>(mats_[0].cols());
  for (const auto& m : mats_)
    require(m.rows() == dl_ && m.cols() == dr_, ErrorCode::ShapeMismatch, "inconsistent matrix shapes in tensor");
}

Matrix SiteTensor::matricize() const {
  Matrix m(phys_dim(), static_cast<Index>(dl_) * dr_);
  for (int i = 0; i < phys_dim(); ++i)
    for (int j = 0; j < dl_; ++j)
      for (int k = 0; k < dr_; ++k) m(i, j * dr_ + k) = mats_[i](j, k);
  return m;
}

SiteTensor SiteTensor::from_matricized(const Matrix& m, int dl, int dr) {
  require(m.cols() == static_cast<Index>(dl) * dr, ErrorCode::ShapeMismatch, "matricized tensor has wrong column count");
  std::vector<Matrix> mats(static_cast<std::size_t>(m.rows()), Matrix(dl, dr));
  for (Index i = 0; i < m.rows(); ++i)
    for (int j = 0; j < dl; ++j)
      for (int k = 0; k < dr; ++k) mats[i](j, k) = m(i, j * dr + k);
  return SiteTensor(std::move(mats));
}

SiteTensor SiteTensor::scaled(cplx s) const {
  SiteTensor out = *this;
  for (auto& m : out.mats_) m *= s;
  return out;
}

bool SiteTensor::approx_equal(const SiteTensor& o, double tol) const {
  if (phys_dim() != o.phys_dim() || dl_ != o.dl_ || dr_ != o.dr_) return false;
  for (int i = 0; i < phys_dim(); ++i)
    if ((mats_[i] - o.mats_[i]).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

void SiteTensor::validate() const {
  require(!mats_.empty(), ErrorCode::InvalidArgument, "empty tensor");
  for (const auto& m : mats_) {
    require(m.rows() == dl_ && m.cols() == dr_, ErrorCode::ShapeMismatch, "inconsistent matrix shapes in tensor");
    require(m.allFinite(), ErrorCode::NumericalFailure, "tensor has non-finite entries");
  }
}

// ---------------------------------------------------------------------------

MpsChain MpsChain::uniform(const SiteTensor& a, std::uint64_t n, Boundary b) {
  require(n > 0, ErrorCode::InvalidArgument, "chain length must be positive");
  MpsChain c;
  c.segs_.push_back({a, n});
  c.boundary_ = b;
  if (b == Boundary::Open) {
    c.left_ = Vector::Zero(a.left_dim());
    c.left_(0) = 1.0;
    c.right_ = Vector::Zero(a.right_dim());
    c.right_(0) = 1.0;
  }
  c.validate();
  return c;
}

MpsChain MpsChain::periodic(std::vector<SiteTensor> sites) {
  std::vector<Segment> segs;
  for (auto& s : sites) segs.push_back({std::move(s), 1});
  return from_segments(std::move(segs), Boundary::Periodic);
}

MpsChain MpsChain::open(std::vector<SiteTensor> sites, Vector left, Vector right) {
  std::vector<Segment> segs;
  for (auto& s : sites) segs.push_back({std::move(s), 1});
  return from_segments(std::move(segs), Boundary::Open, std::move(left), std::move(right));
}

MpsChain MpsChain::from_segments(std::vector<Segment> segs, Boundary b, Vector left, Vector right) {
  MpsChain c;
  c.segs_ = std::move(segs);
  c.boundary_ = b;
  c.left_ = std::move(left);
  c.right_ = std::move(right);
  c.validate();
  return c;
}

std::uint64_t MpsChain::size() const {
  std::uint64_t n = 0;
  for (const auto& s : segs_) n += s.repeat;
  return n;
}

const SiteTensor& MpsChain::site(std::uint64_t n) const {
  for (const auto& s : segs_) {
    if (n < s.repeat) return s.tensor;
    n -= s.repeat;
  }
  throw Error(ErrorCode::IndexOutOfRange, "site index beyond chain length");
}

std::vector<SiteTensor> MpsChain::sites(std::uint64_t max_sites) const {
  require(size() <= max_sites, ErrorCode::TooLarge, "chain too long to expand");
  std::vector<SiteTensor> out;
  for (const auto& s : segs_)
    for (std::uint64_t r = 0; r < s.repeat; ++r) out.push_back(s.tensor);
  return out;
}

void MpsChain::validate() const {
  require(!segs_.empty(), ErrorCode::InvalidArgument, "empty chain");
  for (const auto& s : segs_) {
    require(s.repeat > 0, ErrorCode::InvalidArgument, "segment repeat must be positive");
    s.tensor.validate();
    if (s.repeat > 1)
      require(s.tensor.left_dim() == s.tensor.right_dim(), ErrorCode::ShapeMismatch,
              "repeated segment needs square bonds");
  }
  for (std::size_t i = 0; i + 1 < segs_.size(); ++i)
    require(segs_[i].tensor.right_dim() == segs_[i + 1].tensor.left_dim(), ErrorCode::ShapeMismatch,
            "bond dimensions of neighbouring sites disagree");
  if (boundary_ == Boundary::Periodic) {
    require(segs_.back().tensor.right_dim() == segs_.front().tensor.left_dim(), ErrorCode::ShapeMismatch,
            "periodic chain: last right bond differs from first left bond");
  } else {
    require(left_.size() == segs_.front().tensor.left_dim() && right_.size() == segs_.back().tensor.right_dim(),
            ErrorCode::ShapeMismatch, "open chain boundary vectors have wrong size");
  }
}

// ---------------------------------------------------------------------------

Matrix mixed_transfer(const SiteTensor& bra, const SiteTensor& ket) {
  require(bra.phys_dim() == ket.phys_dim(), ErrorCode::DimensionMismatch, "physical dimensions differ");
  Matrix e = Matrix::Zero(static_cast<Index>(bra.left_dim()) * ket.left_dim(),
                          static_cast<Index>(bra.right_dim()) * ket.right_dim());
  for (int i = 0; i < bra.phys_dim(); ++i) e += Eigen::kroneckerProduct(bra[i].conjugate(), ket[i]).eval();
  return e;
}

TransferMatrix transfer_matrix(const SiteTensor& a, std::string source) {
  a.validate();
  return {mixed_transfer(a, a), a.left_dim(), a.right_dim(), std::move(source)};
}

namespace {

Matrix reshape_square(const Vector& v, Index d) {
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

// fix the arbitrary eigenvector phase so the trace is real positive, then hermitize
Matrix fix_phase(Matrix m) {
  cplx t = m.trace();
  if (std::abs(t) < 1e-12 * m.norm()) {
    Index r, c;
    m.cwiseAbs().maxCoeff(&r, &c);
    t = m(r, c);
  }
  if (std::abs(t) > 0) m *= std::conj(t) / std::abs(t);
  return hermitize(m);
}

}  // namespace

SpectralReport spectral_analyze(const TransferMatrix& t, const SpectralOptions& opt) {
  require(t.left_dim == t.right_dim, ErrorCode::NonSquareBond, "spectral analysis needs Dl == Dr");
  require(t.matrix.allFinite(), ErrorCode::NumericalFailure, "transfer matrix has non-finite entries");
  const Index D = t.left_dim;
  const Matrix& e = t.matrix;

  Eigen::ComplexEigenSolver<Matrix> right(e, true);
  Eigen::ComplexEigenSolver<Matrix> left(e.transpose(), true);
  require(right.info() == Eigen::Success && left.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "eigensolver did not converge");

  const Index n = e.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = right.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });

  SpectralReport rep;
  rep.lambda1 = ev(order[0]);
  const double l1 = std::abs(rep.lambda1);
  require(l1 > 0, ErrorCode::NumericalFailure, "transfer matrix is nilpotent");
  for (Index k : order) rep.eigenvalues.push_back(ev(k) / rep.lambda1);

  rep.degeneracy_b = 0;
  for (const auto& z : rep.eigenvalues)
    if (std::abs(z) > 1.0 - opt.tol) ++rep.degeneracy_b;

  if (rep.eigenvalues.size() < 2 || std::abs(rep.eigenvalues[1]) == 0.0) {
    rep.xi = 0.0;
  } else if (rep.degeneracy_b > 1) {
    rep.xi = std::numeric_limits<double>::infinity();
  } else {
    rep.xi = -1.0 / std::log(std::abs(rep.eigenvalues[1]));
  }

  // left eigenvector belonging to the eigenvalue closest to lambda1
  const auto& lev = left.eigenvalues();
  Index li = 0;
  for (Index k = 1; k < n; ++k)
    if (std::abs(lev(k) - rep.lambda1) < std::abs(lev(li) - rep.lambda1)) li = k;

  rep.rho = fix_phase(reshape_square(right.eigenvectors().col(order[0]), D));
  rep.left_fixed = fix_phase(reshape_square(left.eigenvectors().col(li), D));
  rep.rho /= rep.rho.trace().real();
  cplx pairing = (rep.left_fixed.cwiseProduct(rep.rho)).sum();
  if (std::abs(pairing) > 1e-12) rep.left_fixed /= pairing.real();

  rep.rho_min_eig = min_hermitian_eigenvalue(rep.rho);
  rep.left_min_eig = min_hermitian_eigenvalue(rep.left_fixed);
  if (rep.degeneracy_b == 1) {
    require(rep.rho_min_eig >= -opt.positivity_floor && rep.left_min_eig >= -opt.positivity_floor,
            ErrorCode::NotPositive, "unique fixed point is not positive semidefinite");
  }
  rep.is_normal = rep.degeneracy_b == 1 && rep.rho_min_eig > opt.positivity_floor &&
                  rep.left_min_eig > opt.positivity_floor;
  return rep;
}

SpectralReport spectral_analyze(const SiteTensor& a, const SpectralOptions& opt) {
  return spectral_analyze(transfer_matrix(a), opt);
}

SiteTensor canonical_gauge(const SiteTensor& a, const GaugeOptions& opt) {
  SpectralReport rep = spectral_analyze(a);
  require(rep.is_normal, ErrorCode::NotNormal, "canonical gauge needs a normal tensor");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rep.left_fixed);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  require(lo > 0 && hi / lo <= opt.max_condition, ErrorCode::IllConditioned,
          "left fixed point condition number " + std::to_string(hi / lo));
  RealVector s = es.eigenvalues().cwiseSqrt();
  Matrix sq = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
  Matrix isq = es.eigenvectors() * s.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  double norm = std::sqrt(std::abs(rep.lambda1));
  std::vector<Matrix> out;
  for (const auto& m : a.matrices()) out.push_back(sq * m * isq / norm);
  return SiteTensor(std::move(out));
}

SiteTensor block_sites(std::span<const SiteTensor> sites, std::uint64_t budget) {
  require(!sites.empty(), ErrorCode::InvalidArgument, "nothing to block");
  long double entries = static_cast<long double>(sites.front().left_dim()) * sites.back().right_dim();
  for (const auto& s : sites) entries *= s.phys_dim();
  require(entries <= static_cast<long double>(budget), ErrorCode::SizeOverflow,
          "blocked tensor would have " + std::to_string(static_cast<double>(entries)) + " entries");
  for (std::size_t i = 0; i + 1 < sites.size(); ++i)
    require(sites[i].right_dim() == sites[i + 1].left_dim(), ErrorCode::ShapeMismatch, "bond mismatch while blocking");

  std::vector<Matrix> cur(sites.front().matrices().begin(), sites.front().matrices().end());
  for (std::size_t n = 1; n < sites.size(); ++n) {
    std::vector<Matrix> next;
    next.reserve(cur.size() * static_cast<std::size_t>(sites[n].phys_dim()));
    for (const auto& m : cur)
      for (const auto& a : sites[n].matrices()) next.push_back(m * a);
    cur = std::move(next);
  }
  return SiteTensor(std::move(cur));
}

SiteTensor block(const SiteTensor& a, int q, std::uint64_t budget) {
  require(q >= 1, ErrorCode::InvalidArgument, "block size must be >= 1");
  std::vector<SiteTensor> sites(static_cast<std::size_t>(q), a);
  return block_sites(sites, budget);
}

// ---------------------------------------------------------------------------

namespace {

// Walk two chains in lockstep and call f(bra_tensor, ket_tensor, run_length).
template <class F>
void zip_runs(const MpsChain& a, const MpsChain& b, F&& f) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "chains have different lengths");
  require(a.boundary() == b.boundary(), ErrorCode::InvalidArgument, "chains have different boundaries");
  const auto& sa = a.segments();
  const auto& sb = b.segments();
  std::size_t ia = 0, ib = 0;
  std::uint64_t ra = sa[0].repeat, rb = sb[0].repeat;
  while (ia < sa.size() && ib < sb.size()) {
    std::uint64_t len = std::min(ra, rb);
    f(sa[ia].tensor, sb[ib].tensor, len);
    ra -= len;
    rb -= len;
    if (ra == 0 && ++ia < sa.size()) ra = sa[ia].repeat;
    if (rb == 0 && ++ib < sb.size()) rb = sb[ib].repeat;
  }
}

ScaledScalar raw_overlap(const MpsChain& bra, const MpsChain& ket) {
  if (bra.boundary() == Boundary::Periodic) {
    ScaledMatrix acc;
    bool first = true;
    zip_runs(bra, ket, [&](const SiteTensor& x, const SiteTensor& y, std::uint64_t len) {
      Matrix e = mixed_transfer(x, y);
      ScaledMatrix p = len == 1 ? ScaledMatrix{e, 0.0} : scaled_power(e, len);
      if (len == 1) p.normalize();
      acc = first ? p : scaled_product(acc, p);
      first = false;
    });
    return scaled_trace(acc);
  }
  Eigen::RowVectorXcd v = kron(bra.left().conjugate(), ket.left()).transpose();
  double log_scale = 0.0;
  auto renorm = [&] {
    double n = v.cwiseAbs().maxCoeff();
    if (n > 0 && std::isfinite(n)) {
      v /= n;
      log_scale += std::log(n);
    }
  };
  zip_runs(bra, ket, [&](const SiteTensor& x, const SiteTensor& y, std::uint64_t len) {
    Matrix e = mixed_transfer(x, y);
    if (len <= 16) {
      for (std::uint64_t r = 0; r < len; ++r) {
        v = v * e;
        renorm();
      }
    } else {
      ScaledMatrix p = scaled_power(e, len);
      v = v * p.m;
      log_scale += p.log_scale;
      renorm();
    }
  });
  Vector rv = kron(bra.right().conjugate(), ket.right());
  return make_scaled((v * rv)(0, 0), log_scale);
}

}  // namespace

OverlapResult mps_overlap(const MpsChain& bra, const MpsChain& ket) {
  OverlapResult r;
  r.raw = raw_overlap(bra, ket);
  ScaledScalar n1 = raw_overlap(bra, bra);
  ScaledScalar n2 = raw_overlap(ket, ket);
  require(std::isfinite(n1.log_abs) && std::isfinite(n2.log_abs), ErrorCode::NumericalFailure,
          "chain has zero norm");
  r.log_norm1 = 0.5 * n1.log_abs;
  r.log_norm2 = 0.5 * n2.log_abs;
  if (std::isfinite(r.raw.log_abs))
    r.overlap = std::exp(r.raw.log_abs - r.log_norm1 - r.log_norm2) * r.raw.phase;
  else
    r.overlap = 0.0;
  return r;
}

double error_metric(const MpsChain& a, const MpsChain& b) { return 1.0 - std::abs(mps_overlap(a, b).overlap); }

Vector mps_to_dense(const MpsChain& c, std::uint64_t max_dim) {
  long double dim = 1;
  for (const auto& s : c.segments()) dim *= std::pow(static_cast<long double>(s.tensor.phys_dim()), s.repeat);
  require(dim <= static_cast<long double>(max_dim), ErrorCode::TooLarge, "dense state too large");
  auto sites = c.sites();
  const bool open = c.boundary() == Boundary::Open;
  const Index dl0 = open ? 1 : sites.front().left_dim();

  // rows: prefix * dl0 + l0, cols: current right bond
  Matrix z;
  {
    const SiteTensor& a = sites.front();
    z.resize(a.phys_dim() * dl0, a.right_dim());
    for (int s = 0; s < a.phys_dim(); ++s) {
      if (open)
        z.row(s) = c.left().transpose() * a[s];
      else
        z.middleRows(s * dl0, dl0) = a[s];
    }
  }
  for (std::size_t n = 1; n < sites.size(); ++n) {
    const SiteTensor& a = sites[n];
    const Index prefixes = z.rows() / dl0;
    const int d = a.phys_dim();
    Matrix nz(z.rows() * d, a.right_dim());
    for (int s = 0; s < d; ++s) {
      Matrix y = z * a[s];
      for (Index p = 0; p < prefixes; ++p) nz.middleRows((p * d + s) * dl0, dl0) = y.middleRows(p * dl0, dl0);
    }
    z = std::move(nz);
  }
  const Index total = z.rows() / dl0;
  Vector psi(total);
  for (Index p = 0; p < total; ++p) {
    if (open)
      psi(p) = (z.row(p) * c.right())(0, 0);
    else
      psi(p) = z.middleRows(p * dl0, dl0).trace();
  }
  return psi;
}

}  // namespace mpsrg
