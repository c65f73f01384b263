#include "mpsrg/variational.hpp"

#include <algorithm>
#include <cmath>

#include "mpsrg/error.hpp"
#include "mpsrg/polar.hpp"

namespace mpsrg {

namespace {

// Open chain as explicit tensors with the boundary vectors folded into the end sites.
std::vector<SiteTensor> absorb_boundaries(const MpsChain& chain) {
  require(chain.boundary() == Boundary::Open, ErrorCode::InvalidArgument, "variational path needs an open chain");
  std::vector<SiteTensor> sites = chain.sites();
  SiteTensor& first = sites.front();
  if (first.left_dim() != 1 || chain.left().size() != 1 || chain.left()(0) != cplx(1.0)) {
    SiteTensor t(first.phys_dim(), 1, first.right_dim());
    for (int s = 0; s < first.phys_dim(); ++s) t[s] = chain.left().transpose() * first[s];
    first = std::move(t);
  }
  SiteTensor& last = sites.back();
  if (last.right_dim() != 1 || chain.right().size() != 1 || chain.right()(0) != cplx(1.0)) {
    SiteTensor t(last.phys_dim(), last.left_dim(), 1);
    for (int s = 0; s < last.phys_dim(); ++s) t[s] = last[s] * chain.right();
    last = std::move(t);
  }
  return sites;
}

struct Env {
  Matrix m;
  double lg = 0.0;

  static Env one() { return {Matrix::Ones(1, 1), 0.0}; }
  Env& normalize() {
    const double n = m.norm();
    if (n > 0 && std::isfinite(n)) {
      m /= n;
      lg += std::log(n);
    }
    return *this;
  }
};

struct Blocks {
  std::vector<SiteTensor> t;
  double log_norm = 0.0;  // ln ||phi_pos||

  std::size_t bonds() const { return t.size() - 1; }
  int bond_dim(std::size_t i) const { return t[i].right_dim(); }
};

Blocks load(const MpsChain& positive) {
  Blocks b;
  b.t = absorb_boundaries(positive);
  require(b.t.size() >= 2, ErrorCode::InvalidArgument, "need at least two blocks");
  for (const auto& t : b.t)
    require(t.phys_dim() == t.left_dim() * t.right_dim(), ErrorCode::DimensionMismatch,
            "positive block must have physical leg (left, right)");
  MpsChain c = MpsChain::open(b.t, Vector::Ones(1), Vector::Ones(1));
  b.log_norm = mps_overlap(c, c).log_norm1;
  return b;
}

Matrix pair_matrix(const Vector& w, int D) {
  Matrix m(D, D);
  for (int b = 0; b < D; ++b)
    for (int a = 0; a < D; ++a) m(b, a) = w(b * D + a);
  return m;
}

// v(r, b) = sum_{l,a} L(l, a) conj(T[a Dr + b](l, r))
Env absorb_left(const Env& l, const SiteTensor& t) {
  const int dl = t.left_dim(), dr = t.right_dim();
  Env v{Matrix::Zero(dr, dr), l.lg};
  for (int a = 0; a < dl; ++a)
    for (int b = 0; b < dr; ++b) v.m.col(b) += t[a * dr + b].adjoint() * l.m.col(a);
  return v;
}

// u(l, a) = sum_{r,b} conj(T[a Dr + b](l, r)) R(r, b)
Env absorb_right(const Env& r, const SiteTensor& t) {
  const int dl = t.left_dim(), dr = t.right_dim();
  Env u{Matrix::Zero(dl, dl), r.lg};
  for (int a = 0; a < dl; ++a)
    for (int b = 0; b < dr; ++b) u.m.col(a) += t[a * dr + b].conjugate() * r.m.col(b);
  return u;
}

// Ls[i] sits left of block i
std::vector<Env> left_envs(const Blocks& bl, const PairGateSet& g) {
  std::vector<Env> ls(bl.t.size());
  ls[0] = Env::one();
  for (std::size_t i = 0; i < bl.bonds(); ++i) {
    Env v = absorb_left(ls[i], bl.t[i]);
    ls[i + 1] = Env{v.m * pair_matrix(g.pair(i), bl.bond_dim(i)), v.lg}.normalize();
  }
  return ls;
}

// Rs[i] sits right of block i
std::vector<Env> right_envs(const Blocks& bl, const PairGateSet& g) {
  std::vector<Env> rs(bl.t.size());
  rs.back() = Env::one();
  for (std::size_t i = bl.bonds(); i-- > 0;) {
    Env u = absorb_right(rs[i + 1], bl.t[i + 1]);
    rs[i] = Env{u.m * pair_matrix(g.pair(i), bl.bond_dim(i)).transpose(), u.lg}.normalize();
  }
  return rs;
}

Matrix bond_environment(const Blocks& bl, std::size_t i, const Env& l, const Env& r) {
  Env v = absorb_left(l, bl.t[i]);
  Env u = absorb_right(r, bl.t[i + 1]);
  Matrix e = v.m.transpose() * u.m;  // e(b, a')
  const int D = bl.bond_dim(i);
  const double scale = std::exp(v.lg + u.lg - bl.log_norm);
  Matrix env = Matrix::Zero(D * D, D * D);
  for (int b = 0; b < D; ++b)
    for (int a = 0; a < D; ++a) env(0, b * D + a) = scale * e(b, a);
  return env;
}

void check_gates(const Blocks& bl, const PairGateSet& g) {
  require(g.gates.size() == bl.bonds(), ErrorCode::DimensionMismatch, "one pair gate per internal bond expected");
  for (std::size_t i = 0; i < bl.bonds(); ++i) {
    const Index n = static_cast<Index>(bl.bond_dim(i)) * bl.bond_dim(i);
    require(g.gates[i].rows() == n && g.gates[i].cols() == n, ErrorCode::DimensionMismatch,
            "pair gate does not match its bond");
  }
}

cplx overlap_of(const Blocks& bl, const PairGateSet& g) {
  std::vector<Env> ls = left_envs(bl, g);
  Env v = absorb_left(ls.back(), bl.t.back());
  return v.m(0, 0) * std::exp(v.lg - bl.log_norm);
}

Matrix gate_from_pair(const Vector& w) {
  const double n = w.norm();
  Matrix col(w.size(), 1);
  if (n > 0) {
    col.col(0) = w / n;
  } else {
    col.setZero();
    col(0, 0) = 1.0;
  }
  return complete_to_unitary(col);
}

}  // namespace

PositiveChain positive_chain(const MpsChain& chain, int q, RemainderPolicy policy, double rel_cutoff) {
  std::vector<SiteTensor> sites = absorb_boundaries(chain);
  PositiveChain out;
  out.blocks = block_sizes(sites.size(), q, policy);
  std::vector<SiteTensor> pos;
  std::size_t off = 0;
  PolarOptions popt;
  popt.rel_cutoff = rel_cutoff;
  for (int size : out.blocks) {
    std::span<const SiteTensor> span(sites.data() + off, static_cast<std::size_t>(size));
    PolarSplit split = polar_split(block_sites(span), popt);
    pos.push_back(split.positive_tensor());
    out.isometries.push_back(split.V);
    off += static_cast<std::size_t>(size);
  }
  out.chain = MpsChain::open(std::move(pos), Vector::Ones(1), Vector::Ones(1));
  return out;
}

void PairGateSet::validate(double tol) const {
  for (const auto& g : gates)
    require(g.rows() == g.cols() && isometry_defect(g) < tol, ErrorCode::NumericalFailure, "pair gate is not unitary");
}

cplx pair_overlap(const PairGateSet& gates, const MpsChain& positive) {
  Blocks bl = load(positive);
  check_gates(bl, gates);
  return overlap_of(bl, gates);
}

Matrix environment(std::size_t bond, const PairGateSet& gates, const MpsChain& positive) {
  Blocks bl = load(positive);
  check_gates(bl, gates);
  require(bond < bl.bonds(), ErrorCode::IndexOutOfRange, "bond index out of range");
  std::vector<Env> ls = left_envs(bl, gates), rs = right_envs(bl, gates);
  return bond_environment(bl, bond, ls[bond], rs[bond + 1]);
}

Matrix update_gate(const Matrix& env) {
  require(env.rows() == env.cols(), ErrorCode::DimensionMismatch, "environment must be square");
  require(env.allFinite(), ErrorCode::NumericalFailure, "environment is not finite");
  Eigen::JacobiSVD<Matrix> svd(env, Eigen::ComputeFullU | Eigen::ComputeFullV);
  require(svd.info() == Eigen::Success, ErrorCode::NumericalFailure, "SVD of the environment failed");
  return svd.matrixV() * svd.matrixU().adjoint();
}

PairGateSet analytic_pairs(const MpsChain& positive) {
  Blocks bl = load(positive);
  const std::size_t m = bl.t.size();
  // standard environments: L <- sum A^dag L A from the left, R <- sum A R A^dag from the right
  std::vector<Matrix> ls(m + 1), rs(m + 1);
  ls[0] = Matrix::Ones(1, 1);
  for (std::size_t i = 0; i < m; ++i) {
    Matrix x = Matrix::Zero(bl.t[i].right_dim(), bl.t[i].right_dim());
    for (const auto& a : bl.t[i].matrices()) x += a.adjoint() * ls[i] * a;
    const double n = x.norm();
    ls[i + 1] = n > 0 ? Matrix(x / n) : x;
  }
  rs[m] = Matrix::Ones(1, 1);
  for (std::size_t i = m; i-- > 0;) {
    Matrix x = Matrix::Zero(bl.t[i].left_dim(), bl.t[i].left_dim());
    for (const auto& a : bl.t[i].matrices()) x += a * rs[i + 1] * a.adjoint();
    const double n = x.norm();
    rs[i] = n > 0 ? Matrix(x / n) : x;
  }
  PairGateSet g;
  for (std::size_t i = 0; i < bl.bonds(); ++i) {
    Matrix w = psd_sqrt(hermitize(ls[i + 1])) * psd_sqrt(hermitize(rs[i + 1]));
    const int D = bl.bond_dim(i);
    Vector v(D * D);
    for (int b = 0; b < D; ++b)
      for (int a = 0; a < D; ++a) v(b * D + a) = w(b, a);
    g.gates.push_back(gate_from_pair(v));
  }
  return g;
}

PairGateSet haar_pairs(const MpsChain& positive, std::uint64_t seed) {
  Blocks bl = load(positive);
  std::mt19937_64 rng(seed);
  PairGateSet g;
  g.seed = seed;
  for (std::size_t i = 0; i < bl.bonds(); ++i) g.gates.push_back(haar_unitary(bl.bond_dim(i) * bl.bond_dim(i), rng));
  return g;
}

double VariationalResult::epsilon() const { return 1.0 - std::sqrt(std::max(0.0, fidelity)); }

VariationalResult sweep_from(const MpsChain& positive, PairGateSet init, const VariationalOptions& opt) {
  require(opt.tol > 0, ErrorCode::InvalidArgument, "tol must be positive");
  Blocks bl = load(positive);
  check_gates(bl, init);
  VariationalResult res;
  res.gates = std::move(init);
  PairGateSet& g = res.gates;
  SweepReport& rep = res.report;
  double f = std::norm(overlap_of(bl, g));
  rep.fidelities.push_back(f);

  auto update = [&](std::size_t i, const Env& l, const Env& r) {
    Matrix env = bond_environment(bl, i, l, r);
    g.gates[i] = update_gate(env);
    f = std::norm((env.row(0).transpose().cwiseProduct(g.gates[i].col(0))).sum());
    rep.updates.push_back(f);
  };
  for (int s = 0; s < opt.max_sweeps; ++s) {
    const double before = rep.fidelities.back();
    std::vector<Env> rs = right_envs(bl, g);
    Env l = Env::one();
    for (std::size_t i = 0; i < bl.bonds(); ++i) {
      update(i, l, rs[i + 1]);
      Env v = absorb_left(l, bl.t[i]);
      l = Env{v.m * pair_matrix(g.pair(i), bl.bond_dim(i)), v.lg}.normalize();
    }
    std::vector<Env> ls = left_envs(bl, g);
    Env r = Env::one();
    for (std::size_t i = bl.bonds(); i-- > 0;) {
      update(i, ls[i], r);
      Env u = absorb_right(r, bl.t[i + 1]);
      r = Env{u.m * pair_matrix(g.pair(i), bl.bond_dim(i)).transpose(), u.lg}.normalize();
    }
    rep.fidelities.push_back(f);
    rep.sweeps_used = s + 1;
    if (f - before < opt.tol) {
      rep.converged = true;
      break;
    }
  }
  res.fidelity = f;
  return res;
}

double SweepReport::max_drop() const {
  double drop = 0.0;
  for (const auto* seq : {&fidelities, &updates})
    for (std::size_t i = 1; i < seq->size(); ++i) drop = std::max(drop, (*seq)[i - 1] - (*seq)[i]);
  return drop;
}

VariationalResult optimize_positive(const MpsChain& positive, const VariationalOptions& opt) {
  const int runs = std::max(1, opt.seeds);
  VariationalResult best;
  best.fidelity = -1.0;
  std::vector<SweepReport> reports;
  for (int r = 0; r < runs; ++r) {
    PairGateSet init;
    if (r == 0 && opt.analytic_init) {
      init = analytic_pairs(positive);
      init.seed = opt.seed;
    } else {
      std::seed_seq ss{opt.seed, static_cast<std::uint64_t>(r)};
      std::uint64_t s;
      ss.generate(reinterpret_cast<std::uint32_t*>(&s), reinterpret_cast<std::uint32_t*>(&s) + 2);
      init = haar_pairs(positive, s);
    }
    VariationalResult res = sweep_from(positive, std::move(init), opt);
    res.best_run = r;
    reports.push_back(res.report);
    if (res.fidelity > best.fidelity) best = std::move(res);
  }
  best.runs = std::move(reports);
  return best;
}

VariationalResult optimize(const MpsChain& target, int q, const VariationalOptions& opt) {
  return optimize_positive(positive_chain(target, q).chain, opt);
}

}  // namespace mpsrg
