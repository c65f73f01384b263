#include "mpsrg/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mpsrg/error.hpp"

namespace mpsrg {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Sequential: return "sequential";
    case Scheme::SequentialRG: return "sequential-rg";
    case Scheme::TreeRG: return "tree-rg";
    case Scheme::TreeRGMeasured: return "tree-rg-measured";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view s) {
  for (Scheme k : {Scheme::Sequential, Scheme::SequentialRG, Scheme::TreeRG, Scheme::TreeRGMeasured})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::UnsupportedScheme, "unknown scheme '" + std::string(s) + "'");
}

std::string_view to_string(GateKind k) {
  switch (k) {
    case GateKind::Isometry: return "isometry";
    case GateKind::Swap: return "swap";
    case GateKind::PairPrep: return "pair";
    case GateKind::GhzPrep: return "ghz";
  }
  return "unknown";
}

std::size_t CircuitIR::count(GateKind k) const {
  std::size_t n = 0;
  for (const auto& l : layers)
    for (const auto& g : l) n += g.kind == k;
  return n;
}

std::size_t CircuitIR::layers_with(GateKind k) const {
  std::size_t n = 0;
  for (const auto& l : layers)
    n += std::any_of(l.begin(), l.end(), [&](const Gate& g) { return g.kind == k; });
  return n;
}

std::size_t CircuitIR::nonlocal_gates() const {
  std::size_t n = 0;
  for (const auto& l : layers)
    for (const auto& g : l) n += g.nonlocal;
  return n;
}

void CircuitIR::validate() const {
  const int nreg = static_cast<int>(registers.size());
  for (const auto& layer : layers) {
    std::set<int> used;
    for (const auto& g : layer) {
      require(!g.support.empty(), ErrorCode::InvalidArgument, "gate without support");
      for (int r : g.support) {
        require(r >= 0 && r < nreg, ErrorCode::IndexOutOfRange, "gate touches a missing register");
        require(used.insert(r).second, ErrorCode::InvalidArgument, "two gates share a register within a layer");
      }
      if (g.kind == GateKind::Isometry || g.kind == GateKind::Swap) {
        auto [lo, hi] = std::minmax_element(g.support.begin(), g.support.end());
        const bool contiguous = *hi - *lo + 1 == static_cast<int>(g.support.size());
        require(contiguous || g.nonlocal, ErrorCode::InvalidArgument, "local gate with non-contiguous support");
      }
    }
  }
}

// ---------------------------------------------------------------------------

CircuitBuilder::CircuitBuilder(std::vector<int> register_dims)
    : dims_(std::move(register_dims)), ready_(dims_.size(), 0) {}

void CircuitBuilder::add(Gate g) {
  std::size_t layer = 0;
  for (int r : g.support) {
    require(r >= 0 && r < static_cast<int>(dims_.size()), ErrorCode::IndexOutOfRange, "register out of range");
    layer = std::max(layer, ready_[static_cast<std::size_t>(r)]);
  }
  if (layers_.size() <= layer) layers_.resize(layer + 1);
  for (int r : g.support) ready_[static_cast<std::size_t>(r)] = layer + 1;
  layers_[layer].push_back(std::move(g));
}

void CircuitBuilder::swap(int r1, int r2) {
  Gate g;
  g.kind = GateKind::Swap;
  g.support = {r1, r2};
  g.nonlocal = std::abs(r1 - r2) != 1;
  add(std::move(g));
}

void CircuitBuilder::move(int from, int to) {
  const int step = to > from ? 1 : -1;
  for (int r = from; r != to; r += step) swap(std::min(r, r + step), std::max(r, r + step));
}

CircuitIR CircuitBuilder::finish(CircuitMetadata meta) && {
  CircuitIR c;
  c.registers = std::move(dims_);
  c.layers = std::move(layers_);
  c.meta = std::move(meta);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct Window {
  std::vector<int> support;
  std::vector<int> dims;
  std::vector<std::uint64_t> stride;
  std::uint64_t size = 1;

  int pos(int reg) const {
    return static_cast<int>(std::find(support.begin(), support.end(), reg) - support.begin());
  }
};

Window make_window(const std::vector<Leg>& a, const std::vector<Leg>& b, const std::vector<int>& register_dims) {
  std::set<int> regs;
  for (const auto* legs : {&a, &b})
    for (const auto& l : *legs)
      for (int r : l.registers) regs.insert(r);
  Window w;
  w.support.assign(regs.begin(), regs.end());
  for (int r : w.support) {
    require(r >= 0 && r < static_cast<int>(register_dims.size()), ErrorCode::IndexOutOfRange, "leg register");
    w.dims.push_back(register_dims[static_cast<std::size_t>(r)]);
  }
  w.stride.assign(w.dims.size(), 1);
  for (std::size_t p = w.dims.size(); p-- > 0;) {
    w.stride[p] = w.size;
    w.size *= static_cast<std::uint64_t>(w.dims[p]);
  }
  return w;
}

std::uint64_t leg_product(const std::vector<Leg>& legs) {
  std::uint64_t n = 1;
  for (const auto& l : legs) n *= static_cast<std::uint64_t>(l.dim);
  return n;
}

// window basis index for a joint leg index (first leg most significant)
std::vector<std::uint64_t> encode_all(const std::vector<Leg>& legs, const Window& w,
                                      const std::vector<int>& register_dims) {
  std::set<int> seen;
  for (const auto& l : legs) {
    std::uint64_t cap = 1;
    for (int r : l.registers) {
      require(seen.insert(r).second, ErrorCode::InvalidArgument, "register used by two legs on the same side");
      cap *= static_cast<std::uint64_t>(register_dims[static_cast<std::size_t>(r)]);
    }
    require(static_cast<std::uint64_t>(l.dim) <= cap, ErrorCode::DimensionMismatch,
            "leg of dim " + std::to_string(l.dim) + " does not fit its registers");
  }
  const std::uint64_t total = leg_product(legs);
  std::vector<std::uint64_t> out(total);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rem = idx, win = 0;
    for (std::size_t li = legs.size(); li-- > 0;) {
      std::uint64_t v = rem % static_cast<std::uint64_t>(legs[li].dim);
      rem /= static_cast<std::uint64_t>(legs[li].dim);
      const auto& regs = legs[li].registers;
      for (std::size_t k = regs.size(); k-- > 0;) {
        const auto rd = static_cast<std::uint64_t>(register_dims[static_cast<std::size_t>(regs[k])]);
        win += (v % rd) * w.stride[static_cast<std::size_t>(w.pos(regs[k]))];
        v /= rd;
      }
    }
    out[idx] = win;
  }
  return out;
}

Matrix place_columns(const Matrix& completed, const std::vector<std::uint64_t>& first_cols) {
  const Index n = completed.rows();
  Matrix u(n, n);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (std::size_t x = 0; x < first_cols.size(); ++x) {
    u.col(static_cast<Index>(first_cols[x])) = completed.col(static_cast<Index>(x));
    taken[first_cols[x]] = true;
  }
  Index next = static_cast<Index>(first_cols.size());
  for (Index c = 0; c < n; ++c)
    if (!taken[static_cast<std::size_t>(c)]) u.col(c) = completed.col(next++);
  return u;
}

}  // namespace

Gate make_isometry_gate(const Matrix& v, const std::vector<Leg>& inputs, const std::vector<Leg>& outputs,
                        const std::vector<int>& register_dims, std::string label) {
  require(static_cast<std::uint64_t>(v.rows()) == leg_product(outputs) &&
              static_cast<std::uint64_t>(v.cols()) == leg_product(inputs),
          ErrorCode::DimensionMismatch, "isometry shape does not match its legs");
  const double defect = isometry_defect(v);
  require(defect < 1e-8, ErrorCode::NumericalFailure, "factor is not an isometry (defect " + std::to_string(defect) + ")");
  Window w = make_window(inputs, outputs, register_dims);
  auto in_idx = encode_all(inputs, w, register_dims);
  auto out_idx = encode_all(outputs, w, register_dims);

  Matrix vemb = Matrix::Zero(static_cast<Index>(w.size), v.cols());
  for (Index y = 0; y < v.rows(); ++y) vemb.row(static_cast<Index>(out_idx[static_cast<std::size_t>(y)])) = v.row(y);

  Gate g;
  g.kind = GateKind::Isometry;
  g.support = w.support;
  g.unitary = place_columns(complete_to_unitary(vemb), in_idx);
  g.input_basis = in_idx;
  for (std::size_t p = 0; p < w.support.size(); ++p) {
    bool zero = true;
    for (auto x : in_idx) zero = zero && (x / w.stride[p]) % static_cast<std::uint64_t>(w.dims[p]) == 0;
    if (zero) g.ancillas.push_back(w.support[p]);
  }
  g.nonlocal = w.support.back() - w.support.front() + 1 != static_cast<int>(w.support.size());
  g.label = std::move(label);
  return g;
}

EmbeddedUnitary embed_isometry(const Matrix& v) {
  require(v.cols() > 0 && v.rows() % v.cols() == 0, ErrorCode::DimensionMismatch,
          "output dimension must be a multiple of the input dimension");
  require(isometry_defect(v) < 1e-8, ErrorCode::NumericalFailure, "not an isometry");
  EmbeddedUnitary e;
  e.in_dim = static_cast<int>(v.cols());
  e.ancilla_dim = static_cast<int>(v.rows() / v.cols());
  std::vector<std::uint64_t> cols;
  for (int i = 0; i < e.in_dim; ++i) cols.push_back(static_cast<std::uint64_t>(i) * e.ancilla_dim);
  e.unitary = place_columns(complete_to_unitary(v), cols);
  return e;
}

// ---------------------------------------------------------------------------

std::vector<int> block_sizes(std::uint64_t n, int q, RemainderPolicy policy) {
  require(q >= 1, ErrorCode::InvalidArgument, "q must be >= 1");
  require(n >= static_cast<std::uint64_t>(q), ErrorCode::NotDivisible, "chain shorter than one block");
  const std::uint64_t m = n / static_cast<std::uint64_t>(q), rem = n % static_cast<std::uint64_t>(q);
  require(rem == 0 || policy == RemainderPolicy::AbsorbLast, ErrorCode::NotDivisible,
          "N = " + std::to_string(n) + " is not divisible by q = " + std::to_string(q));
  std::vector<int> b(m, q);
  b.back() += static_cast<int>(rem);
  return b;
}

namespace {

int width_for(int dim, int d) {
  int w = 0;
  std::int64_t cap = 1;
  while (cap < dim) {
    cap *= d;
    ++w;
  }
  return w;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> r;
  for (int i = lo; i < hi; ++i) r.push_back(i);
  return r;
}

Vector embed_pair(const Vector& w, int leg, int d) {
  Vector out = Vector::Zero(static_cast<Index>(d) * d);
  for (int b = 0; b < leg; ++b)
    for (int a = 0; a < leg; ++a) out(b * d + a) = w(b * leg + a);
  return out;
}

std::vector<int> offsets_of(const std::vector<int>& blocks) {
  std::vector<int> off(blocks.size(), 0);
  for (std::size_t i = 1; i < blocks.size(); ++i) off[i] = off[i - 1] + blocks[i - 1];
  return off;
}

void add_pairs(CircuitBuilder& cb, const std::vector<int>& blocks, const FixedPointState& fp, int d) {
  require(fp.leg_dim <= d, ErrorCode::DimensionMismatch, "pair legs do not fit a register (need D <= d)");
  require(fp.bonds == blocks.size(), ErrorCode::DimensionMismatch, "fixed point has a different number of bonds");
  auto off = offsets_of(blocks);
  const std::size_t m = blocks.size();
  auto r_of = [&](std::size_t i) { return off[i] + blocks[i] - 1; };
  auto l_of = [&](std::size_t i) { return off[(i + 1) % m]; };
  if (fp.branch_count() == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      Gate g;
      g.kind = GateKind::PairPrep;
      g.support = {r_of(i), l_of(i)};
      g.state = embed_pair(fp.pair(0, i), fp.leg_dim, d);
      g.nonlocal = std::abs(g.support[0] - g.support[1]) != 1;
      g.label = "pair " + std::to_string(i);
      cb.add(std::move(g));
    }
    return;
  }
  require(fp.translation_invariant(), ErrorCode::UnsupportedScheme, "branch backbone needs uniform pairs");
  Gate g;
  g.kind = GateKind::GhzPrep;
  for (std::size_t i = 0; i < m; ++i) {
    g.support.push_back(r_of(i));
    g.support.push_back(l_of(i));
  }
  g.alpha = fp.alpha;
  for (int j = 0; j < fp.branch_count(); ++j) g.branch_pairs.push_back(embed_pair(fp.pair(j, 0), fp.leg_dim, d));
  g.nonlocal = true;
  g.label = "branch backbone";
  cb.add(std::move(g));
}

struct PlannedFactor {
  Matrix matrix;
  std::vector<Leg> in, out;
  std::string label;
};

// staircase of a sequential decomposition on registers [o, o + q); a and b hold the input legs
void place_sequential(CircuitBuilder& cb, const SequentialDecomposition& dec, int o, int d, int a_reg, int b_reg,
                      int leg_dim) {
  require(dec.center == dec.q - 1, ErrorCode::UnsupportedScheme, "circuits need the input leg on the last site");
  auto bond_regs = [&](int n) {
    int w = width_for(dec.bond_dims[static_cast<std::size_t>(n)], d);
    require(w <= n, ErrorCode::DimensionMismatch, "bond does not fit the registers left of it");
    return range(o + n - w, o + n);
  };
  std::vector<PlannedFactor> plan;
  for (const auto& f : dec.factors) {
    PlannedFactor p;
    p.matrix = f.matrix;
    require(f.phys == d, ErrorCode::DimensionMismatch, "physical dimension differs from register dimension");
    if (f.role == FactorRole::Center) {
      if (dec.input_dim > 1) {
        require(dec.input_dim == leg_dim * leg_dim, ErrorCode::DimensionMismatch, "input is not a pair of legs");
        p.in = {Leg{leg_dim, {a_reg}}, Leg{leg_dim, {b_reg}}};
      }
      p.out = {Leg{f.out_left, bond_regs(f.site)}, Leg{d, {o + f.site}}};
      p.label = "C site " + std::to_string(f.site);
    } else {
      require(f.role == FactorRole::LeftSweep, ErrorCode::UnsupportedScheme, "right sweep factors in a circuit");
      p.in = {Leg{f.in_dim, bond_regs(f.site + 1)}};
      p.out = {Leg{f.out_left, bond_regs(f.site)}, Leg{d, {o + f.site}}};
      p.label = "L site " + std::to_string(f.site);
    }
    plan.push_back(std::move(p));
  }
  // fold the single-register factor of site 0 into its predecessor
  if (plan.size() >= 2 && dec.factors.back().site == 0 && dec.factors.back().role == FactorRole::LeftSweep) {
    PlannedFactor last = std::move(plan.back());
    plan.pop_back();
    PlannedFactor& prev = plan.back();
    const Index rest = prev.matrix.rows() / last.matrix.cols();
    prev.matrix = kron(last.matrix, Matrix::Identity(rest, rest)) * prev.matrix;
    prev.out.front() = Leg{d, {o}};
    prev.label += "+site 0";
  }
  for (auto& p : plan) cb.add(make_isometry_gate(p.matrix, p.in, p.out, cb.dims(), p.label));
}

void place_tree(CircuitBuilder& cb, const TreeDecomposition& t, int span, int o, int leg, int d, bool measured) {
  const TreeNode& node = t.nodes.at(span);
  Matrix v = node.split.full_isometry();
  if (node.leaf()) {
    require(span >= 2, ErrorCode::InvalidArgument, "tree leaves need two sites for the two input legs");
    std::vector<Leg> out;
    for (int k = 0; k < span; ++k) out.push_back(Leg{d, {o + k}});
    cb.add(make_isometry_gate(v, {Leg{leg, {o}}, Leg{leg, {o + span - 1}}}, out, cb.dims(),
                              "leaf " + std::to_string(span)));
    return;
  }
  const int m = o + node.left_span;
  const int last = o + span - 1;
  int ra = o, rb = last;
  if (!measured) {
    ra = m - 2;
    rb = m + 1;
    cb.move(o, ra);
    cb.move(last, rb);
  }
  std::vector<Leg> out = {Leg{leg, {ra}}, Leg{leg, {m - 1}}, Leg{leg, {m}}, Leg{leg, {rb}}};
  cb.add(make_isometry_gate(v, {Leg{leg, {ra}}, Leg{leg, {rb}}}, out, cb.dims(), "node " + std::to_string(span)));
  if (!measured) {
    cb.move(ra, o);
    cb.move(rb, last);
  }
  place_tree(cb, t, node.left_span, o, leg, d, measured);
  place_tree(cb, t, node.right_span, m, leg, d, measured);
}

CircuitMetadata base_meta(Scheme s, const std::vector<int>& blocks, int d, int leg) {
  CircuitMetadata m;
  m.scheme = s;
  m.n = static_cast<std::uint64_t>(std::accumulate(blocks.begin(), blocks.end(), 0));
  m.q = blocks.empty() ? 0 : blocks.front();
  m.d = d;
  m.leg_dim = leg;
  m.blocks = blocks;
  return m;
}

}  // namespace

CircuitIR assemble_sequential_rg(const std::vector<int>& blocks, const std::map<int, SequentialDecomposition>& decomps,
                                 const FixedPointState& fp, int d) {
  const int n = std::accumulate(blocks.begin(), blocks.end(), 0);
  CircuitBuilder cb(std::vector<int>(static_cast<std::size_t>(n), d));
  add_pairs(cb, blocks, fp, d);
  auto off = offsets_of(blocks);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const int q = blocks[i], o = off[i];
    require(q >= 2, ErrorCode::InvalidArgument, "sequential RG blocks need at least two sites");
    cb.move(o, o + q - 2);
    place_sequential(cb, decomps.at(q), o, d, o + q - 2, o + q - 1, fp.leg_dim);
  }
  auto meta = base_meta(Scheme::SequentialRG, blocks, d, fp.leg_dim);
  if (fp.branch_count() > 1) meta.notes = "branch backbone prepared by a constant-depth measured GHZ placeholder";
  return std::move(cb).finish(meta);
}

CircuitIR assemble_tree_rg(const std::vector<int>& blocks, const std::map<int, TreeDecomposition>& trees,
                           const FixedPointState& fp, int d, bool measured) {
  const int n = std::accumulate(blocks.begin(), blocks.end(), 0);
  CircuitBuilder cb(std::vector<int>(static_cast<std::size_t>(n), d));
  add_pairs(cb, blocks, fp, d);
  auto off = offsets_of(blocks);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const TreeDecomposition& t = trees.at(blocks[i]);
    require(t.preblock == 1 && t.d == d, ErrorCode::UnsupportedScheme, "tree circuits need one site per leaf unit");
    place_tree(cb, t, t.q, off[i], fp.leg_dim, d, measured);
  }
  auto meta = base_meta(measured ? Scheme::TreeRGMeasured : Scheme::TreeRG, blocks, d, fp.leg_dim);
  auto ir = std::move(cb).finish(meta);
  if (measured)
    ir.meta.notes = std::to_string(ir.nonlocal_gates()) +
                    " non-local gates, each realized by gate teleportation (Bell pairs, measurement, "
                    "Pauli feed-forward) at constant depth";
  if (fp.branch_count() > 1)
    ir.meta.notes += std::string(ir.meta.notes.empty() ? "" : "; ") +
                     "branch backbone prepared by a constant-depth measured GHZ placeholder";
  return ir;
}

CircuitIR assemble_sequential(const SequentialDecomposition& chain, int d) {
  require(chain.input_dim == 1, ErrorCode::DimensionMismatch, "staircase needs a state (input dim 1)");
  CircuitBuilder cb(std::vector<int>(static_cast<std::size_t>(chain.q), d));
  place_sequential(cb, chain, 0, d, -1, -1, 1);
  return std::move(cb).finish(base_meta(Scheme::Sequential, {chain.q}, d, 0));
}

// ---------------------------------------------------------------------------

std::int64_t t_iso(int m, int n) {
  require(m >= 0 && m <= n && n < 60, ErrorCode::InvalidArgument, "t_iso needs 0 <= m <= n");
  const std::int64_t num = (std::int64_t{1} << (n + m + 1)) - (std::int64_t{1} << (2 * m)) - 2 * n - m - 1;
  // ceil division that is also right for negative numerators
  return num >= 0 ? (num + 3) / 4 : -((-num) / 4);
}

namespace {

int log2_exact(int x, const char* what) {
  require(x >= 1 && (x & (x - 1)) == 0, ErrorCode::UnsupportedScheme,
          std::string(what) + " must be a power of two for CNOT counting");
  int k = 0;
  while ((1 << k) < x) ++k;
  return k;
}

}  // namespace

DepthReport cnot_depth(Scheme scheme, std::uint64_t n, int q, int d, int D) {
  const int nd = log2_exact(d, "d"), nb = log2_exact(D, "D");
  DepthReport r;
  r.scheme = scheme;
  r.n = n;
  r.q = q;
  auto add = [&](std::string name, std::uint64_t c) { r.breakdown.emplace_back(std::move(name), c); };
  if (scheme == Scheme::Sequential) {
    require(n >= 2, ErrorCode::InvalidArgument, "sequential scheme needs N >= 2");
    r.q = 0;
    add("boundary", static_cast<std::uint64_t>(t_iso(0, nb + nd)));
    add("bulk", (n - 2) * static_cast<std::uint64_t>(t_iso(nb, nb + nd)));
    r.layer_depth = n - 1;
  } else if (scheme == Scheme::SequentialRG) {
    require(q >= 2, ErrorCode::InvalidArgument, "sequential RG needs q >= 2");
    const auto qq = static_cast<std::uint64_t>(q);
    add("pair_prep", static_cast<std::uint64_t>(t_iso(0, 2 * nb)));
    add("swap", 3 * (qq - 2));
    require(nd >= nb, ErrorCode::DimensionMismatch, "register model needs D <= d");
    add("isometry", (qq - 2) * static_cast<std::uint64_t>(t_iso(2 * nb, 2 * nb + nd)));
    r.layer_depth = q == 2 ? 2 : 2 * qq - 2;
  } else {
    require(q >= 2, ErrorCode::InvalidArgument, "tree RG needs q >= 2");
    const bool measured = scheme == Scheme::TreeRGMeasured;
    add("pair_prep", static_cast<std::uint64_t>(t_iso(0, 2 * nb)));
    r.layer_depth = 1;
    std::vector<int> cur = {q};
    int level = 0;
    while (!cur.empty()) {
      std::uint64_t cost = 0, layers = 0;
      std::set<int> next;
      for (int s : cur) {
        auto [c1, c2] = tree_children(s);
        std::uint64_t c, l;
        if (c1 == 0) {
          require(s * nd >= 2 * nb, ErrorCode::InjectivityImpossible, "tree leaf of span " + std::to_string(s) + " is not injective");
          c = static_cast<std::uint64_t>(t_iso(2 * nb, s * nd));
          l = 1;
        } else {
          const std::uint64_t swaps = measured ? 0 : 2 * static_cast<std::uint64_t>(std::max(0, c1 - 2));
          c = static_cast<std::uint64_t>(t_iso(2 * nb, 4 * nb)) + 3 * swaps;
          l = 1 + swaps;
          next.insert(c1);
          next.insert(c2);
        }
        cost = std::max(cost, c);
        layers = std::max(layers, l);
      }
      add("level_" + std::to_string(level++), cost);
      r.layer_depth += layers;
      cur.assign(next.rbegin(), next.rend());
    }
  }
  for (const auto& [name, c] : r.breakdown) r.cnot_depth += c;
  return r;
}

}  // namespace mpsrg
