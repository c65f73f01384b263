#include "mpsrg/simulate.hpp"

#include <cmath>
#include <vector>

#include "mpsrg/error.hpp"

namespace mpsrg {

namespace {

struct Layout {
  std::vector<std::uint64_t> stride;  // per register
  std::uint64_t dim = 1;
};

Layout make_layout(const std::vector<int>& dims, std::uint64_t cap) {
  Layout l;
  l.stride.assign(dims.size(), 1);
  long double total = 1;
  for (int d : dims) total *= d;
  require(total <= static_cast<long double>(cap), ErrorCode::TooLarge,
          "state space of " + std::to_string(static_cast<double>(total)) + " amplitudes exceeds the cap");
  for (std::size_t r = dims.size(); r-- > 0;) {
    l.stride[r] = l.dim;
    l.dim *= static_cast<std::uint64_t>(dims[r]);
  }
  return l;
}

// Offsets of every window state (support order, first most significant) and the base
// indices with all support registers at zero.
struct Scatter {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint64_t> bases;
};

Scatter make_scatter(const std::vector<int>& dims, const Layout& lay, const std::vector<int>& support) {
  Scatter s;
  s.offsets = {0};
  for (int r : support) {
    std::vector<std::uint64_t> next;
    for (auto o : s.offsets)
      for (int v = 0; v < dims[static_cast<std::size_t>(r)]; ++v) next.push_back(o + v * lay.stride[r]);
    s.offsets = std::move(next);
  }
  std::vector<bool> in_support(dims.size(), false);
  for (int r : support) in_support[static_cast<std::size_t>(r)] = true;
  s.bases = {0};
  for (std::size_t r = 0; r < dims.size(); ++r) {
    if (in_support[r]) continue;
    std::vector<std::uint64_t> next;
    next.reserve(s.bases.size() * static_cast<std::size_t>(dims[r]));
    for (auto b : s.bases)
      for (int v = 0; v < dims[r]; ++v) next.push_back(b + v * lay.stride[r]);
    s.bases = std::move(next);
  }
  return s;
}

Vector ghz_state(const Gate& g, const std::vector<int>& dims) {
  // support is (R_0, L_1, R_1, L_2, ...): consecutive pairs of registers
  const std::size_t bonds = g.support.size() / 2;
  std::uint64_t total = 1;
  for (int r : g.support) total *= static_cast<std::uint64_t>(dims[static_cast<std::size_t>(r)]);
  Vector out = Vector::Zero(static_cast<Index>(total));
  for (std::size_t j = 0; j < g.branch_pairs.size(); ++j) {
    Vector v = Vector::Ones(1);
    for (std::size_t i = 0; i < bonds; ++i) v = kron(v, g.branch_pairs[j]);
    out += g.alpha[j] * v;
  }
  return out;
}

}  // namespace

Vector simulate_circuit(const CircuitIR& c, const SimulationOptions& opt) {
  c.validate();
  Layout lay = make_layout(c.registers, opt.max_dim);
  Vector psi = Vector::Zero(static_cast<Index>(lay.dim));
  psi(0) = 1.0;
  const double tol2 = opt.ancilla_tol * opt.ancilla_tol;

  for (const auto& layer : c.layers) {
    for (const auto& g : layer) {
      Scatter sc = make_scatter(c.registers, lay, g.support);
      const Index w = static_cast<Index>(sc.offsets.size());
      Vector local(w);
      if (g.kind == GateKind::Swap) {
        const int r1 = g.support[0], r2 = g.support[1];
        const int d1 = c.registers[r1], d2 = c.registers[r2];
        require(d1 == d2, ErrorCode::DimensionMismatch, "swap between registers of different dimension");
        for (auto b : sc.bases) {
          for (Index k = 0; k < w; ++k) local(k) = psi(static_cast<Index>(b + sc.offsets[k]));
          for (int x = 0; x < d1; ++x)
            for (int y = 0; y < d1; ++y) psi(static_cast<Index>(b + sc.offsets[y * d1 + x])) = local(x * d1 + y);
        }
        continue;
      }

      Matrix u;
      std::vector<char> allowed(static_cast<std::size_t>(w), 0);
      if (g.kind == GateKind::Isometry) {
        require(g.unitary.rows() == w && g.unitary.cols() == w, ErrorCode::DimensionMismatch, "gate/window size");
        u = g.unitary;
        for (auto x : g.input_basis) allowed[x] = 1;
      } else {
        Vector st = g.kind == GateKind::PairPrep ? g.state : ghz_state(g, c.registers);
        require(st.size() == w, ErrorCode::DimensionMismatch, "prepared state does not match its registers");
        u = Matrix::Zero(w, w);
        u.col(0) = st;
        allowed[0] = 1;
      }
      double stray = 0.0;
      for (auto b : sc.bases) {
        for (Index k = 0; k < w; ++k) {
          local(k) = psi(static_cast<Index>(b + sc.offsets[k]));
          if (!allowed[k]) stray += std::norm(local(k));
        }
        Vector out = u * local;
        for (Index k = 0; k < w; ++k) psi(static_cast<Index>(b + sc.offsets[k])) = out(k);
      }
      require(stray <= tol2, ErrorCode::AncillaNotZero,
              "gate '" + g.label + "' met weight " + std::to_string(std::sqrt(stray)) + " outside its input space");
    }
  }
  return psi;
}

}  // namespace mpsrg
